#include "entrynav/filter_core.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <string>

#include "entrynav/errors.hpp"

namespace entrynav {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ContractViolation(what);
}

double condition_estimate(const Mat& A) {
  Eigen::SelfAdjointEigenSolver<Mat> es(A, Eigen::EigenvaluesOnly);
  double lo = es.eigenvalues().cwiseAbs().minCoeff();
  double hi = es.eigenvalues().cwiseAbs().maxCoeff();
  return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
}

// W as an l x l diagonal from the weight vector.
Mat diag_w(const Vec& w) { return w.asDiagonal(); }

}  // namespace

FilterState time_update(const FilterState& state, const ProcessModel& model,
                        double dt) {
  require(dt > 0.0, "time_update: dt must be positive");
  const Vec& c = model.nominal_params;
  require(state.sensitivity.cols() == c.size(),
          "time_update: sensitivity column count != parameter count");

  FilterState out;
  out.epoch = state.epoch + dt;
  out.estimate = model.step(state.estimate, c, dt);

  Mat phi = model.state_jacobian(state.estimate, c, dt);
  Mat psi = model.param_jacobian(state.estimate, c, dt);
  const Mat& gam = model.process_noise_coeff;
  out.covariance = phi * state.covariance * phi.transpose() +
                   gam * model.process_noise_cov * gam.transpose();
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
  out.sensitivity = phi * state.sensitivity + psi;

  if (!out.estimate.allFinite() || !out.covariance.allFinite()) {
    throw NumericalDivergence("time_update produced non-finite values",
                              out.epoch);
  }
  return out;
}

Mat gamma_matrix(const Mat& H, const Mat& S_prior, const Mat& Hc) {
  require(H.cols() == S_prior.rows() && H.rows() == Hc.rows() &&
              S_prior.cols() == Hc.cols(),
          "gamma_matrix: dimension mismatch");
  return H * S_prior + Hc;
}

Mat adekf_gain(const Mat& P_prior, const Mat& H, const Mat& Y, const Mat& R,
               const Mat& S_prior, const Mat& gamma, const Vec& diag_weights) {
  require(S_prior.cols() == diag_weights.size() &&
              gamma.cols() == diag_weights.size(),
          "adekf_gain: weight count mismatch");
  Mat W = diag_w(diag_weights);
  Mat innov = H * P_prior * H.transpose() + gamma * W * gamma.transpose() +
              Y * R * Y.transpose();
  Mat rhs = P_prior * H.transpose() + S_prior * W * gamma.transpose();

  Eigen::LLT<Mat> llt(innov);
  if (llt.info() != Eigen::Success) {
    throw SingularInnovation("innovation matrix not positive definite",
                             condition_estimate(innov));
  }
  // K = rhs * innov^{-1}; solve on the transposed system, innov symmetric.
  return llt.solve(rhs.transpose()).transpose();
}

Mat ekf_gain(const Mat& P_prior, const Mat& H, const Mat& Y, const Mat& R) {
  Mat s_zero = Mat::Zero(P_prior.rows(), 0);
  Mat g_zero = Mat::Zero(H.rows(), 0);
  return adekf_gain(P_prior, H, Y, R, s_zero, g_zero, Vec::Zero(0));
}

Mat dekf_gain_linear(const Mat& P_prior, const Mat& H, const Mat& Y,
                     const Mat& R, const Mat& S_prior, const Mat& gamma,
                     const std::vector<Mat>& full_weights) {
  const auto n = P_prior.rows();
  const auto m = H.rows();
  const auto l = S_prior.cols();
  require(static_cast<Eigen::Index>(full_weights.size()) == l,
          "dekf_gain_linear: one weight matrix per parameter required");

  Mat innov0 = H * P_prior * H.transpose() + Y * R * Y.transpose();
  Mat rhs = P_prior * H.transpose();
  for (Eigen::Index i = 0; i < l; ++i) {
    rhs += full_weights[static_cast<std::size_t>(i)] * S_prior.col(i) *
           gamma.col(i).transpose();
  }

  // Vectorize K (H P H^T + Y R Y^T) + sum_i W_i K g_i g_i^T = rhs with the
  // column-major identities vec(K A) = (A^T (x) I) vec(K) and
  // vec(W K G) = (G^T (x) W) vec(K).
  Mat op = Mat::Zero(n * m, n * m);
  for (Eigen::Index bi = 0; bi < m; ++bi) {
    for (Eigen::Index bj = 0; bj < m; ++bj) {
      Mat block = innov0(bj, bi) * Mat::Identity(n, n);
      for (Eigen::Index i = 0; i < l; ++i) {
        double gij = gamma(bj, i) * gamma(bi, i);
        block += gij * full_weights[static_cast<std::size_t>(i)];
      }
      op.block(bi * n, bj * n, n, n) = block;
    }
  }

  Eigen::Map<const Vec> rhs_vec(rhs.data(), n * m);
  Eigen::FullPivLU<Mat> lu(op);
  Vec k_vec = lu.solve(rhs_vec);
  double residual = (op * k_vec - rhs_vec).norm();
  if (!lu.isInvertible()) {
    throw SingularGainSystem("vectorized gain system is singular", residual);
  }
  return Eigen::Map<const Mat>(k_vec.data(), n, m);
}

Mat joseph_update(const Mat& P_prior, const Mat& K, const Mat& H, const Mat& Y,
                  const Mat& R) {
  Mat ikh = Mat::Identity(P_prior.rows(), P_prior.cols()) - K * H;
  return ikh * P_prior * ikh.transpose() +
         K * Y * R * Y.transpose() * K.transpose();
}

FilterState measurement_update(const FilterState& state_prior,
                               const MeasurementModel& model, const Vec& z,
                               GainMode mode, const SensitivityWeights& weights,
                               Vec* innovation_out, Mat* gain_out) {
  require(z.allFinite(), "measurement_update: measurement must be finite");
  const Vec& c = model.nominal_params;
  double t = state_prior.epoch;

  Mat H = model.state_jacobian(state_prior.estimate, c, t);
  Mat Hc = model.param_jacobian(state_prior.estimate, c, t);
  const Mat& Y = model.noise_coeff;
  const Mat& R = model.noise_cov;
  Mat gamma = gamma_matrix(H, state_prior.sensitivity, Hc);

  Mat K;
  switch (mode) {
    case GainMode::kEkf:
      K = ekf_gain(state_prior.covariance, H, Y, R);
      break;
    case GainMode::kAdekf:
      K = adekf_gain(state_prior.covariance, H, Y, R, state_prior.sensitivity,
                     gamma, weights.diag_weights);
      break;
    case GainMode::kDekf:
      K = dekf_gain_linear(state_prior.covariance, H, Y, R,
                           state_prior.sensitivity, gamma,
                           weights.full_weights);
      break;
  }

  Vec innovation = z - model.predict(state_prior.estimate, c, t);

  FilterState out;
  out.epoch = state_prior.epoch;
  out.estimate = state_prior.estimate + K * innovation;
  out.covariance = joseph_update(state_prior.covariance, K, H, Y, R);
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
  // dK/dc = 0 by decision: the gain is treated as parameter independent.
  out.sensitivity = state_prior.sensitivity - K * gamma;

  if (!out.estimate.allFinite() || !out.covariance.allFinite()) {
    throw NumericalDivergence("measurement_update produced non-finite values",
                              out.epoch);
  }
  if (innovation_out != nullptr) *innovation_out = innovation;
  if (gain_out != nullptr) *gain_out = K;
  return out;
}

PerturbationMatrix perturbation_matrix(const Mat& S, const Vec& sigmas) {
  require(S.cols() == sigmas.size(),
          "perturbation_matrix: sigma count mismatch");
  require((sigmas.array() >= 0.0).all(),
          "perturbation_matrix: sigmas must be nonnegative");
  PerturbationMatrix out;
  out.values = S * sigmas.asDiagonal();
  out.param_sigmas = sigmas;
  return out;
}

double desensitized_cost(const Mat& K, const Mat& P_prior, const Mat& H,
                         const Mat& Y, const Mat& R, const Mat& S_prior,
                         const Mat& gamma, const Vec& diag_weights) {
  Mat p_post = joseph_update(P_prior, K, H, Y, R);
  Mat s_post = S_prior - K * gamma;
  return p_post.trace() +
         (s_post * diag_w(diag_weights) * s_post.transpose()).trace();
}

Mat stationarity_gradient(const Mat& K, const Mat& P_prior, const Mat& H,
                          const Mat& Y, const Mat& R, const Mat& S_prior,
                          const Mat& gamma, const Vec& diag_weights) {
  Mat W = diag_w(diag_weights);
  return 2.0 * K * (H * P_prior * H.transpose() + Y * R * Y.transpose()) -
         2.0 * P_prior * H.transpose() -
         2.0 * S_prior * W * gamma.transpose() +
         2.0 * K * gamma * W * gamma.transpose();
}

double gain_stationarity_residual(const Mat& K, const Mat& P_prior,
                                  const Mat& H, const Mat& Y, const Mat& R,
                                  const Mat& S_prior, const Mat& gamma,
                                  const Vec& diag_weights,
                                  double* reference_norm) {
  Mat grad = stationarity_gradient(K, P_prior, H, Y, R, S_prior, gamma,
                                   diag_weights);
  if (reference_norm != nullptr) {
    Mat W = diag_w(diag_weights);
    Mat positive =
        2.0 * K * (H * P_prior * H.transpose() + Y * R * Y.transpose()) +
        2.0 * K * gamma * W * gamma.transpose();
    *reference_norm = positive.norm();
  }
  return grad.norm();
}

}  // namespace entrynav
