#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace entrynav {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Estimate, covariance, and sensitivity at one epoch. The sensitivity columns
// are the partials of the estimate with respect to each uncertain parameter.
struct FilterState {
  double epoch = 0.0;
  Vec estimate;     // n
  Mat covariance;   // n x n
  Mat sensitivity;  // n x l
};

// Discrete process model. The callables take (x, c, dt); the filter always
// evaluates them at the nominal parameter vector.
struct ProcessModel {
  std::function<Vec(const Vec&, const Vec&, double)> step;
  std::function<Mat(const Vec&, const Vec&, double)> state_jacobian;  // Phi
  std::function<Mat(const Vec&, const Vec&, double)> param_jacobian;  // Psi
  Mat process_noise_coeff;  // Gamma, n x n
  Mat process_noise_cov;    // Q, n x n PSD
  Vec nominal_params;       // c-bar, l
};

// Measurement model; callables take (x, c, t).
struct MeasurementModel {
  std::function<Vec(const Vec&, const Vec&, double)> predict;
  std::function<Mat(const Vec&, const Vec&, double)> state_jacobian;  // H
  std::function<Mat(const Vec&, const Vec&, double)> param_jacobian;  // Hc
  Mat noise_coeff;  // Y, m x m
  Mat noise_cov;    // R, m x m positive definite
  Vec nominal_params;
};

// Diagonal weights drive the analytical gain; the optional full matrices
// (one n x n PSD matrix per parameter) drive the linear-solve baseline.
struct SensitivityWeights {
  Vec diag_weights;
  std::vector<Mat> full_weights;

  bool has_full() const { return !full_weights.empty(); }
};

struct PerturbationMatrix {
  Mat values;        // n x l, sensitivity scaled column-wise by sigmas
  Vec param_sigmas;  // l
};

enum class GainMode { kEkf, kAdekf, kDekf };

// Prior propagation: x = f(x, c-bar), P = Phi P Phi^T + Gamma Q Gamma^T
// (symmetrized), S = Phi S + Psi. Throws NumericalDivergence when the
// propagated state or covariance stops being finite.
FilterState time_update(const FilterState& state, const ProcessModel& model,
                        double dt);

// gamma = H S + Hc.
Mat gamma_matrix(const Mat& H, const Mat& S_prior, const Mat& Hc);

// Analytical desensitized gain
//   K = (P H^T + S W gamma^T)(H P H^T + gamma W gamma^T + Y R Y^T)^{-1}
// solved through a Cholesky factorization of the innovation matrix. With all
// weights zero the added terms are exact zeros, so the result follows the
// plain Kalman gain through the identical arithmetic path.
Mat adekf_gain(const Mat& P_prior, const Mat& H, const Mat& Y, const Mat& R,
               const Mat& S_prior, const Mat& gamma, const Vec& diag_weights);

// Convenience wrapper: the zero-weight special case of adekf_gain.
Mat ekf_gain(const Mat& P_prior, const Mat& H, const Mat& Y, const Mat& R);

// Independent oracle: solves the linear matrix equation
//   K (H P H^T + Y R Y^T) + sum_i W_i K gamma_i gamma_i^T
//     = P H^T + sum_i W_i s_i gamma_i^T
// for K by vectorizing into an (n*m) x (n*m) dense system. Equals adekf_gain
// whenever W_i = w_i * I.
Mat dekf_gain_linear(const Mat& P_prior, const Mat& H, const Mat& Y,
                     const Mat& R, const Mat& S_prior, const Mat& gamma,
                     const std::vector<Mat>& full_weights);

// Joseph-form covariance update, valid for any gain:
//   (I - K H) P (I - K H)^T + K Y R Y^T K^T.
// Not symmetrized here so its intrinsic symmetry can be tested.
Mat joseph_update(const Mat& P_prior, const Mat& K, const Mat& H, const Mat& Y,
                  const Mat& R);

// Posterior update: x += K (z - h(x, c-bar, t)), Joseph covariance
// (symmetrized), S -= K gamma. dK/dc = 0 is hard-coded in the sensitivity
// update. Optional outputs receive the innovation and gain actually used.
FilterState measurement_update(const FilterState& state_prior,
                               const MeasurementModel& model, const Vec& z,
                               GainMode mode, const SensitivityWeights& weights,
                               Vec* innovation_out = nullptr,
                               Mat* gain_out = nullptr);

// Column j of the sensitivity scaled by sigma_j: the 1-sigma estimate error
// attributable to each parameter.
PerturbationMatrix perturbation_matrix(const Mat& S, const Vec& sigmas);

// Trace cost the analytical gain minimizes:
//   J = Tr(P_post(K)) + Tr(S_post(K) W S_post(K)^T).
double desensitized_cost(const Mat& K, const Mat& P_prior, const Mat& H,
                         const Mat& Y, const Mat& R, const Mat& S_prior,
                         const Mat& gamma, const Vec& diag_weights);

// Closed-form dJ/dK:
//   2 K (H P H^T + Y R Y^T) - 2 P H^T - 2 S W gamma^T + 2 K gamma W gamma^T.
Mat stationarity_gradient(const Mat& K, const Mat& P_prior, const Mat& H,
                          const Mat& Y, const Mat& R, const Mat& S_prior,
                          const Mat& gamma, const Vec& diag_weights);

// Frobenius norm of the closed-form gradient at K. When reference_norm is
// supplied it receives the norm of the gradient's positive terms, the scale
// against which the residual should be judged.
double gain_stationarity_residual(const Mat& K, const Mat& P_prior,
                                  const Mat& H, const Mat& Y, const Mat& R,
                                  const Mat& S_prior, const Mat& gamma,
                                  const Vec& diag_weights,
                                  double* reference_norm = nullptr);

}  // namespace entrynav
