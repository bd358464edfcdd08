#include "entrynav/monte_carlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>
#include <utility>

#include <Eigen/Eigenvalues>

#include "entrynav/entry_dynamics.hpp"
#include "entrynav/errors.hpp"

namespace entrynav {

namespace {

int epoch_count(const ScenarioConfig& cfg) {
  return static_cast<int>(std::llround(cfg.horizon / cfg.dt));
}

int mode_index(GainMode mode) {
  return mode == GainMode::kAdekf ? kModeAdekf : kModeEkf;
}

}  // namespace

UncertainParams sample_params(const ScenarioConfig& cfg, RunRng& rng) {
  UncertainParams c;
  c.c1 = rng.uniform(-cfg.c_halfwidth(0), cfg.c_halfwidth(0));
  c.c2 = rng.uniform(-cfg.c_halfwidth(1), cfg.c_halfwidth(1));
  return c;
}

TruthAndMeasurements simulate_truth(const ScenarioConfig& cfg,
                                    const UncertainParams& c, RunRng& rng) {
  const int steps = epoch_count(cfg);
  TruthAndMeasurements tm;
  tm.c = c;
  tm.truth.reserve(steps + 1);
  tm.measurements.reserve(steps);

  // Accelerometer noise shaping; the symmetric square root stays finite for
  // singular covariances (a Cholesky factor would not) and reduces to the
  // per-axis sigmas for the diagonal default.
  Eigen::SelfAdjointEigenSolver<Mat3> es(cfg.imu.accel_noise_cov);
  const Mat3 noise_l = es.eigenvectors() *
                       es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                       es.eigenvectors().transpose();
  const Vec3 range_sigma = cfg.r_diag.tail<3>().cwiseSqrt();

  Vec6 x = cfg.truth_initial.vec();
  tm.truth.push_back(x);
  for (int k = 1; k <= steps; ++k) {
    x = rk4_step(x, c, cfg.dt, cfg.vehicle_truth, cfg.planet);
    tm.truth.push_back(x);
    const double t = k * cfg.dt;
    const Vec6 clean =
        measurement_predict(x, c, t, cfg.beacons, cfg.vehicle_truth, cfg.planet);

    MeasurementBundle z;
    z.epoch = t;
    Vec3 accel_noise;
    for (int i = 0; i < 3; ++i) accel_noise(i) = rng.gaussian();
    z.accel = clean.head<3>() + cfg.imu.accel_bias + noise_l * accel_noise;
    for (int i = 0; i < 3; ++i)
      z.ranges(i) = clean(3 + i) + rng.gaussian(range_sigma(i));
    tm.measurements.push_back(z);
  }
  return tm;
}

ProcessModel make_process_model(const ScenarioConfig& cfg) {
  const PlanetModel planet = cfg.planet;
  const VehicleModel vehicle = cfg.vehicle_filter;

  ProcessModel pm;
  pm.step = [planet, vehicle](const Vec& x, const Vec& c, double dt) -> Vec {
    const Vec6 x6 = x;
    const UncertainParams cp{c(0), c(1)};
    return rk4_step(x6, cp, dt, vehicle, planet);
  };
  pm.state_jacobian = [planet, vehicle](const Vec& x, const Vec& c,
                                        double dt) -> Mat {
    const Vec6 x6 = x;
    const UncertainParams cp{c(0), c(1)};
    return discrete_state_jacobian(x6, cp, dt, vehicle, planet);
  };
  pm.param_jacobian = [planet, vehicle](const Vec& x, const Vec& /*c*/,
                                        double dt) -> Mat {
    const Vec6 x6 = x;
    return discrete_param_jacobian(x6, dt, vehicle, planet);
  };
  pm.process_noise_coeff = Mat::Identity(6, 6);
  pm.process_noise_cov = cfg.q_diag.asDiagonal();
  pm.nominal_params = Vec::Zero(2);
  return pm;
}

MeasurementModel make_measurement_model(const ScenarioConfig& cfg) {
  const PlanetModel planet = cfg.planet;
  const VehicleModel vehicle = cfg.vehicle_filter;
  const auto beacons = cfg.beacons;

  MeasurementModel mm;
  mm.predict = [planet, vehicle, beacons](const Vec& x, const Vec& c,
                                          double t) -> Vec {
    const Vec6 x6 = x;
    const UncertainParams cp{c(0), c(1)};
    return measurement_predict(x6, cp, t, beacons, vehicle, planet);
  };
  mm.state_jacobian = [planet, vehicle, beacons](const Vec& x, const Vec& /*c*/,
                                                 double t) -> Mat {
    const Vec6 x6 = x;
    return measurement_jacobians(x6, t, beacons, vehicle, planet).H;
  };
  mm.param_jacobian = [planet, vehicle, beacons](const Vec& x, const Vec& /*c*/,
                                                 double t) -> Mat {
    const Vec6 x6 = x;
    return measurement_jacobians(x6, t, beacons, vehicle, planet).Hc;
  };
  mm.noise_coeff = Mat::Identity(6, 6);
  mm.noise_cov = cfg.r_diag.asDiagonal();
  mm.nominal_params = Vec::Zero(2);
  return mm;
}

RunHistory run_filter(const ScenarioConfig& cfg, const TruthAndMeasurements& tm,
                      GainMode mode) {
  const int steps = epoch_count(cfg);
  const ProcessModel pm = make_process_model(cfg);
  const MeasurementModel mm = make_measurement_model(cfg);

  SensitivityWeights weights;
  weights.diag_weights = cfg.weights;

  RunHistory h;
  h.c = tm.c;
  h.mode = mode;
  h.epochs.reserve(steps + 1);
  h.truth.reserve(steps + 1);
  h.estimate.reserve(steps + 1);
  h.cov_diag.reserve(steps + 1);
  h.cov_min_eig.reserve(steps + 1);
  h.sensitivity.reserve(steps + 1);
  h.perturbation.reserve(steps + 1);
  h.innovation.reserve(steps + 1);

  FilterState state;
  state.epoch = 0.0;
  state.estimate = cfg.estimate_initial.vec();
  state.covariance = cfg.p0_diag.asDiagonal();
  state.sensitivity = Mat::Zero(6, 2);

  const auto record = [&](const FilterState& s, int k, const Vec& innov) {
    h.epochs.push_back(k * cfg.dt);
    h.truth.push_back(tm.truth[k]);
    h.estimate.push_back(Vec6(s.estimate));
    h.cov_diag.push_back(Vec6(s.covariance.diagonal()));
    Eigen::SelfAdjointEigenSolver<Mat> es(s.covariance,
                                          Eigen::EigenvaluesOnly);
    h.cov_min_eig.push_back(es.eigenvalues()(0));
    h.sensitivity.push_back(Mat62(s.sensitivity));
    h.perturbation.push_back(
        Mat62(perturbation_matrix(s.sensitivity, cfg.c_sigma).values));
    h.innovation.push_back(Vec6(innov));
  };

  record(state, 0, Vec::Zero(6));
  for (int k = 1; k <= steps; ++k) {
    try {
      state = time_update(state, pm, cfg.dt);
      Vec innov = Vec::Zero(6);
      state = measurement_update(state, mm, tm.measurements[k - 1].vec(), mode,
                                 weights, &innov);
      record(state, k, innov);
    } catch (const NumericalDivergence& e) {
      h.diverged = true;
      h.diverged_epoch = e.epoch();
      break;
    } catch (const FilterError&) {
      h.diverged = true;
      h.diverged_epoch = k * cfg.dt;
      break;
    }
  }
  return h;
}

std::vector<Vec6> rmse(const std::vector<RunHistory>& histories) {
  std::vector<const RunHistory*> usable;
  for (const auto& h : histories)
    if (!h.diverged) usable.push_back(&h);
  if (usable.empty())
    throw EmptyReport("rmse: every history diverged, nothing to aggregate");

  const std::size_t epochs = usable.front()->epochs.size();
  std::vector<Vec6> out(epochs, Vec6::Zero());
  for (const auto* h : usable) {
    if (h->epochs.size() != epochs)
      throw ContractViolation("rmse: histories disagree on epoch count");
    for (std::size_t k = 0; k < epochs; ++k) {
      const Vec6 e = h->estimate[k] - h->truth[k];
      out[k] += e.cwiseProduct(e);
    }
  }
  const double inv = 1.0 / static_cast<double>(usable.size());
  for (auto& v : out) v = (v * inv).cwiseSqrt();
  return out;
}

NmeResult nme_test(const std::vector<RunHistory>& histories) {
  std::vector<const RunHistory*> usable;
  for (const auto& h : histories)
    if (!h.diverged) usable.push_back(&h);
  if (usable.empty())
    throw EmptyReport("nme_test: every history diverged, nothing to aggregate");

  const std::size_t epochs = usable.front()->epochs.size();
  NmeResult res;
  res.runs_used = static_cast<int>(usable.size());
  res.threshold = 1.96 / std::sqrt(static_cast<double>(res.runs_used));
  res.statistic.assign(epochs, Vec6::Zero());
  for (const auto* h : usable) {
    if (h->epochs.size() != epochs)
      throw ContractViolation("nme_test: histories disagree on epoch count");
    for (std::size_t k = 0; k < epochs; ++k) {
      for (int i = 0; i < 6; ++i) {
        const double var = h->cov_diag[k](i);
        if (!(var > 0.0))
          throw InvalidCovariance(
              "nme_test: nonpositive predicted variance at epoch " +
              std::to_string(h->epochs[k]) + ", state " + std::to_string(i));
        res.statistic[k](i) +=
            (h->estimate[k](i) - h->truth[k](i)) / std::sqrt(var);
      }
    }
  }
  for (auto& v : res.statistic) v /= static_cast<double>(res.runs_used);
  return res;
}

Vec6 three_sigma_capture(const RunHistory& history) {
  Vec6 frac = Vec6::Zero();
  const std::size_t epochs = history.epochs.size();
  if (epochs == 0) return frac;
  for (std::size_t k = 0; k < epochs; ++k) {
    for (int i = 0; i < 6; ++i) {
      const double e = std::abs(history.estimate[k](i) - history.truth[k](i));
      const double bound = 3.0 * std::sqrt(std::max(history.cov_diag[k](i), 0.0));
      if (e <= bound) frac(i) += 1.0;
    }
  }
  return frac / static_cast<double>(epochs);
}

MonteCarloReport run_campaign(const ScenarioConfig& cfg, int threads,
                              RunHistory* keep_ekf_run0,
                              RunHistory* keep_adekf_run0) {
  const int steps = epoch_count(cfg);
  const int total = cfg.runs;
  const int wave = std::max(1, threads);

  MonteCarloReport report;
  report.dt = cfg.dt;
  report.runs_total = total;
  report.epochs.resize(steps + 1);
  for (int k = 0; k <= steps; ++k) report.epochs[k] = k * cfg.dt;

  struct Accum {
    std::vector<Vec6> sum_sq;
    std::vector<Vec6> sum_std;
    std::vector<Mat62> sum_abs_s;
    Vec6 capture_sum = Vec6::Zero();
    double worst_health = std::numeric_limits<double>::infinity();
    int used = 0;
    int diverged = 0;
  };
  std::array<Accum, 2> acc;
  for (auto& a : acc) {
    a.sum_sq.assign(steps + 1, Vec6::Zero());
    a.sum_std.assign(steps + 1, Vec6::Zero());
    a.sum_abs_s.assign(steps + 1, Mat62::Zero());
  }

  const auto fold = [&](const RunHistory& h) {
    Accum& a = acc[mode_index(h.mode)];
    if (h.diverged) {
      ++a.diverged;
      return;
    }
    ++a.used;
    for (int k = 0; k <= steps; ++k) {
      const Vec6 e = h.estimate[k] - h.truth[k];
      a.sum_sq[k] += e.cwiseProduct(e);
      for (int i = 0; i < 6; ++i) {
        const double var = h.cov_diag[k](i);
        if (!(var > 0.0))
          throw InvalidCovariance(
              "run_campaign: nonpositive predicted variance at epoch " +
              std::to_string(h.epochs[k]) + ", state " + std::to_string(i));
        a.sum_std[k](i) += e(i) / std::sqrt(var);
      }
      a.sum_abs_s[k] += h.sensitivity[k].cwiseAbs();
      const double trace = h.cov_diag[k].sum();
      if (trace > 0.0)
        a.worst_health = std::min(a.worst_health, h.cov_min_eig[k] / trace);
    }
    a.capture_sum += three_sigma_capture(h);
  };

  for (int start = 0; start < total; start += wave) {
    const int batch = std::min(wave, total - start);
    std::vector<std::array<RunHistory, 2>> results(batch);
    std::vector<std::thread> pool;
    pool.reserve(batch);
    for (int j = 0; j < batch; ++j) {
      const int idx = start + j;
      pool.emplace_back([&results, &cfg, j, idx]() {
        try {
          RunRng rng(derive_run_seed(cfg.seed, idx));
          const UncertainParams c = sample_params(cfg, rng);
          const TruthAndMeasurements tm = simulate_truth(cfg, c, rng);
          results[j][kModeEkf] = run_filter(cfg, tm, GainMode::kEkf);
          results[j][kModeAdekf] = run_filter(cfg, tm, GainMode::kAdekf);
        } catch (const FilterError&) {
          // Truth generation itself failed; both modes count as diverged.
          results[j][kModeEkf].diverged = true;
          results[j][kModeEkf].mode = GainMode::kEkf;
          results[j][kModeAdekf].diverged = true;
          results[j][kModeAdekf].mode = GainMode::kAdekf;
        }
        results[j][kModeEkf].seed = derive_run_seed(cfg.seed, idx);
        results[j][kModeAdekf].seed = derive_run_seed(cfg.seed, idx);
      });
    }
    for (auto& t : pool) t.join();
    for (int j = 0; j < batch; ++j) {
      fold(results[j][kModeEkf]);
      fold(results[j][kModeAdekf]);
      if (start + j == 0) {
        if (keep_ekf_run0) *keep_ekf_run0 = std::move(results[j][kModeEkf]);
        if (keep_adekf_run0)
          *keep_adekf_run0 = std::move(results[j][kModeAdekf]);
      }
    }
  }

  if (acc[kModeEkf].used == 0 && acc[kModeAdekf].used == 0)
    throw EmptyReport("run_campaign: all runs diverged in both modes");

  for (int m = 0; m < 2; ++m) {
    Accum& a = acc[m];
    report.runs_diverged[m] = a.diverged;
    if (a.used == 0) continue;
    const double inv = 1.0 / static_cast<double>(a.used);
    report.nme_threshold[m] = 1.96 / std::sqrt(static_cast<double>(a.used));
    report.rmse[m].resize(steps + 1);
    report.nme[m].resize(steps + 1);
    report.mean_abs_sensitivity[m].resize(steps + 1);
    for (int k = 0; k <= steps; ++k) {
      report.rmse[m][k] = (a.sum_sq[k] * inv).cwiseSqrt();
      report.nme[m][k] = a.sum_std[k] * inv;
      report.mean_abs_sensitivity[m][k] = a.sum_abs_s[k] * inv;
    }
    report.capture_fraction[m] = a.capture_sum * inv;
    report.worst_cov_health[m] = a.worst_health;
  }
  return report;
}

}  // namespace entrynav
