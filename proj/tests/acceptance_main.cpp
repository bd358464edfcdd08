// Acceptance suite: one criterion per line, nonzero exit when any fails.
// Every tolerance is fixed here; failures are reported, never masked.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "entrynav/csv_reports.hpp"
#include "entrynav/entry_dynamics.hpp"
#include "entrynav/errors.hpp"
#include "entrynav/filter_core.hpp"
#include "entrynav/monte_carlo.hpp"
#include "entrynav/rng.hpp"
#include "entrynav/validation.hpp"

namespace entrynav {
namespace {

namespace fs = std::filesystem;

struct Criterion {
  std::string name;
  bool passed = false;
  std::string detail;
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3e", v);
  return buf;
}

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

int worker_threads() {
  const unsigned hw = std::thread::hardware_concurrency();
  return std::max(1, std::min(8, static_cast<int>(hw)));
}

double mean_abs_sensitivity_tail(const RunHistory& h, int state, int col,
                                 double from_epoch) {
  double sum = 0.0;
  int count = 0;
  for (std::size_t k = 0; k < h.epochs.size(); ++k) {
    if (h.epochs[k] < from_epoch) continue;
    sum += std::abs(h.sensitivity[k](state, col));
    ++count;
  }
  return count > 0 ? sum / count : std::numeric_limits<double>::quiet_NaN();
}

double mean_rmse_tail(const MonteCarloReport& report, int mode, int state,
                      double from_epoch) {
  double sum = 0.0;
  int count = 0;
  for (std::size_t k = 0; k < report.epochs.size(); ++k) {
    if (report.epochs[k] < from_epoch) continue;
    sum += report.rmse[mode][k](state);
    ++count;
  }
  return count > 0 ? sum / count : std::numeric_limits<double>::quiet_NaN();
}

RunHistory preset_run(const ScenarioConfig& base, double c1, double c2,
                      double w1, double w2, int run_index, GainMode mode) {
  ScenarioConfig cfg = base;
  cfg.weights << w1, w2;
  RunRng rng(derive_run_seed(cfg.seed, run_index));
  const TruthAndMeasurements tm = simulate_truth(cfg, {c1, c2}, rng);
  return run_filter(cfg, tm, mode);
}

// 1. With zero sensitivity weights the desensitized filter must follow the
// plain EKF trajectory to 1e-10 relative at every epoch.
Criterion check_zero_weight_reduction(const ScenarioConfig& base) {
  Criterion c{"zero_weight_reduction"};
  ScenarioConfig cfg = base;
  cfg.weights.setZero();

  RunRng rng(derive_run_seed(cfg.seed, 0));
  const UncertainParams params = sample_params(cfg, rng);
  const TruthAndMeasurements tm = simulate_truth(cfg, params, rng);
  const RunHistory ekf = run_filter(cfg, tm, GainMode::kEkf);
  const RunHistory adekf = run_filter(cfg, tm, GainMode::kAdekf);
  if (ekf.diverged || adekf.diverged) {
    c.detail = "run diverged, cannot compare";
    return c;
  }

  double worst = 0.0;
  for (std::size_t k = 0; k < ekf.epochs.size(); ++k) {
    const double rel = (adekf.estimate[k] - ekf.estimate[k]).norm() /
                       std::max(1.0, ekf.estimate[k].norm());
    worst = std::max(worst, rel);
  }
  c.passed = worst <= 1e-10;
  c.detail = "max relative estimate gap " + sci(worst) + " (tol 1e-10), " +
             std::to_string(ekf.epochs.size()) + " epochs";
  return c;
}

// 2. Analytical gain equals the vectorized linear-solve gain on 1000 random
// instances with isotropic weights.
Criterion check_gain_oracle_equivalence() {
  Criterion c{"gain_oracle_equivalence"};
  RunRng rng(424242);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 2 + static_cast<int>(rng.raw() % 7);
    const int m = 1 + static_cast<int>(rng.raw() % 8);
    const int l = 1 + static_cast<int>(rng.raw() % 3);

    auto fill = [&rng](int rows, int cols) {
      Mat a(rows, cols);
      for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) a(i, j) = rng.gaussian();
      return a;
    };
    Mat a = fill(n, n);
    const Mat P = a * a.transpose() + 0.1 * Mat::Identity(n, n);
    const Mat H = fill(m, n);
    const Mat Y = Mat::Identity(m, m) + 0.3 * fill(m, m);
    Mat b = fill(m, m);
    const Mat R = b * b.transpose() + 0.1 * Mat::Identity(m, m);
    const Mat S = fill(n, l);
    const Mat gamma = fill(m, l);
    Vec w(l);
    for (int i = 0; i < l; ++i) w(i) = rng.uniform(0.0, 2.0);

    std::vector<Mat> full;
    for (int i = 0; i < l; ++i) full.push_back(w(i) * Mat::Identity(n, n));

    const Mat ka = adekf_gain(P, H, Y, R, S, gamma, w);
    const Mat ko = dekf_gain_linear(P, H, Y, R, S, gamma, full);
    worst = std::max(worst,
                     (ka - ko).norm() / std::max(ka.norm(), 1e-300));
  }
  c.passed = worst <= 1e-10;
  c.detail =
      "max relative gain difference " + sci(worst) + " over 1000 instances "
      "(tol 1e-10)";
  return c;
}

// 3 and 4 share one pass along the trajectory: the computed gain must be a
// stationary point of the trace cost at every epoch, and the raw Joseph
// update must stay symmetric positive semidefinite throughout.
struct TrajectoryAudit {
  bool completed = false;
  double worst_stationarity = 0.0;
  double worst_asymmetry = 0.0;
  double worst_health = std::numeric_limits<double>::infinity();
  std::size_t epochs = 0;
};

TrajectoryAudit audit_trajectory(const ScenarioConfig& cfg) {
  TrajectoryAudit audit;
  RunRng rng(derive_run_seed(cfg.seed, 0));
  const UncertainParams params = sample_params(cfg, rng);
  const TruthAndMeasurements tm = simulate_truth(cfg, params, rng);

  const ProcessModel pm = make_process_model(cfg);
  const MeasurementModel mm = make_measurement_model(cfg);
  SensitivityWeights weights;
  weights.diag_weights = cfg.weights;
  const Vec w = cfg.weights;

  FilterState state;
  state.epoch = 0.0;
  state.estimate = cfg.estimate_initial.vec();
  state.covariance = cfg.p0_diag.asDiagonal();
  state.sensitivity = Mat::Zero(6, 2);

  const Vec c0 = Vec::Zero(2);
  const int steps = static_cast<int>(std::llround(cfg.horizon / cfg.dt));
  for (int k = 1; k <= steps; ++k) {
    state = time_update(state, pm, cfg.dt);
    const double t = k * cfg.dt;
    const Mat H = mm.state_jacobian(state.estimate, c0, t);
    const Mat Hc = mm.param_jacobian(state.estimate, c0, t);
    const Mat gamma = gamma_matrix(H, state.sensitivity, Hc);
    const Mat K = adekf_gain(state.covariance, H, mm.noise_coeff, mm.noise_cov,
                             state.sensitivity, gamma, w);

    double ref = 0.0;
    const double res =
        gain_stationarity_residual(K, state.covariance, H, mm.noise_coeff,
                                   mm.noise_cov, state.sensitivity, gamma, w,
                                   &ref);
    audit.worst_stationarity =
        std::max(audit.worst_stationarity, res / std::max(ref, 1e-300));

    const Mat P_joseph = joseph_update(state.covariance, K, H, mm.noise_coeff,
                                       mm.noise_cov);
    audit.worst_asymmetry =
        std::max(audit.worst_asymmetry,
                 (P_joseph - P_joseph.transpose()).norm() /
                     std::max(P_joseph.norm(), 1e-300));
    const Mat sym = 0.5 * (P_joseph + P_joseph.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(sym, Eigen::EigenvaluesOnly);
    audit.worst_health = std::min(
        audit.worst_health, es.eigenvalues()(0) / sym.trace());

    state = measurement_update(state, mm, tm.measurements[k - 1].vec(),
                               GainMode::kAdekf, weights);
    ++audit.epochs;
  }
  audit.completed = true;
  return audit;
}

Criterion check_gain_stationarity(const TrajectoryAudit& audit,
                                  const std::vector<CheckResult>& suite) {
  Criterion c{"gain_stationarity"};
  if (!audit.completed) {
    c.detail = "trajectory audit did not complete";
    return c;
  }
  const CheckResult* fd = nullptr;
  for (const auto& r : suite)
    if (r.name == "gain_gradient_matches_fd") fd = &r;
  const bool fd_ok = fd != nullptr && fd->passed;
  c.passed = audit.worst_stationarity <= 1e-8 && fd_ok;
  c.detail = "max on-trajectory gradient residual " +
             sci(audit.worst_stationarity) + " (tol 1e-8) over " +
             std::to_string(audit.epochs) + " epochs; gradient vs central "
             "difference " + std::string(fd_ok ? "ok" : "FAILED");
  return c;
}

Criterion check_covariance_health(const TrajectoryAudit& audit,
                                  const MonteCarloReport& campaign) {
  Criterion c{"covariance_health"};
  if (!audit.completed) {
    c.detail = "trajectory audit did not complete";
    return c;
  }
  const double campaign_health = std::min(campaign.worst_cov_health[kModeEkf],
                                          campaign.worst_cov_health[kModeAdekf]);
  c.passed = audit.worst_asymmetry <= 1e-12 && audit.worst_health >= -1e-12 &&
             campaign_health >= -1e-12;
  c.detail = "joseph asymmetry " + sci(audit.worst_asymmetry) +
             ", min eig/trace on trajectory " + sci(audit.worst_health) +
             ", across campaign " + sci(campaign_health) + " (floor -1e-12)";
  return c;
}

// 5. Density-uncertainty preset: the desensitized filter must carry less
// final-100 s |dstate/dc1| than the EKF in radius, velocity, and FPA.
Criterion check_density_sensitivity(const ScenarioConfig& base) {
  Criterion c{"density_sensitivity_reduction"};
  const RunHistory ekf =
      preset_run(base, 0.075, 0.0, 0.01, 0.0, 9001, GainMode::kEkf);
  const RunHistory adekf =
      preset_run(base, 0.075, 0.0, 0.01, 0.0, 9001, GainMode::kAdekf);
  if (ekf.diverged || adekf.diverged) {
    c.detail = "preset run diverged";
    return c;
  }
  const double from = base.horizon - 100.0;
  const char* names[3] = {"r", "v", "fpa"};
  bool all_lower = true;
  std::string detail;
  for (int i = 0; i < 3; ++i) {
    const double se = mean_abs_sensitivity_tail(ekf, i, 0, from);
    const double sa = mean_abs_sensitivity_tail(adekf, i, 0, from);
    all_lower = all_lower && (sa < se);
    if (!detail.empty()) detail += ", ";
    detail += std::string(names[i]) + " adekf " + sci(sa) + " vs ekf " +
              sci(se);
  }
  c.passed = all_lower;
  c.detail = "final-100s mean |dx/dc1|: " + detail;
  return c;
}

// 6. Lift-uncertainty preset: lower final-100 s |dstate/dc2| in at least
// four of the six states.
Criterion check_lift_sensitivity(const ScenarioConfig& base) {
  Criterion c{"lift_sensitivity_reduction"};
  const RunHistory ekf =
      preset_run(base, 0.0, 0.05, 0.0, 0.1, 9002, GainMode::kEkf);
  const RunHistory adekf =
      preset_run(base, 0.0, 0.05, 0.0, 0.1, 9002, GainMode::kAdekf);
  if (ekf.diverged || adekf.diverged) {
    c.detail = "preset run diverged";
    return c;
  }
  const double from = base.horizon - 100.0;
  int lower = 0;
  for (int i = 0; i < 6; ++i) {
    const double se = mean_abs_sensitivity_tail(ekf, i, 1, from);
    const double sa = mean_abs_sensitivity_tail(adekf, i, 1, from);
    if (sa < se) ++lower;
  }
  c.passed = lower >= 4;
  c.detail = "adekf lower in " + std::to_string(lower) +
             " of 6 states (needs >= 4)";
  return c;
}

// 7. Paired campaign: final-100 s mean RMSE strictly lower for velocity,
// FPA, longitude, latitude, azimuth; radius within 5 percent of the EKF.
Criterion check_campaign_rmse(const ScenarioConfig& cfg,
                              const MonteCarloReport& report) {
  Criterion c{"campaign_rmse"};
  const double from = cfg.horizon - 100.0;
  const char* names[6] = {"r", "v", "fpa", "lon", "lat", "azi"};
  bool ok = true;
  std::string detail;
  for (int i = 0; i < 6; ++i) {
    const double ekf = mean_rmse_tail(report, kModeEkf, i, from);
    const double adekf = mean_rmse_tail(report, kModeAdekf, i, from);
    const double ratio = adekf / ekf;
    if (i == 0) {
      ok = ok && (ratio <= 1.05);
    } else {
      ok = ok && (adekf < ekf);
    }
    if (!detail.empty()) detail += ", ";
    detail += std::string(names[i]) + " " + fixed3(ratio);
  }
  c.passed = ok;
  c.detail = "adekf/ekf rmse ratios: " + detail +
             " (r <= 1.05, others < 1)";
  return c;
}

// 8. Consistency: the desensitized filter must stay below the normalized
// mean error threshold at 90 percent of epochs in every state, while the
// EKF must exceed it at 25 percent of epochs in r, v, fpa.
Criterion check_campaign_consistency(const MonteCarloReport& report) {
  Criterion c{"campaign_consistency"};
  const char* names[6] = {"r", "v", "fpa", "lon", "lat", "azi"};
  std::array<double, 6> below_adekf{};
  std::array<double, 6> exceed_ekf{};
  const std::size_t epochs = report.epochs.size();
  for (std::size_t k = 0; k < epochs; ++k) {
    for (int i = 0; i < 6; ++i) {
      if (std::abs(report.nme[kModeAdekf][k](i)) <=
          report.nme_threshold[kModeAdekf])
        below_adekf[i] += 1.0;
      if (std::abs(report.nme[kModeEkf][k](i)) >
          report.nme_threshold[kModeEkf])
        exceed_ekf[i] += 1.0;
    }
  }
  bool adekf_ok = true;
  std::string below;
  for (int i = 0; i < 6; ++i) {
    below_adekf[i] /= static_cast<double>(epochs);
    exceed_ekf[i] /= static_cast<double>(epochs);
    adekf_ok = adekf_ok && (below_adekf[i] >= 0.90);
    if (!below.empty()) below += " ";
    below += std::string(names[i]) + "=" + fixed3(below_adekf[i]);
  }
  const bool ekf_ok = exceed_ekf[0] >= 0.25 && exceed_ekf[1] >= 0.25 &&
                      exceed_ekf[2] >= 0.25;
  c.passed = adekf_ok && ekf_ok;
  c.detail = "adekf below-threshold fractions (need >= 0.90): " + below +
             "; ekf exceed fractions r=" + fixed3(exceed_ekf[0]) + " v=" +
             fixed3(exceed_ekf[1]) + " fpa=" + fixed3(exceed_ekf[2]) +
             " (need >= 0.25)";
  return c;
}

// 9. Representative perturbed run: single-run desensitized errors inside the
// three-sigma bounds at 90 percent of epochs in r, v, lon, lat.
Criterion check_error_bound_capture(const ScenarioConfig& base) {
  Criterion c{"error_bound_capture"};
  const RunHistory adekf =
      preset_run(base, 0.075, -0.05, 0.01, 0.1, 9003, GainMode::kAdekf);
  if (adekf.diverged) {
    c.detail = "preset run diverged";
    return c;
  }
  const Vec6 capture = three_sigma_capture(adekf);
  const int states[4] = {0, 1, 3, 4};
  const char* names[4] = {"r", "v", "lon", "lat"};
  bool ok = true;
  std::string detail;
  for (int j = 0; j < 4; ++j) {
    ok = ok && (capture(states[j]) >= 0.90);
    if (!detail.empty()) detail += " ";
    detail += std::string(names[j]) + "=" + fixed3(capture(states[j]));
  }
  c.passed = ok;
  c.detail = "3-sigma capture fractions (need >= 0.90): " + detail;
  return c;
}

// 10. Integrator numerics, delegated to the property suite: convergence
// order, analytic Jacobian agreement, ballistic energy drift.
Criterion check_integrator_numerics(const std::vector<CheckResult>& suite) {
  Criterion c{"integrator_numerics"};
  const char* wanted[3] = {"rk4_convergence_order", "dynamics_jacobian_analytic",
                           "ballistic_energy_conservation"};
  bool all = true;
  std::string detail;
  for (const char* name : wanted) {
    const CheckResult* found = nullptr;
    for (const auto& r : suite)
      if (r.name == name) found = &r;
    const bool ok = found != nullptr && found->passed;
    all = all && ok;
    if (!detail.empty()) detail += "; ";
    detail += std::string(name) + " " + (ok ? "ok" : "FAILED");
  }
  c.passed = all;
  c.detail = detail;
  return c;
}

// 11. Byte-identical CSV output for any worker count.
Criterion check_deterministic_reports(const ScenarioConfig& base) {
  Criterion c{"deterministic_reports"};
  ScenarioConfig cfg = base;
  cfg.runs = 6;
  cfg.horizon = 50.0;

  const fs::path root = fs::temp_directory_path() / "entrynav_acceptance_csv";
  fs::remove_all(root);
  const fs::path dir_a = root / "a";
  const fs::path dir_b = root / "b";

  for (int pass = 0; pass < 2; ++pass) {
    RunHistory run0_ekf, run0_adekf;
    const MonteCarloReport report =
        run_campaign(cfg, pass == 0 ? 1 : 5, &run0_ekf, &run0_adekf);
    emit_reports(report, &run0_ekf, &run0_adekf, pass == 0 ? dir_a : dir_b);
  }

  auto slurp = [](const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
      std::ifstream in(entry.path(), std::ios::binary);
      std::stringstream ss;
      ss << in.rdbuf();
      files[entry.path().filename().string()] = ss.str();
    }
    return files;
  };
  const auto a = slurp(dir_a);
  const auto b = slurp(dir_b);

  std::string mismatch;
  if (a.size() != b.size()) mismatch = "file sets differ";
  for (const auto& [name, content] : a) {
    if (mismatch.empty() && (b.count(name) == 0 || b.at(name) != content))
      mismatch = name;
  }
  fs::remove_all(root);

  c.passed = !a.empty() && mismatch.empty();
  c.detail = mismatch.empty()
                 ? std::to_string(a.size()) +
                       " files byte-identical between 1 and 5 workers"
                 : "mismatch in " + mismatch;
  return c;
}

}  // namespace
}  // namespace entrynav

int main() {
  using namespace entrynav;
  const ScenarioConfig cfg = default_scenario();

  std::vector<Criterion> results;
  try {
    const std::vector<CheckResult> suite = run_property_suite(20150401u);

    results.push_back(check_zero_weight_reduction(cfg));
    results.push_back(check_gain_oracle_equivalence());

    const TrajectoryAudit audit = audit_trajectory(cfg);
    const MonteCarloReport campaign = run_campaign(cfg, worker_threads());

    results.push_back(check_gain_stationarity(audit, suite));
    results.push_back(check_covariance_health(audit, campaign));
    results.push_back(check_density_sensitivity(cfg));
    results.push_back(check_lift_sensitivity(cfg));
    results.push_back(check_campaign_rmse(cfg, campaign));
    results.push_back(check_campaign_consistency(campaign));
    results.push_back(check_error_bound_capture(cfg));
    results.push_back(check_integrator_numerics(suite));
    results.push_back(check_deterministic_reports(cfg));
  } catch (const std::exception& e) {
    std::printf("acceptance aborted: %s\n", e.what());
    return 1;
  }

  int failed = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const Criterion& c = results[i];
    if (!c.passed) ++failed;
    std::printf("[%s] %02zu %-32s %s\n", c.passed ? "PASS" : "FAIL", i + 1,
                c.name.c_str(), c.detail.c_str());
  }
  std::printf("%zu of %zu criteria passed\n", results.size() - failed,
              results.size());
  return failed == 0 ? 0 : 1;
}
