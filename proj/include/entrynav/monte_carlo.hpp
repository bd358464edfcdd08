#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "entrynav/filter_core.hpp"
#include "entrynav/measurement_system.hpp"
#include "entrynav/rng.hpp"
#include "entrynav/scenario.hpp"

namespace entrynav {

// Index into the per-mode arrays of MonteCarloReport.
inline constexpr int kModeEkf = 0;
inline constexpr int kModeAdekf = 1;

// Independent uniform draws inside the configured half-widths.
UncertainParams sample_params(const ScenarioConfig& cfg, RunRng& rng);

struct TruthAndMeasurements {
  UncertainParams c;
  std::vector<Vec6> truth;                      // epochs 0..K
  std::vector<MeasurementBundle> measurements;  // epochs 1..K
};

// Integrates the truth trajectory with the truth vehicle model and sampled
// parameters; emits biased, noisy measurements at every epoch.
TruthAndMeasurements simulate_truth(const ScenarioConfig& cfg,
                                    const UncertainParams& c, RunRng& rng);

struct RunHistory {
  std::uint64_t seed = 0;
  UncertainParams c;
  GainMode mode = GainMode::kEkf;
  bool diverged = false;
  double diverged_epoch = -1.0;
  std::vector<double> epochs;
  std::vector<Vec6> truth;
  std::vector<Vec6> estimate;
  std::vector<Vec6> cov_diag;
  std::vector<double> cov_min_eig;
  std::vector<Mat62> sensitivity;
  std::vector<Mat62> perturbation;
  std::vector<Vec6> innovation;  // zero at epoch 0
};

// Scenario-level adapters binding the entry dynamics and measurement system
// into the generic filter recursions. The filter always runs the mismatched
// vehicle model (filter-side B) at nominal c = 0.
ProcessModel make_process_model(const ScenarioConfig& cfg);
MeasurementModel make_measurement_model(const ScenarioConfig& cfg);

// One filter pass over a prepared measurement sequence. Divergence flags the
// history instead of propagating the exception.
RunHistory run_filter(const ScenarioConfig& cfg, const TruthAndMeasurements& tm,
                      GainMode mode);

// Per-epoch per-state RMSE over non-diverged histories.
// Throws EmptyReport when every history diverged.
std::vector<Vec6> rmse(const std::vector<RunHistory>& histories);

struct NmeResult {
  std::vector<Vec6> statistic;  // mean standardized error per epoch/state
  double threshold = 0.0;       // 1.96 / sqrt(runs used)
  int runs_used = 0;
};

// Normalized mean error consistency test; the statistic should stay inside
// +-threshold for a consistent filter. Throws InvalidCovariance when a
// nonpositive variance shows up.
NmeResult nme_test(const std::vector<RunHistory>& histories);

// Fraction of epochs per state with |error| <= 3 sqrt(P_ii).
Vec6 three_sigma_capture(const RunHistory& history);

struct MonteCarloReport {
  double dt = 0.0;
  int runs_total = 0;
  std::array<int, 2> runs_diverged{0, 0};
  std::array<double, 2> nme_threshold{0.0, 0.0};
  std::vector<double> epochs;
  std::array<std::vector<Vec6>, 2> rmse;
  std::array<std::vector<Vec6>, 2> nme;
  std::array<Vec6, 2> capture_fraction{Vec6::Zero(), Vec6::Zero()};
  std::array<std::vector<Mat62>, 2> mean_abs_sensitivity;
  // min over runs and epochs of lambda_min(P) / trace(P)
  std::array<double, 2> worst_cov_health{0.0, 0.0};
};

// Paired campaign: every run feeds the identical measurement realization to
// both gain modes. Runs execute in waves of `threads` workers; results fold
// in run-index order so the report is bit-identical for any thread count.
// Throws EmptyReport when all runs diverged in both modes.
MonteCarloReport run_campaign(const ScenarioConfig& cfg, int threads,
                              RunHistory* keep_ekf_run0 = nullptr,
                              RunHistory* keep_adekf_run0 = nullptr);

}  // namespace entrynav
