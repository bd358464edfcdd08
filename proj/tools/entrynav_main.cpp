#include <charconv>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "entrynav/config_loader.hpp"
#include "entrynav/csv_reports.hpp"
#include "entrynav/errors.hpp"
#include "entrynav/monte_carlo.hpp"
#include "entrynav/validation.hpp"

namespace {

using namespace entrynav;

constexpr int kExitOk = 0;
constexpr int kExitValidationFailure = 1;
constexpr int kExitConfigError = 2;
constexpr int kExitAllDiverged = 3;

struct CliState {
  std::string config_path;
  std::string out_dir = "out";
  std::string mode = "both";
  std::string weights_csv;
  std::string preset = "all";
  std::optional<std::uint64_t> seed;
  std::optional<int> runs;
  std::optional<double> dt;
  int threads = std::max(1u, std::thread::hardware_concurrency());
};

std::optional<Eigen::Vector2d> parse_weights(const std::string& csv) {
  if (csv.empty()) return std::nullopt;
  const auto comma = csv.find(',');
  if (comma == std::string::npos)
    throw ConfigError("expected two comma separated weights", "--weights");
  Eigen::Vector2d w;
  const std::array<std::string, 2> parts = {csv.substr(0, comma),
                                            csv.substr(comma + 1)};
  for (int i = 0; i < 2; ++i) {
    const std::string& p = parts[i];
    const auto res = std::from_chars(p.data(), p.data() + p.size(), w(i));
    if (res.ec != std::errc() || res.ptr != p.data() + p.size())
      throw ConfigError("weight is not a number: '" + p + "'", "--weights");
  }
  return w;
}

ScenarioConfig resolve_config(const CliState& cli) {
  ScenarioConfig cfg = cli.config_path.empty() ? default_scenario()
                                               : load_config(cli.config_path);
  CliOverrides ov;
  ov.seed = cli.seed;
  ov.runs = cli.runs;
  ov.dt = cli.dt;
  ov.weights = parse_weights(cli.weights_csv);
  return apply_overrides(cfg, ov);
}

std::string describe_final(const RunHistory& h) {
  if (h.diverged)
    return "diverged at t=" + format_number(h.diverged_epoch) + " s";
  const Vec6 e = h.estimate.back() - h.truth.back();
  return "final |err|: r=" + format_number(std::abs(e(0))) +
         " m, v=" + format_number(std::abs(e(1))) +
         " m/s, fpa=" + format_number(std::abs(e(2))) +
         " rad, lon=" + format_number(std::abs(e(3))) +
         " rad, lat=" + format_number(std::abs(e(4))) +
         " rad, azi=" + format_number(std::abs(e(5))) + " rad";
}

int run_simulate(const CliState& cli) {
  const ScenarioConfig cfg = resolve_config(cli);
  RunRng rng(derive_run_seed(cfg.seed, 0));
  const UncertainParams c = sample_params(cfg, rng);
  const TruthAndMeasurements tm = simulate_truth(cfg, c, rng);

  std::optional<RunHistory> ekf, adekf;
  if (cli.mode != "adekf") ekf = run_filter(cfg, tm, GainMode::kEkf);
  if (cli.mode != "ekf") adekf = run_filter(cfg, tm, GainMode::kAdekf);

  emit_reports(std::nullopt, ekf ? &*ekf : nullptr, adekf ? &*adekf : nullptr,
               cli.out_dir);

  std::cout << "sampled c1=" << format_number(c.c1)
            << " c2=" << format_number(c.c2) << "\n";
  bool all_diverged = true;
  for (const auto& h : {std::cref(ekf), std::cref(adekf)}) {
    if (!h.get()) continue;
    std::cout << mode_tag(h.get()->mode) << ": " << describe_final(*h.get())
              << "\n";
    if (!h.get()->diverged) all_diverged = false;
  }
  std::cout << "reports written to " << cli.out_dir << "\n";
  return all_diverged ? kExitAllDiverged : kExitOk;
}

void print_campaign_summary(const MonteCarloReport& report) {
  std::cout << "runs " << report.runs_total << ", diverged ekf "
            << report.runs_diverged[kModeEkf] << ", adekf "
            << report.runs_diverged[kModeAdekf] << "\n";
  const std::array<const char*, 2> names = {"ekf  ", "adekf"};
  for (int m : {kModeEkf, kModeAdekf}) {
    if (report.rmse[m].empty()) {
      std::cout << names[m] << ": no usable runs\n";
      continue;
    }
    const Vec6& last = report.rmse[m].back();
    std::cout << names[m] << " final rmse: ";
    for (int i = 0; i < 6; ++i)
      std::cout << format_number(last(i)) << (i < 5 ? " " : "\n");
  }
}

int run_montecarlo(const CliState& cli) {
  const ScenarioConfig cfg = resolve_config(cli);
  RunHistory run0_ekf, run0_adekf;
  MonteCarloReport report;
  try {
    report = run_campaign(cfg, cli.threads, &run0_ekf, &run0_adekf);
  } catch (const EmptyReport& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitAllDiverged;
  }
  emit_reports(report, &run0_ekf, &run0_adekf, cli.out_dir);
  print_campaign_summary(report);
  std::cout << "reports written to " << cli.out_dir << "\n";
  return kExitOk;
}

struct FigurePreset {
  const char* name;
  double c1, c2;
  double w1, w2;
  bool campaign;
  // Decorrelates the preset noise stream from the Monte Carlo run indices.
  int run_index;
};

// perturbation and error_bounds are two views of the same representative run,
// so they share a noise stream.
constexpr std::array<FigurePreset, 5> kPresets = {{
    {"density_sens", 0.075, 0.0, 0.01, 0.0, false, 9001},
    {"lift_sens", 0.0, 0.05, 0.0, 0.1, false, 9002},
    {"perturbation", 0.075, -0.05, 0.01, 0.1, false, 9003},
    {"error_bounds", 0.075, -0.05, 0.01, 0.1, false, 9003},
    {"campaign", 0.0, 0.0, 0.01, 0.1, true, 0},
}};

int run_figures(const CliState& cli) {
  const ScenarioConfig base = resolve_config(cli);
  bool any_output = false;
  for (const FigurePreset& preset : kPresets) {
    if (cli.preset != "all" && cli.preset != preset.name) continue;
    any_output = true;
    ScenarioConfig cfg = base;
    cfg.weights << preset.w1, preset.w2;
    const std::filesystem::path dir =
        std::filesystem::path(cli.out_dir) / preset.name;
    if (preset.campaign) {
      RunHistory run0_ekf, run0_adekf;
      MonteCarloReport report;
      try {
        report = run_campaign(cfg, cli.threads, &run0_ekf, &run0_adekf);
      } catch (const EmptyReport& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitAllDiverged;
      }
      emit_reports(report, &run0_ekf, &run0_adekf, dir);
      std::cout << preset.name << ": ";
      print_campaign_summary(report);
    } else {
      RunRng rng(derive_run_seed(cfg.seed, preset.run_index));
      const UncertainParams c{preset.c1, preset.c2};
      const TruthAndMeasurements tm = simulate_truth(cfg, c, rng);
      const RunHistory ekf = run_filter(cfg, tm, GainMode::kEkf);
      const RunHistory adekf = run_filter(cfg, tm, GainMode::kAdekf);
      emit_reports(std::nullopt, &ekf, &adekf, dir);
      std::cout << preset.name << ": ekf "
                << (ekf.diverged ? "diverged" : "ok") << ", adekf "
                << (adekf.diverged ? "diverged" : "ok") << "\n";
      if (ekf.diverged && adekf.diverged) return kExitAllDiverged;
    }
  }
  if (!any_output) {
    std::cerr << "error: unknown preset '" << cli.preset << "'\n";
    return kExitConfigError;
  }
  std::cout << "reports written to " << cli.out_dir << "\n";
  return kExitOk;
}

int run_validate(const CliState& cli) {
  if (!cli.config_path.empty()) {
    load_config(cli.config_path);
    std::cout << "PASS  config_load  (" << cli.config_path << ")\n";
  }
  const std::uint64_t seed = cli.seed.value_or(default_scenario().seed);
  const auto results = run_property_suite(seed);
  for (const auto& r : results)
    std::cout << (r.passed ? "PASS  " : "FAIL  ") << r.name << "  ("
              << r.detail << ")\n";
  const bool ok = all_passed(results);
  std::cout << (ok ? "all checks passed" : "CHECKS FAILED") << "\n";
  return ok ? kExitOk : kExitValidationFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Desensitized Kalman filtering for Mars atmospheric entry"};
  app.require_subcommand(1);
  CliState cli;

  const auto add_common = [&cli](CLI::App* sub, bool with_campaign_opts) {
    sub->add_option("--config", cli.config_path,
                    "Scenario YAML (defaults to the built-in preset)");
    sub->add_option("--out", cli.out_dir, "Output directory for CSV reports");
    sub->add_option("--seed", cli.seed, "Master seed override");
    sub->add_option("--dt", cli.dt, "Step size override, seconds");
    sub->add_option("--weights", cli.weights_csv,
                    "Sensitivity weights override, w1,w2");
    sub->add_option("--mode", cli.mode, "Filter selection")
        ->check(CLI::IsMember({"ekf", "adekf", "both"}));
    if (with_campaign_opts) {
      sub->add_option("--runs", cli.runs, "Monte Carlo run count override");
      sub->add_option("--threads", cli.threads, "Worker thread count");
    }
  };

  auto* sim = app.add_subcommand(
      "simulate", "One run with full trajectory and sensitivity reports");
  add_common(sim, false);
  auto* mc = app.add_subcommand("montecarlo",
                                "Paired EKF/ADEKF Monte Carlo campaign");
  add_common(mc, true);
  auto* fig = app.add_subcommand(
      "figures", "Canned perturbation and campaign presets");
  add_common(fig, true);
  fig->add_option("--preset", cli.preset, "Which preset to produce")
      ->check(CLI::IsMember({"density_sens", "lift_sens", "perturbation",
                             "error_bounds", "campaign", "all"}));
  auto* val = app.add_subcommand("validate",
                                 "Run the built-in property suite");
  val->add_option("--config", cli.config_path,
                  "Also parse and validate this YAML");
  val->add_option("--seed", cli.seed, "Property suite seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfigError;
  }

  try {
    if (sim->parsed()) return run_simulate(cli);
    if (mc->parsed()) return run_montecarlo(cli);
    if (fig->parsed()) return run_figures(cli);
    if (val->parsed()) return run_validate(cli);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const FilterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidationFailure;
  }
  return kExitOk;
}
