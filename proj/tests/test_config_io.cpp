#include "entrynav/config_loader.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "entrynav/csv_reports.hpp"
#include "entrynav/errors.hpp"

namespace entrynav {
namespace {

namespace fs = std::filesystem;

std::string shipped_preset_path() {
  return std::string(ENTRYNAV_CONFIG_DIR) + "/mars_entry.yaml";
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  EXPECT_TRUE(in.good()) << path;
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string replace_once(std::string text, const std::string& from,
                         const std::string& to) {
  const std::size_t pos = text.find(from);
  EXPECT_NE(pos, std::string::npos) << "pattern not found: " << from;
  return text.replace(pos, from.size(), to);
}

TEST(LoadConfig, ShippedPresetMatchesDefaultScenario) {
  const ScenarioConfig loaded = load_config(shipped_preset_path());
  const ScenarioConfig def = default_scenario();

  EXPECT_EQ(loaded.planet.mu, def.planet.mu);
  EXPECT_EQ(loaded.planet.rho0, def.planet.rho0);
  EXPECT_NEAR(loaded.planet.r0, def.planet.r0, 1e-6);
  EXPECT_EQ(loaded.planet.hs, def.planet.hs);

  EXPECT_EQ(loaded.vehicle_truth.ballistic_coeff,
            def.vehicle_truth.ballistic_coeff);
  EXPECT_EQ(loaded.vehicle_filter.ballistic_coeff,
            def.vehicle_filter.ballistic_coeff);
  EXPECT_EQ(loaded.vehicle_truth.nominal_ld, def.vehicle_truth.nominal_ld);
  EXPECT_EQ(loaded.vehicle_truth.bank_angle, 0.0);

  EXPECT_NEAR(loaded.truth_initial.r, def.truth_initial.r, 1e-6);
  EXPECT_EQ(loaded.truth_initial.v, def.truth_initial.v);
  EXPECT_DOUBLE_EQ(loaded.truth_initial.fpa, def.truth_initial.fpa);
  EXPECT_DOUBLE_EQ(loaded.truth_initial.lon, def.truth_initial.lon);
  EXPECT_DOUBLE_EQ(loaded.truth_initial.lat, def.truth_initial.lat);
  EXPECT_DOUBLE_EQ(loaded.truth_initial.azi, def.truth_initial.azi);

  EXPECT_NEAR(loaded.estimate_initial.r, def.estimate_initial.r, 1e-6);
  EXPECT_EQ(loaded.estimate_initial.v, def.estimate_initial.v);
  EXPECT_DOUBLE_EQ(loaded.estimate_initial.fpa, def.estimate_initial.fpa);
  EXPECT_DOUBLE_EQ(loaded.estimate_initial.lon, def.estimate_initial.lon);
  EXPECT_DOUBLE_EQ(loaded.estimate_initial.lat, def.estimate_initial.lat);
  EXPECT_DOUBLE_EQ(loaded.estimate_initial.azi, def.estimate_initial.azi);

  EXPECT_EQ((loaded.imu.accel_bias - def.imu.accel_bias).norm(), 0.0);
  EXPECT_EQ((loaded.imu.accel_noise_cov - def.imu.accel_noise_cov).norm(), 0.0);

  EXPECT_EQ((loaded.p0_diag - def.p0_diag).norm(), 0.0);
  EXPECT_EQ((loaded.q_diag - def.q_diag).norm(), 0.0);
  EXPECT_EQ((loaded.r_diag - def.r_diag).norm(), 0.0);
  EXPECT_EQ((loaded.weights - def.weights).norm(), 0.0);
  EXPECT_EQ((loaded.c_halfwidth - def.c_halfwidth).norm(), 0.0);
  EXPECT_NEAR(loaded.c_sigma(0), def.c_sigma(0), 1e-15);
  EXPECT_NEAR(loaded.c_sigma(1), def.c_sigma(1), 1e-15);

  for (int b = 0; b < 3; ++b) {
    EXPECT_EQ(loaded.beacons[b].kind, def.beacons[b].kind);
    EXPECT_EQ(
        (loaded.beacons[b].position0 - def.beacons[b].position0).norm(), 0.0);
    EXPECT_EQ((loaded.beacons[b].velocity - def.beacons[b].velocity).norm(),
              0.0);
  }

  EXPECT_EQ(loaded.dt, def.dt);
  EXPECT_EQ(loaded.horizon, def.horizon);
  EXPECT_EQ(loaded.runs, def.runs);
  EXPECT_EQ(loaded.seed, def.seed);
}

TEST(LoadConfig, MissingFileThrows) {
  try {
    load_config("/nonexistent/never_there.yaml");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key_path(), "/nonexistent/never_there.yaml");
  }
}

TEST(ParseConfigText, UnknownKeyRejected) {
  const std::string text =
      read_file(shipped_preset_path()) + "\nbogus_key: 1.0\n";
  try {
    parse_config_text(text);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key_path(), "bogus_key");
  }
}

TEST(ParseConfigText, MissingKeyRejected) {
  const std::string text =
      replace_once(read_file(shipped_preset_path()), "runs: 200\n", "");
  try {
    parse_config_text(text);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key_path(), "runs");
  }
}

TEST(ParseConfigText, TypeMismatchRejected) {
  const std::string base = read_file(shipped_preset_path());
  try {
    parse_config_text(replace_once(base, "runs: 200", "runs: banana"));
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key_path(), "runs");
  }
  EXPECT_THROW(
      parse_config_text(replace_once(base, "dt_s: 0.1", "dt_s: [0.1, 0.2]")),
      ConfigError);
}

TEST(ParseConfigText, SequenceLengthEnforced) {
  const std::string text = replace_once(
      read_file(shipped_preset_path()),
      "p0_diag_si: [1.0e6, 1.0e5, 1.0e-1, 1.0e-5, 1.0e-5, 1.0e-1]",
      "p0_diag_si: [1.0e6, 1.0e5, 1.0e-1, 1.0e-5, 1.0e-5]");
  try {
    parse_config_text(text);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key_path(), "p0_diag_si");
  }
}

TEST(ParseConfigText, PhysicallyInvalidValuesRejected) {
  const std::string base = read_file(shipped_preset_path());
  EXPECT_THROW(parse_config_text(replace_once(base, "c1_halfwidth: 0.15",
                                              "c1_halfwidth: -0.15")),
               ConfigError);
  EXPECT_THROW(parse_config_text(replace_once(base, "c1_halfwidth: 0.15",
                                              "c1_halfwidth: 1.5")),
               ConfigError);
  EXPECT_THROW(parse_config_text(replace_once(
                   base, "r_diag_si: [1.0e-6, 1.0e-6, 1.0e-6, 20.0, 20.0, 40.0]",
                   "r_diag_si: [1.0e-6, 1.0e-6, 1.0e-6, -20.0, 20.0, 40.0]")),
               ConfigError);
  EXPECT_THROW(parse_config_text(replace_once(base, "horizon_s: 400.0",
                                              "horizon_s: 400.05")),
               ConfigError);
  EXPECT_THROW(parse_config_text(replace_once(base, "truth_latitude_deg: -28.02",
                                              "truth_latitude_deg: 90.0")),
               ConfigError);
}

TEST(ParseConfigText, SigmaOverridesReplaceDefault) {
  const ScenarioConfig with_default =
      parse_config_text(read_file(shipped_preset_path()));
  EXPECT_NEAR(with_default.c_sigma(0), 0.15 / std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(with_default.c_sigma(1), 0.1 / std::sqrt(3.0), 1e-15);

  const std::string text = read_file(shipped_preset_path()) +
                           "\nc1_sigma: 0.2\nc2_sigma: 0.05\n";
  const ScenarioConfig with_override = parse_config_text(text);
  EXPECT_EQ(with_override.c_sigma(0), 0.2);
  EXPECT_EQ(with_override.c_sigma(1), 0.05);
}

TEST(ValidateConfig, MovingSurfaceBeaconRejected) {
  ScenarioConfig cfg = default_scenario();
  cfg.beacons[1].velocity = Vec3(1.0, 0.0, 0.0);
  EXPECT_THROW(validate_config(cfg), ConfigError);
}

TEST(ApplyOverrides, FieldsApplyAndRevalidate) {
  const ScenarioConfig base = default_scenario();

  CliOverrides ov;
  ov.seed = 77u;
  ov.runs = 12;
  ov.dt = 0.2;
  ov.horizon = 100.0;
  ov.weights = Eigen::Vector2d(0.5, 0.0);
  const ScenarioConfig cfg = apply_overrides(base, ov);
  EXPECT_EQ(cfg.seed, 77u);
  EXPECT_EQ(cfg.runs, 12);
  EXPECT_EQ(cfg.dt, 0.2);
  EXPECT_EQ(cfg.horizon, 100.0);
  EXPECT_EQ(cfg.weights(0), 0.5);
  EXPECT_EQ(cfg.weights(1), 0.0);
  // The base config is taken by value and never touched.
  EXPECT_EQ(base.runs, 200);

  CliOverrides bad_dt;
  bad_dt.dt = -0.1;
  EXPECT_THROW(apply_overrides(base, bad_dt), ConfigError);

  CliOverrides bad_horizon;
  bad_horizon.horizon = 400.05;
  EXPECT_THROW(apply_overrides(base, bad_horizon), ConfigError);

  CliOverrides bad_weights;
  bad_weights.weights = Eigen::Vector2d(-0.1, 0.1);
  EXPECT_THROW(apply_overrides(base, bad_weights), ConfigError);

  CliOverrides bad_runs;
  bad_runs.runs = 0;
  EXPECT_THROW(apply_overrides(base, bad_runs), ConfigError);
}

TEST(FormatNumber, StableTextForms) {
  EXPECT_EQ(format_number(1.0), "1");
  EXPECT_EQ(format_number(0.0), "0");
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(0.0002), "0.0002");
  EXPECT_EQ(format_number(-42.5), "-42.5");
  // Twelve significant digits survive.
  EXPECT_EQ(format_number(31415926.535897933), "31415926.5359");
}

TEST(FormatNumber, RoundTripsThroughStrtod) {
  const double values[] = {3518200.0,       -11.8 * M_PI / 180.0,
                           5.156e-9,        1.23456789e21,
                           -0.123456789012, 42828.29e9};
  for (double v : values) {
    const std::string s = format_number(v);
    EXPECT_EQ(s.find(','), std::string::npos);
    const double back = std::strtod(s.c_str(), nullptr);
    EXPECT_NEAR(back, v, 1e-11 * std::abs(v)) << s;
  }
}

TEST(ModeTag, NamesAreStable) {
  EXPECT_EQ(mode_tag(GainMode::kEkf), "ekf");
  EXPECT_EQ(mode_tag(GainMode::kAdekf), "adekf");
  EXPECT_EQ(mode_tag(GainMode::kDekf), "dekf");
}

class CsvFiles : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / "entrynav_csv_test";
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  static RunHistory tiny_history(GainMode mode) {
    RunHistory h;
    h.mode = mode;
    for (int k = 0; k < 3; ++k) {
      h.epochs.push_back(0.5 * k);
      h.truth.push_back(Vec6::Constant(1.0 + k));
      h.estimate.push_back(Vec6::Constant(1.25 + k));
      h.cov_diag.push_back(Vec6::Constant(4.0));
      h.cov_min_eig.push_back(0.5);
      h.sensitivity.push_back(Mat62::Constant(0.125 * (k + 1)));
      h.perturbation.push_back(Mat62::Constant(0.0625 * (k + 1)));
      h.innovation.push_back(Vec6::Zero());
    }
    return h;
  }

  fs::path dir_;
};

TEST_F(CsvFiles, EstimateRoundTrip) {
  const RunHistory h = tiny_history(GainMode::kAdekf);
  const fs::path file = dir_ / "estimate.csv";
  write_estimate_csv(file, h);

  const CsvTable table = read_csv(file);
  ASSERT_EQ(table.header.size(), 7u);
  EXPECT_EQ(table.header[0], "epoch_s");
  EXPECT_EQ(table.header[1], "estimate_radius_m");
  EXPECT_EQ(table.header[6], "estimate_azimuth_rad");
  ASSERT_EQ(table.rows.size(), 3u);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_DOUBLE_EQ(table.number(k, 0), 0.5 * k);
    for (int i = 0; i < 6; ++i) {
      EXPECT_DOUBLE_EQ(table.number(k, 1 + i), 1.25 + k);
    }
  }
}

TEST_F(CsvFiles, ErrorBoundsColumns) {
  const RunHistory h = tiny_history(GainMode::kEkf);
  const fs::path file = dir_ / "error.csv";
  write_error_bounds_csv(file, h);

  const CsvTable table = read_csv(file);
  ASSERT_EQ(table.header.size(), 13u);
  EXPECT_EQ(table.header[1], "error_radius_m");
  EXPECT_EQ(table.header[2], "bound3_radius_m");
  ASSERT_EQ(table.rows.size(), 3u);
  // error = 0.25 everywhere, bound = 3 * sqrt(4) = 6.
  EXPECT_DOUBLE_EQ(table.number(1, 1), 0.25);
  EXPECT_DOUBLE_EQ(table.number(1, 2), 6.0);
}

TEST_F(CsvFiles, EmitReportsWritesFullFileSet) {
  const RunHistory ekf = tiny_history(GainMode::kEkf);
  const RunHistory adekf = tiny_history(GainMode::kAdekf);

  MonteCarloReport report;
  report.dt = 0.5;
  report.runs_total = 2;
  report.epochs = {0.0, 0.5};
  for (int m = 0; m < 2; ++m) {
    report.rmse[m].assign(2, Vec6::Constant(1.5));
    report.nme[m].assign(2, Vec6::Constant(0.1));
    report.mean_abs_sensitivity[m].assign(2, Mat62::Constant(0.2));
    report.nme_threshold[m] = 0.62;
    report.capture_fraction[m] = Vec6::Constant(0.99);
    report.worst_cov_health[m] = 1e-9;
  }

  emit_reports(report, &ekf, &adekf, dir_);
  for (const char* name :
       {"truth.csv", "estimate_ekf.csv", "estimate_adekf.csv",
        "sensitivity_ekf.csv", "sensitivity_adekf.csv", "perturbation_ekf.csv",
        "perturbation_adekf.csv", "error_3sigma_ekf.csv",
        "error_3sigma_adekf.csv", "rmse.csv", "nme.csv", "summary.csv"}) {
    EXPECT_TRUE(fs::exists(dir_ / name)) << name;
  }

  const CsvTable rmse_table = read_csv(dir_ / "rmse.csv");
  ASSERT_EQ(rmse_table.header.size(), 8u);
  EXPECT_EQ(rmse_table.header[0], "mode");
  ASSERT_EQ(rmse_table.rows.size(), 4u);  // two modes, two epochs each
  EXPECT_EQ(rmse_table.rows[0][0], "ekf");
  EXPECT_EQ(rmse_table.rows[2][0], "adekf");
  EXPECT_DOUBLE_EQ(rmse_table.number(0, 2), 1.5);

  const CsvTable nme_table = read_csv(dir_ / "nme.csv");
  EXPECT_EQ(nme_table.header.back(), "threshold");
  EXPECT_DOUBLE_EQ(nme_table.number(0, 8), 0.62);

  const CsvTable summary = read_csv(dir_ / "summary.csv");
  ASSERT_EQ(summary.rows.size(), 2u);
  EXPECT_EQ(summary.rows[0][1], "2");  // runs_total
}

TEST_F(CsvFiles, EmptyModeProducesHeaderOnlyRows) {
  MonteCarloReport report;
  report.dt = 0.5;
  report.runs_total = 1;
  report.epochs = {0.0};
  report.rmse[kModeEkf].assign(1, Vec6::Zero());
  report.nme[kModeEkf].assign(1, Vec6::Zero());
  report.mean_abs_sensitivity[kModeEkf].assign(1, Mat62::Zero());
  // The adekf side stays empty, as after an all-diverged mode.

  emit_reports(report, nullptr, nullptr, dir_);
  EXPECT_FALSE(fs::exists(dir_ / "truth.csv"));

  const CsvTable rmse_table = read_csv(dir_ / "rmse.csv");
  EXPECT_EQ(rmse_table.rows.size(), 1u);
  const CsvTable summary = read_csv(dir_ / "summary.csv");
  ASSERT_EQ(summary.rows.size(), 1u);
  EXPECT_EQ(summary.rows[0][0], "ekf");
}

TEST_F(CsvFiles, ReadCsvMissingFileThrows) {
  EXPECT_THROW(read_csv(dir_ / "not_there.csv"), FilterError);
}

}  // namespace
}  // namespace entrynav
