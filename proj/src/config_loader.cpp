#include "entrynav/config_loader.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <set>

#include <yaml-cpp/yaml.h>

#include "entrynav/errors.hpp"

namespace entrynav {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

const std::set<std::string>& allowed_keys() {
  static const std::set<std::string> keys = {
      "mu_m3_s2",
      "surface_density_kg_m3",
      "reference_radius_km",
      "scale_height_km",
      "ballistic_coeff_true_m2_kg",
      "ballistic_coeff_filter_m2_kg",
      "nominal_lift_drag",
      "bank_angle_deg",
      "truth_radius_km",
      "truth_velocity_m_s",
      "truth_fpa_deg",
      "truth_longitude_deg",
      "truth_latitude_deg",
      "truth_azimuth_deg",
      "estimate_radius_km",
      "estimate_velocity_m_s",
      "estimate_fpa_deg",
      "estimate_longitude_deg",
      "estimate_latitude_deg",
      "estimate_azimuth_deg",
      "accel_bias_m_s2",
      "accel_noise_var_m2_s4",
      "p0_diag_si",
      "q_diag_si",
      "r_diag_si",
      "sensitivity_weights",
      "c1_halfwidth",
      "c2_halfwidth",
      "c1_sigma",
      "c2_sigma",
      "beacon_orbit_pos_m",
      "beacon_orbit_vel_m_s",
      "beacon_surface1_pos_m",
      "beacon_surface2_pos_m",
      "dt_s",
      "horizon_s",
      "runs",
      "seed",
  };
  return keys;
}

// Only these may be absent.
const std::set<std::string>& optional_keys() {
  static const std::set<std::string> keys = {"c1_sigma", "c2_sigma"};
  return keys;
}

double get_scalar(const YAML::Node& root, const std::string& key) {
  try {
    return root[key].as<double>();
  } catch (const YAML::Exception&) {
    throw ConfigError("expected a numeric scalar", key);
  }
}

std::uint64_t get_u64(const YAML::Node& root, const std::string& key) {
  try {
    return root[key].as<std::uint64_t>();
  } catch (const YAML::Exception&) {
    throw ConfigError("expected an unsigned integer", key);
  }
}

int get_int(const YAML::Node& root, const std::string& key) {
  try {
    return root[key].as<int>();
  } catch (const YAML::Exception&) {
    throw ConfigError("expected an integer", key);
  }
}

Eigen::VectorXd get_seq(const YAML::Node& root, const std::string& key,
                        int expected) {
  const YAML::Node node = root[key];
  if (!node.IsSequence())
    throw ConfigError("expected a sequence of " + std::to_string(expected) +
                          " numbers",
                      key);
  if (static_cast<int>(node.size()) != expected)
    throw ConfigError("expected exactly " + std::to_string(expected) +
                          " entries, got " + std::to_string(node.size()),
                      key);
  Eigen::VectorXd out(expected);
  for (int i = 0; i < expected; ++i) {
    try {
      out(i) = node[i].as<double>();
    } catch (const YAML::Exception&) {
      throw ConfigError("entry " + std::to_string(i) + " is not numeric", key);
    }
  }
  return out;
}

EntryState get_state(const YAML::Node& root, const std::string& prefix) {
  EntryState s;
  s.r = get_scalar(root, prefix + "_radius_km") * 1e3;
  s.v = get_scalar(root, prefix + "_velocity_m_s");
  s.fpa = get_scalar(root, prefix + "_fpa_deg") * kDeg;
  s.lon = get_scalar(root, prefix + "_longitude_deg") * kDeg;
  s.lat = get_scalar(root, prefix + "_latitude_deg") * kDeg;
  s.azi = get_scalar(root, prefix + "_azimuth_deg") * kDeg;
  return s;
}

ScenarioConfig parse_config(const YAML::Node& root) {
  if (!root.IsMap())
    throw ConfigError("configuration root must be a flat key/value map", "");

  for (const auto& kv : root) {
    const std::string name = kv.first.as<std::string>();
    if (allowed_keys().count(name) == 0)
      throw ConfigError("unknown configuration key", name);
  }
  for (const auto& key : allowed_keys()) {
    if (optional_keys().count(key)) continue;
    if (!root[key]) throw ConfigError("missing required key", key);
  }

  ScenarioConfig cfg;
  cfg.planet.mu = get_scalar(root, "mu_m3_s2");
  cfg.planet.rho0 = get_scalar(root, "surface_density_kg_m3");
  cfg.planet.r0 = get_scalar(root, "reference_radius_km") * 1e3;
  cfg.planet.hs = get_scalar(root, "scale_height_km") * 1e3;

  cfg.vehicle_truth.ballistic_coeff =
      get_scalar(root, "ballistic_coeff_true_m2_kg");
  cfg.vehicle_truth.nominal_ld = get_scalar(root, "nominal_lift_drag");
  cfg.vehicle_truth.bank_angle = get_scalar(root, "bank_angle_deg") * kDeg;
  cfg.vehicle_filter = cfg.vehicle_truth;
  cfg.vehicle_filter.ballistic_coeff =
      get_scalar(root, "ballistic_coeff_filter_m2_kg");

  cfg.truth_initial = get_state(root, "truth");
  cfg.estimate_initial = get_state(root, "estimate");

  cfg.imu.accel_bias = Vec3::Constant(get_scalar(root, "accel_bias_m_s2"));
  cfg.imu.accel_noise_cov =
      get_scalar(root, "accel_noise_var_m2_s4") * Mat3::Identity();

  cfg.p0_diag = get_seq(root, "p0_diag_si", 6);
  cfg.q_diag = get_seq(root, "q_diag_si", 6);
  cfg.r_diag = get_seq(root, "r_diag_si", 6);
  cfg.weights = get_seq(root, "sensitivity_weights", 2);

  cfg.c_halfwidth(0) = get_scalar(root, "c1_halfwidth");
  cfg.c_halfwidth(1) = get_scalar(root, "c2_halfwidth");
  const double inv_sqrt3 = 1.0 / std::sqrt(3.0);
  cfg.c_sigma(0) = root["c1_sigma"] ? get_scalar(root, "c1_sigma")
                                    : cfg.c_halfwidth(0) * inv_sqrt3;
  cfg.c_sigma(1) = root["c2_sigma"] ? get_scalar(root, "c2_sigma")
                                    : cfg.c_halfwidth(1) * inv_sqrt3;

  cfg.beacons[0].kind = BeaconKind::kOrbiting;
  cfg.beacons[0].position0 = get_seq(root, "beacon_orbit_pos_m", 3);
  cfg.beacons[0].velocity = get_seq(root, "beacon_orbit_vel_m_s", 3);
  cfg.beacons[1].kind = BeaconKind::kSurface;
  cfg.beacons[1].position0 = get_seq(root, "beacon_surface1_pos_m", 3);
  cfg.beacons[1].velocity = Vec3::Zero();
  cfg.beacons[2].kind = BeaconKind::kSurface;
  cfg.beacons[2].position0 = get_seq(root, "beacon_surface2_pos_m", 3);
  cfg.beacons[2].velocity = Vec3::Zero();

  cfg.dt = get_scalar(root, "dt_s");
  cfg.horizon = get_scalar(root, "horizon_s");
  cfg.runs = get_int(root, "runs");
  cfg.seed = get_u64(root, "seed");

  validate_config(cfg);
  return cfg;
}

}  // namespace

ScenarioConfig load_config(const std::string& path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path);
  } catch (const YAML::BadFile&) {
    throw ConfigError("cannot open configuration file", path);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("configuration parse error: ") + e.what(),
                      path);
  }
  return parse_config(root);
}

ScenarioConfig parse_config_text(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("configuration parse error: ") + e.what(),
                      "<inline>");
  }
  return parse_config(root);
}

ScenarioConfig apply_overrides(ScenarioConfig cfg, const CliOverrides& ov) {
  if (ov.seed) cfg.seed = *ov.seed;
  if (ov.runs) cfg.runs = *ov.runs;
  if (ov.dt) cfg.dt = *ov.dt;
  if (ov.horizon) cfg.horizon = *ov.horizon;
  if (ov.weights) cfg.weights = *ov.weights;
  validate_config(cfg);
  return cfg;
}

}  // namespace entrynav
