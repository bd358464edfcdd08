#include "entrynav/scenario.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "entrynav/errors.hpp"

namespace entrynav {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

}  // namespace

ScenarioConfig default_scenario() {
  ScenarioConfig cfg;
  cfg.planet = {42828.29e9, 2.0e-4, 3437.2e3, 7.5e3};
  cfg.vehicle_truth = {0.016, 0.156, 0.0};
  cfg.vehicle_filter = {0.0176, 0.156, 0.0};
  cfg.truth_initial = {3518.2e3, 5515.0, -11.8 * kDeg, -89.872 * kDeg,
                       -28.02 * kDeg, 5.156 * kDeg};
  cfg.estimate_initial = {3519.2e3, 5525.0, -12.0 * kDeg, -90.072 * kDeg,
                          -28.22 * kDeg, 5.356 * kDeg};
  cfg.imu.accel_bias = Vec3::Constant(-0.03);
  cfg.imu.accel_noise_cov = 1e-6 * Mat3::Identity();
  cfg.beacons[0] = {BeaconKind::kOrbiting,
                    {7855700.0, -461800.0, 749820.0},
                    {66.2, 2206.4, -413.0}};
  cfg.beacons[1] = {BeaconKind::kSurface, {3300000.0, 420000.0, 1350000.0},
                    Vec3::Zero()};
  cfg.beacons[2] = {BeaconKind::kSurface, {3290000.0, 570000.0, 755000.0},
                    Vec3::Zero()};
  cfg.p0_diag << 1e6, 1e5, 1e-1, 1e-5, 1e-5, 1e-1;
  cfg.q_diag << 10.0, 1.0, 1e-6, 1e-10, 1e-10, 1e-6;
  cfg.r_diag << 1e-6, 1e-6, 1e-6, 20.0, 20.0, 40.0;
  cfg.weights << 0.01, 0.1;
  cfg.c_halfwidth << 0.15, 0.1;
  cfg.c_sigma = cfg.c_halfwidth / std::sqrt(3.0);
  cfg.dt = 0.1;
  cfg.horizon = 400.0;
  cfg.runs = 200;
  cfg.seed = 20150401u;
  return cfg;
}

void validate_config(const ScenarioConfig& cfg) {
  auto positive = [](double v, const std::string& key) {
    if (!(v > 0.0)) throw ConfigError("value must be positive", key);
  };
  positive(cfg.planet.mu, "mu");
  positive(cfg.planet.rho0, "surface_density");
  positive(cfg.planet.r0, "reference_radius");
  positive(cfg.planet.hs, "scale_height");
  positive(cfg.vehicle_truth.ballistic_coeff, "ballistic_coeff_true");
  positive(cfg.vehicle_filter.ballistic_coeff, "ballistic_coeff_filter");
  if (cfg.vehicle_truth.nominal_ld < 0.0 || cfg.vehicle_filter.nominal_ld < 0.0)
    throw ConfigError("lift-to-drag ratio must be nonnegative", "nominal_ld");

  for (const EntryState* s : {&cfg.truth_initial, &cfg.estimate_initial}) {
    if (!(s->r > 0.0)) throw ConfigError("radius must be positive", "radius");
    if (!(s->v > 0.0)) throw ConfigError("velocity must be positive", "velocity");
    if (!(std::abs(s->lat) < std::numbers::pi / 2.0))
      throw ConfigError("latitude must stay off the poles", "latitude");
  }

  auto nonneg_diag = [](const Vec6& d, const std::string& key) {
    for (int i = 0; i < 6; ++i) {
      if (!(d(i) >= 0.0) || !std::isfinite(d(i)))
        throw ConfigError("covariance diagonal entries must be nonnegative",
                          key + "[" + std::to_string(i) + "]");
    }
  };
  nonneg_diag(cfg.p0_diag, "p0_diag");
  nonneg_diag(cfg.q_diag, "q_diag");
  nonneg_diag(cfg.r_diag, "r_diag");
  for (int i = 0; i < 6; ++i) {
    if (!(cfg.r_diag(i) > 0.0))
      throw ConfigError("measurement noise variances must be positive",
                        "r_diag[" + std::to_string(i) + "]");
  }

  for (int i = 0; i < 2; ++i) {
    if (!(cfg.weights(i) >= 0.0))
      throw ConfigError("sensitivity weights must be nonnegative",
                        "sensitivity_weights[" + std::to_string(i) + "]");
    if (!(cfg.c_halfwidth(i) >= 0.0))
      throw ConfigError("half-widths must be nonnegative",
                        "c_halfwidth[" + std::to_string(i) + "]");
    if (!(cfg.c_sigma(i) >= 0.0))
      throw ConfigError("parameter sigmas must be nonnegative",
                        "c_sigma[" + std::to_string(i) + "]");
  }
  if (cfg.c_halfwidth(0) >= 1.0)
    throw ConfigError("density half-width must keep 1 + c1 positive",
                      "c1_halfwidth");

  for (std::size_t i = 0; i < cfg.beacons.size(); ++i) {
    const auto& b = cfg.beacons[i];
    if (!b.position0.allFinite())
      throw ConfigError("beacon position must be finite",
                        "beacon[" + std::to_string(i) + "]");
    if (b.kind == BeaconKind::kSurface && b.velocity.norm() != 0.0)
      throw ConfigError("surface beacons must be static",
                        "beacon[" + std::to_string(i) + "].velocity");
  }

  positive(cfg.dt, "dt");
  positive(cfg.horizon, "horizon");
  double steps = cfg.horizon / cfg.dt;
  if (std::abs(steps - std::round(steps)) > 1e-9 * steps)
    throw ConfigError("horizon must be an integer multiple of dt", "horizon");
  if (cfg.runs < 1) throw ConfigError("at least one run required", "runs");
}

}  // namespace entrynav
