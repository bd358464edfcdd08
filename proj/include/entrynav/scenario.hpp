#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>

namespace entrynav {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat62 = Eigen::Matrix<double, 6, 2>;

struct PlanetModel {
  double mu;    // gravitational constant, m^3/s^2
  double rho0;  // nominal surface density, kg/m^3
  double r0;    // reference radius, m
  double hs;    // scale height, m
};

struct VehicleModel {
  double ballistic_coeff;  // B = Cd*S/m, m^2/kg
  double nominal_ld;       // nominal lift-to-drag ratio
  double bank_angle;       // rad, zero throughout
};

// Fractional perturbations of density (c1) and lift-to-drag ratio (c2).
struct UncertainParams {
  double c1 = 0.0;
  double c2 = 0.0;
};

// State order is fixed as (r, v, fpa, lon, lat, azi) everywhere:
// radial distance m, speed m/s, flight-path angle rad, longitude rad,
// latitude rad, azimuth rad.
struct EntryState {
  double r = 0.0;
  double v = 0.0;
  double fpa = 0.0;
  double lon = 0.0;
  double lat = 0.0;
  double azi = 0.0;

  Vec6 vec() const {
    Vec6 x;
    x << r, v, fpa, lon, lat, azi;
    return x;
  }

  static EntryState from_vec(const Vec6& x) {
    return EntryState{x(0), x(1), x(2), x(3), x(4), x(5)};
  }
};

enum class BeaconKind { kOrbiting, kSurface };

// Straight-line constant-velocity ephemeris in the Mars-centered Mars-fixed
// frame. Surface beacons carry zero velocity.
struct BeaconEphemeris {
  BeaconKind kind = BeaconKind::kSurface;
  Vec3 position0 = Vec3::Zero();  // m
  Vec3 velocity = Vec3::Zero();   // m/s
};

struct ImuModel {
  Vec3 accel_bias = Vec3::Zero();        // m/s^2, applied on the truth side only
  Mat3 accel_noise_cov = Mat3::Zero();   // (m/s^2)^2
};

struct ScenarioConfig {
  PlanetModel planet;
  VehicleModel vehicle_truth;
  VehicleModel vehicle_filter;
  EntryState truth_initial;
  EntryState estimate_initial;
  ImuModel imu;
  std::array<BeaconEphemeris, 3> beacons;
  Vec6 p0_diag;                  // initial covariance diagonal, SI units
  Vec6 q_diag;                   // per-step process noise diagonal, SI units
  Vec6 r_diag;                   // measurement noise diagonal (accel x3, range x3)
  Eigen::Vector2d weights;       // sensitivity weight diagonal W
  Eigen::Vector2d c_halfwidth;   // half-widths of the uniform c distributions
  Eigen::Vector2d c_sigma;       // perturbation sigmas, default halfwidth/sqrt(3)
  double dt = 0.1;               // s
  double horizon = 400.0;        // s
  int runs = 200;
  std::uint64_t seed = 0;
};

// Shipped scenario: Mars entry with IMU plus one orbiting and two surface
// ranging beacons.
ScenarioConfig default_scenario();

// Throws ConfigError on any violated invariant (negative variance, horizon
// not a multiple of dt, bad half-widths, moving surface beacon, ...).
void validate_config(const ScenarioConfig& cfg);

}  // namespace entrynav
