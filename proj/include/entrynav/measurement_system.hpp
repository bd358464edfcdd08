#pragma once

#include "entrynav/scenario.hpp"

namespace entrynav {

// (r cos(lat) cos(lon), r cos(lat) sin(lon), r sin(lat)).
Vec3 spherical_to_cartesian(double r, double lon, double lat);

// Accelerometer model in the aerodynamic frame with zero bank angle:
// a = (-D, 0, L). No bias here; the bias belongs to the truth side.
Vec3 accel_predict(const Vec6& x, const UncertainParams& c,
                   const VehicleModel& vehicle, const PlanetModel& planet);

// Straight-line constant-velocity beacon motion.
Vec3 beacon_position(const BeaconEphemeris& beacon, double t);

// Two-way range: Euclidean distance between vehicle and beacon.
double range_predict(const Vec6& x, const BeaconEphemeris& beacon, double t);

// Stacked 6-vector (accel x3, ranges x3). Filter-side model: never biased.
Vec6 measurement_predict(const Vec6& x, const UncertainParams& c, double t,
                         const std::array<BeaconEphemeris, 3>& beacons,
                         const VehicleModel& vehicle,
                         const PlanetModel& planet);

struct MeasurementJacobians {
  Mat6 H;    // dh/dx
  Mat62 Hc;  // dh/dc at c = 0; range rows exactly zero
  Mat6 Y;    // noise coefficient, identity for additive noise
};

// H by central finite differences of measurement_predict in the state, Hc in
// the parameters. Analytic zeros are enforced: ranges carry no parameter
// dependence and the accelerations do not depend on lon/lat/azi.
// Throws UndefinedJacobian when the vehicle is colocated with a beacon.
MeasurementJacobians measurement_jacobians(
    const Vec6& x, double t, const std::array<BeaconEphemeris, 3>& beacons,
    const VehicleModel& vehicle, const PlanetModel& planet);

struct MeasurementBundle {
  double epoch = 0.0;  // s
  Vec3 accel = Vec3::Zero();
  Vec3 ranges = Vec3::Zero();

  Vec6 vec() const {
    Vec6 z;
    z << accel, ranges;
    return z;
  }
};

}  // namespace entrynav
