#include "entrynav/measurement_system.hpp"

#include <cmath>

#include "entrynav/entry_dynamics.hpp"
#include "entrynav/errors.hpp"

namespace entrynav {

namespace {

// Below this separation the line-of-sight direction is meaningless.
constexpr double kColocationEps = 1e-6;  // m

}  // namespace

Vec3 spherical_to_cartesian(double r, double lon, double lat) {
  double cl = std::cos(lat);
  return {r * cl * std::cos(lon), r * cl * std::sin(lon), r * std::sin(lat)};
}

Vec3 accel_predict(const Vec6& x, const UncertainParams& c,
                   const VehicleModel& vehicle, const PlanetModel& planet) {
  auto [drag, lift] = aero_accels(x(0), x(1), c, vehicle, planet);
  // Zero bank angle: the side component vanishes and the normal component
  // carries the full lift.
  return {-drag, 0.0, lift};
}

Vec3 beacon_position(const BeaconEphemeris& beacon, double t) {
  return beacon.position0 + beacon.velocity * t;
}

double range_predict(const Vec6& x, const BeaconEphemeris& beacon, double t) {
  Vec3 p = spherical_to_cartesian(x(0), x(3), x(4));
  return (p - beacon_position(beacon, t)).norm();
}

Vec6 measurement_predict(const Vec6& x, const UncertainParams& c, double t,
                         const std::array<BeaconEphemeris, 3>& beacons,
                         const VehicleModel& vehicle,
                         const PlanetModel& planet) {
  Vec6 z;
  z.head<3>() = accel_predict(x, c, vehicle, planet);
  for (int i = 0; i < 3; ++i) {
    z(3 + i) = range_predict(x, beacons[static_cast<std::size_t>(i)], t);
  }
  return z;
}

MeasurementJacobians measurement_jacobians(
    const Vec6& x, double t, const std::array<BeaconEphemeris, 3>& beacons,
    const VehicleModel& vehicle, const PlanetModel& planet) {
  for (const auto& b : beacons) {
    Vec3 p = spherical_to_cartesian(x(0), x(3), x(4));
    if ((p - beacon_position(b, t)).norm() < kColocationEps) {
      throw UndefinedJacobian(
          "vehicle colocated with a beacon, range Jacobian undefined");
    }
  }

  MeasurementJacobians jac;
  for (int i = 0; i < 6; ++i) {
    double h = std::max(1e-6, 1e-7 * std::abs(x(i)));
    Vec6 xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    jac.H.col(i) = (measurement_predict(xp, {}, t, beacons, vehicle, planet) -
                    measurement_predict(xm, {}, t, beacons, vehicle, planet)) /
                   (2.0 * h);
  }
  constexpr double hc = 1e-6;
  jac.Hc.col(0) =
      (measurement_predict(x, {hc, 0.0}, t, beacons, vehicle, planet) -
       measurement_predict(x, {-hc, 0.0}, t, beacons, vehicle, planet)) /
      (2.0 * hc);
  jac.Hc.col(1) =
      (measurement_predict(x, {0.0, hc}, t, beacons, vehicle, planet) -
       measurement_predict(x, {0.0, -hc}, t, beacons, vehicle, planet)) /
      (2.0 * hc);

  // Structural zeros the finite differences must not be allowed to smear:
  // ranges carry no parameter dependence, and the aerodynamic accelerations
  // depend only on r and v.
  jac.Hc.block<3, 2>(3, 0).setZero();
  jac.H.block<3, 3>(0, 3).setZero();
  jac.Y = Mat6::Identity();
  return jac;
}

}  // namespace entrynav
