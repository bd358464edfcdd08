#include "entrynav/entry_dynamics.hpp"

#include <cmath>
#include <numbers>

#include "entrynav/errors.hpp"

namespace entrynav {

namespace {

constexpr double kPoleGuard = 1e-9;  // rad short of +-pi/2

}  // namespace

double atmospheric_density(double r, double c1, const PlanetModel& planet) {
  return planet.rho0 * (1.0 + c1) * std::exp((planet.r0 - r) / planet.hs);
}

AeroAccels aero_accels(double r, double v, const UncertainParams& c,
                       const VehicleModel& vehicle, const PlanetModel& planet) {
  double rho = atmospheric_density(r, c.c1, planet);
  double drag = vehicle.ballistic_coeff * rho * v * v / 2.0;
  double lift = drag * vehicle.nominal_ld * (1.0 + c.c2);
  return {drag, lift};
}

Vec6 dynamics_rhs(const Vec6& x, const UncertainParams& c,
                  const VehicleModel& vehicle, const PlanetModel& planet) {
  double r = x(0), v = x(1), fpa = x(2), lat = x(4), azi = x(5);
  if (std::abs(lat) >= std::numbers::pi / 2.0 - kPoleGuard) {
    throw PoleSingularity("latitude reached a pole, tan/cos(lat) undefined");
  }
  auto [drag, lift] = aero_accels(r, v, c, vehicle, planet);
  double g = planet.mu / (r * r);
  double sg = std::sin(fpa), cg = std::cos(fpa);
  double sp = std::sin(azi), cp = std::cos(azi);
  double cl = std::cos(lat), tl = std::tan(lat);

  Vec6 f;
  f(0) = v * sg;
  f(1) = -drag - g * sg;
  f(2) = (v / r - g / v) * cg + lift / v;
  f(3) = v * cg * sp / (r * cl);
  f(4) = v * cg * cp / r;
  f(5) = (v / r) * sp * cg * tl;
  return f;
}

Vec6 rk4_step(const Vec6& x, const UncertainParams& c, double dt,
              const VehicleModel& vehicle, const PlanetModel& planet) {
  Vec6 k1 = dynamics_rhs(x, c, vehicle, planet);
  Vec6 k2 = dynamics_rhs(x + 0.5 * dt * k1, c, vehicle, planet);
  Vec6 k3 = dynamics_rhs(x + 0.5 * dt * k2, c, vehicle, planet);
  Vec6 k4 = dynamics_rhs(x + dt * k3, c, vehicle, planet);
  return x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Mat6 discrete_state_jacobian(const Vec6& x, const UncertainParams& c, double dt,
                             const VehicleModel& vehicle,
                             const PlanetModel& planet) {
  Mat6 phi;
  for (int i = 0; i < 6; ++i) {
    double h = std::max(1e-6, 1e-7 * std::abs(x(i)));
    Vec6 xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    phi.col(i) = (rk4_step(xp, c, dt, vehicle, planet) -
                  rk4_step(xm, c, dt, vehicle, planet)) /
                 (2.0 * h);
  }
  return phi;
}

Mat62 discrete_param_jacobian(const Vec6& x, double dt,
                              const VehicleModel& vehicle,
                              const PlanetModel& planet) {
  constexpr double h = 1e-6;
  Mat62 psi;
  psi.col(0) = (rk4_step(x, {h, 0.0}, dt, vehicle, planet) -
                rk4_step(x, {-h, 0.0}, dt, vehicle, planet)) /
               (2.0 * h);
  psi.col(1) = (rk4_step(x, {0.0, h}, dt, vehicle, planet) -
                rk4_step(x, {0.0, -h}, dt, vehicle, planet)) /
               (2.0 * h);
  return psi;
}

}  // namespace entrynav
