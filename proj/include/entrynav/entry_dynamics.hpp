#pragma once

#include "entrynav/scenario.hpp"

namespace entrynav {

// Exponential atmosphere with fractional uncertainty c1:
// rho = rho0 * (1 + c1) * exp((r0 - r) / hs).
double atmospheric_density(double r, double c1, const PlanetModel& planet);

struct AeroAccels {
  double drag;  // m/s^2
  double lift;  // m/s^2
};

// D = B * rho * v^2 / 2, L = D * LD0 * (1 + c2).
AeroAccels aero_accels(double r, double v, const UncertainParams& c,
                       const VehicleModel& vehicle, const PlanetModel& planet);

// 3-DOF entry equations of motion over a non-rotating planet with zero bank
// angle; g(r) = mu / r^2. Throws PoleSingularity when |lat| reaches a pole.
Vec6 dynamics_rhs(const Vec6& x, const UncertainParams& c,
                  const VehicleModel& vehicle, const PlanetModel& planet);

// Classic fourth-order Runge-Kutta step of dynamics_rhs.
Vec6 rk4_step(const Vec6& x, const UncertainParams& c, double dt,
              const VehicleModel& vehicle, const PlanetModel& planet);

// Phi = d(rk4_step)/dx by central finite differences; per-component step
// max(1e-6, 1e-7 * |x_i|). Consistent with the actual propagation by
// construction.
Mat6 discrete_state_jacobian(const Vec6& x, const UncertainParams& c, double dt,
                             const VehicleModel& vehicle,
                             const PlanetModel& planet);

// Psi = d(rk4_step)/dc by central finite differences with step 1e-6,
// evaluated at the nominal c = 0.
Mat62 discrete_param_jacobian(const Vec6& x, double dt,
                              const VehicleModel& vehicle,
                              const PlanetModel& planet);

}  // namespace entrynav
