#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "entrynav/scenario.hpp"

namespace entrynav {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Hand-derived continuous-time Jacobians of the entry dynamics. These exist
// only as cross-checks for the finite differences the filter actually uses;
// nothing on the estimation path calls them.
Mat6 analytic_state_jacobian(const Vec6& x, const UncertainParams& c,
                             const VehicleModel& vehicle,
                             const PlanetModel& planet);
Mat62 analytic_param_jacobian(const Vec6& x, const VehicleModel& vehicle,
                              const PlanetModel& planet);

// Frobenius error between two Jacobians after scaling column j by the state
// magnitude and row i by the output magnitude, relative to the scaled
// reference. Keeps metre-sized rows from drowning radian-sized ones.
double scaled_jacobian_error(const Eigen::MatrixXd& test,
                             const Eigen::MatrixXd& reference,
                             const Eigen::VectorXd& row_scale,
                             const Eigen::VectorXd& col_scale);

// Full property suite: gain algebra, covariance health, dynamics and
// measurement cross-checks, sampling statistics, determinism. Deterministic
// given the seed.
std::vector<CheckResult> run_property_suite(std::uint64_t seed);

bool all_passed(const std::vector<CheckResult>& results);

}  // namespace entrynav
