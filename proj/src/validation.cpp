#include "entrynav/validation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "entrynav/csv_reports.hpp"
#include "entrynav/entry_dynamics.hpp"
#include "entrynav/errors.hpp"
#include "entrynav/filter_core.hpp"
#include "entrynav/measurement_system.hpp"
#include "entrynav/monte_carlo.hpp"
#include "entrynav/rng.hpp"

namespace entrynav {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::string sci(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

Mat random_matrix(RunRng& rng, int rows, int cols) {
  Mat m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = rng.gaussian();
  return m;
}

Mat random_spd(RunRng& rng, int n) {
  const Mat a = random_matrix(rng, n, n);
  return a * a.transpose() + 0.1 * Mat::Identity(n, n);
}

struct GainInstance {
  Mat P, H, R, Y, S, gamma;
  Vec w;
};

GainInstance random_gain_instance(RunRng& rng, int n, int m, int l) {
  GainInstance gi;
  gi.P = random_spd(rng, n);
  gi.H = random_matrix(rng, m, n);
  gi.R = random_spd(rng, m);
  gi.Y = Mat::Identity(m, m) + 0.3 * random_matrix(rng, m, m);
  gi.S = random_matrix(rng, n, l);
  gi.gamma = random_matrix(rng, m, l);
  gi.w = Vec(l);
  for (int i = 0; i < l; ++i) gi.w(i) = rng.uniform(0.0, 2.0);
  return gi;
}

GainInstance random_sized_instance(RunRng& rng) {
  const int n = 2 + static_cast<int>(rng.raw() % 7);   // 2..8
  const int m = 1 + static_cast<int>(rng.raw() % 8);   // 1..8
  const int l = 1 + static_cast<int>(rng.raw() % 3);   // 1..3
  return random_gain_instance(rng, n, m, l);
}

Vec6 random_envelope_state(RunRng& rng, const PlanetModel& planet) {
  EntryState s;
  s.r = planet.r0 + rng.uniform(-40e3, 100e3);
  s.v = rng.uniform(300.0, 6000.0);
  s.fpa = rng.uniform(-30.0, 5.0) * kDeg;
  s.lon = rng.uniform(-120.0, -60.0) * kDeg;
  s.lat = rng.uniform(-45.0, -10.0) * kDeg;
  s.azi = rng.uniform(-10.0, 20.0) * kDeg;
  return s.vec();
}

Vec6 state_scale(const Vec6& x) {
  Vec6 s;
  for (int i = 0; i < 6; ++i) s(i) = std::max(std::abs(x(i)), 1.0);
  return s;
}

Mat6 fd_rhs_state_jacobian(const Vec6& x, const UncertainParams& c,
                           const VehicleModel& vehicle,
                           const PlanetModel& planet) {
  Mat6 f;
  for (int j = 0; j < 6; ++j) {
    const double h = 1e-6 * std::max(1.0, std::abs(x(j)));
    Vec6 xp = x, xm = x;
    xp(j) += h;
    xm(j) -= h;
    f.col(j) = (dynamics_rhs(xp, c, vehicle, planet) -
                dynamics_rhs(xm, c, vehicle, planet)) /
               (2.0 * h);
  }
  return f;
}

Mat62 fd_rhs_param_jacobian(const Vec6& x, const VehicleModel& vehicle,
                            const PlanetModel& planet) {
  Mat62 f;
  const double h = 1e-6;
  for (int j = 0; j < 2; ++j) {
    UncertainParams cp, cm;
    (j == 0 ? cp.c1 : cp.c2) = h;
    (j == 0 ? cm.c1 : cm.c2) = -h;
    f.col(j) = (dynamics_rhs(x, cp, vehicle, planet) -
                dynamics_rhs(x, cm, vehicle, planet)) /
               (2.0 * h);
  }
  return f;
}

// Exact chain rule of the RK4 map: the variational recursion through the
// four stages, driven by the analytic continuous Jacobians.
void tangent_linear_rk4(const Vec6& x, double dt, const VehicleModel& vehicle,
                        const PlanetModel& planet, Mat6* phi, Mat62* psi) {
  const UncertainParams c0;
  const Mat6 eye = Mat6::Identity();

  const Vec6 k1 = dynamics_rhs(x, c0, vehicle, planet);
  const Vec6 x2 = x + 0.5 * dt * k1;
  const Vec6 k2 = dynamics_rhs(x2, c0, vehicle, planet);
  const Vec6 x3 = x + 0.5 * dt * k2;
  const Vec6 k3 = dynamics_rhs(x3, c0, vehicle, planet);
  const Vec6 x4 = x + dt * k3;

  const Mat6 f1 = analytic_state_jacobian(x, c0, vehicle, planet);
  const Mat6 f2 = analytic_state_jacobian(x2, c0, vehicle, planet);
  const Mat6 f3 = analytic_state_jacobian(x3, c0, vehicle, planet);
  const Mat6 f4 = analytic_state_jacobian(x4, c0, vehicle, planet);

  const Mat6 K1 = f1;
  const Mat6 K2 = f2 * (eye + 0.5 * dt * K1);
  const Mat6 K3 = f3 * (eye + 0.5 * dt * K2);
  const Mat6 K4 = f4 * (eye + dt * K3);
  *phi = eye + (dt / 6.0) * (K1 + 2.0 * K2 + 2.0 * K3 + K4);

  const Mat62 g1 = analytic_param_jacobian(x, vehicle, planet);
  const Mat62 g2 = analytic_param_jacobian(x2, vehicle, planet);
  const Mat62 g3 = analytic_param_jacobian(x3, vehicle, planet);
  const Mat62 g4 = analytic_param_jacobian(x4, vehicle, planet);

  const Mat62 C1 = g1;
  const Mat62 C2 = g2 + f2 * (0.5 * dt * C1);
  const Mat62 C3 = g3 + f3 * (0.5 * dt * C2);
  const Mat62 C4 = g4 + f4 * (dt * C3);
  *psi = (dt / 6.0) * (C1 + 2.0 * C2 + 2.0 * C3 + C4);
}

CheckResult make_result(const std::string& name, bool ok,
                        const std::string& detail) {
  return CheckResult{name, ok, detail};
}

CheckResult check_gain_w0_reduction(RunRng& rng) {
  double worst = 0.0;
  for (int it = 0; it < 200; ++it) {
    const GainInstance gi = random_sized_instance(rng);
    const Vec w0 = Vec::Zero(gi.w.size());
    const Mat ka = adekf_gain(gi.P, gi.H, gi.Y, gi.R, gi.S, gi.gamma, w0);
    const Mat ke = ekf_gain(gi.P, gi.H, gi.Y, gi.R);
    const double rel =
        (ka - ke).cwiseAbs().maxCoeff() / std::max(ke.cwiseAbs().maxCoeff(), 1e-300);
    worst = std::max(worst, rel);
  }
  return make_result("gain_w0_reduction", worst <= 1e-14,
                     "max rel diff " + sci(worst) + " over 200 instances");
}

CheckResult check_gain_oracle_equivalence(RunRng& rng) {
  double worst = 0.0;
  for (int it = 0; it < 200; ++it) {
    const GainInstance gi = random_sized_instance(rng);
    const Mat ka =
        adekf_gain(gi.P, gi.H, gi.Y, gi.R, gi.S, gi.gamma, gi.w);
    std::vector<Mat> full;
    for (int i = 0; i < gi.w.size(); ++i)
      full.push_back(gi.w(i) *
                     Mat::Identity(gi.P.rows(), gi.P.rows()));
    const Mat kd =
        dekf_gain_linear(gi.P, gi.H, gi.Y, gi.R, gi.S, gi.gamma, full);
    const double rel = (ka - kd).norm() / std::max(ka.norm(), 1e-300);
    worst = std::max(worst, rel);
  }
  return make_result("gain_oracle_equivalence", worst <= 1e-10,
                     "max rel diff " + sci(worst) + " over 200 instances");
}

CheckResult check_gain_stationarity(RunRng& rng) {
  double worst = 0.0;
  for (int it = 0; it < 100; ++it) {
    const GainInstance gi = random_sized_instance(rng);
    const Mat k = adekf_gain(gi.P, gi.H, gi.Y, gi.R, gi.S, gi.gamma, gi.w);
    double ref = 0.0;
    const double res = gain_stationarity_residual(k, gi.P, gi.H, gi.Y, gi.R,
                                                  gi.S, gi.gamma, gi.w, &ref);
    worst = std::max(worst, res / std::max(ref, 1e-300));
  }
  return make_result("gain_stationarity_closed_form", worst <= 1e-12,
                     "max relative residual " + sci(worst));
}

CheckResult check_gradient_matches_fd(RunRng& rng) {
  double worst = 0.0;
  for (int it = 0; it < 100; ++it) {
    const GainInstance gi = random_sized_instance(rng);
    const int n = static_cast<int>(gi.P.rows());
    const int m = static_cast<int>(gi.R.rows());
    const Mat k = random_matrix(rng, n, m);
    const Mat grad = stationarity_gradient(k, gi.P, gi.H, gi.Y, gi.R, gi.S,
                                           gi.gamma, gi.w);
    Mat fd(n, m);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < m; ++j) {
        const double eta = 1e-5 * std::max(1.0, std::abs(k(i, j)));
        Mat kp = k, km = k;
        kp(i, j) += eta;
        km(i, j) -= eta;
        fd(i, j) = (desensitized_cost(kp, gi.P, gi.H, gi.Y, gi.R, gi.S,
                                      gi.gamma, gi.w) -
                    desensitized_cost(km, gi.P, gi.H, gi.Y, gi.R, gi.S,
                                      gi.gamma, gi.w)) /
                   (2.0 * eta);
      }
    }
    const double rel = (fd - grad).norm() / std::max(grad.norm(), 1e-300);
    worst = std::max(worst, rel);
  }
  return make_result("gain_gradient_matches_fd", worst <= 1e-6,
                     "max rel gradient error " + sci(worst));
}

CheckResult check_cost_minimum(RunRng& rng) {
  double worst = -1e300;
  for (int it = 0; it < 100; ++it) {
    const GainInstance gi = random_sized_instance(rng);
    const Mat k = adekf_gain(gi.P, gi.H, gi.Y, gi.R, gi.S, gi.gamma, gi.w);
    const double j0 =
        desensitized_cost(k, gi.P, gi.H, gi.Y, gi.R, gi.S, gi.gamma, gi.w);
    std::vector<Mat> rivals;
    rivals.push_back(ekf_gain(gi.P, gi.H, gi.Y, gi.R));
    for (int t = 0; t < 5; ++t)
      rivals.push_back(
          k + 0.01 * random_matrix(rng, static_cast<int>(k.rows()),
                                   static_cast<int>(k.cols())));
    for (const Mat& rival : rivals) {
      const double jr = desensitized_cost(rival, gi.P, gi.H, gi.Y, gi.R, gi.S,
                                          gi.gamma, gi.w);
      // j0 must not exceed any rival beyond roundoff.
      worst = std::max(worst, (j0 - jr) / std::max(std::abs(j0), 1e-300));
    }
  }
  return make_result("gain_cost_minimum", worst <= 1e-12,
                     "max (J* - J_rival)/|J*| = " + sci(worst));
}

CheckResult check_joseph_psd(RunRng& rng) {
  double worst_sym = 0.0;
  double worst_eig = 0.0;
  for (int it = 0; it < 100; ++it) {
    const GainInstance gi = random_sized_instance(rng);
    const int n = static_cast<int>(gi.P.rows());
    const int m = static_cast<int>(gi.R.rows());
    const Mat k = random_matrix(rng, n, m);
    const Mat p = joseph_update(gi.P, k, gi.H, gi.Y, gi.R);
    worst_sym = std::max(
        worst_sym, (p - p.transpose()).norm() / std::max(p.norm(), 1e-300));
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (p + p.transpose()),
                                          Eigen::EigenvaluesOnly);
    worst_eig =
        std::max(worst_eig, -es.eigenvalues()(0) / std::max(p.trace(), 1e-300));
  }
  const bool ok = worst_sym <= 1e-13 && worst_eig <= 1e-12;
  return make_result("joseph_update_psd", ok,
                     "asymmetry " + sci(worst_sym) + ", min eig deficit " +
                         sci(worst_eig));
}

CheckResult check_insensitive_limit(RunRng& rng) {
  const int n = 3, m = 2, l = 2;
  ProcessModel pm;
  const Mat phi = 0.8 * Mat::Identity(n, n) + 0.1 * random_matrix(rng, n, n);
  pm.step = [phi](const Vec& x, const Vec&, double) -> Vec { return phi * x; };
  pm.state_jacobian = [phi](const Vec&, const Vec&, double) -> Mat {
    return phi;
  };
  pm.param_jacobian = [n, l](const Vec&, const Vec&, double) -> Mat {
    return Mat::Zero(n, l);
  };
  pm.process_noise_coeff = Mat::Identity(n, n);
  pm.process_noise_cov = 0.1 * Mat::Identity(n, n);
  pm.nominal_params = Vec::Zero(l);

  MeasurementModel mm;
  const Mat h = random_matrix(rng, m, n);
  mm.predict = [h](const Vec& x, const Vec&, double) -> Vec { return h * x; };
  mm.state_jacobian = [h](const Vec&, const Vec&, double) -> Mat { return h; };
  mm.param_jacobian = [m, l](const Vec&, const Vec&, double) -> Mat {
    return Mat::Zero(m, l);
  };
  mm.noise_coeff = Mat::Identity(m, m);
  mm.noise_cov = random_spd(rng, m);
  mm.nominal_params = Vec::Zero(l);

  SensitivityWeights w;
  w.diag_weights = Vec(l);
  w.diag_weights << 0.7, 1.3;

  FilterState a, b;
  a.epoch = 0.0;
  a.estimate = random_matrix(rng, n, 1);
  a.covariance = random_spd(rng, n);
  a.sensitivity = Mat::Zero(n, l);
  b = a;

  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const Vec z = random_matrix(rng, m, 1);
    a = time_update(a, pm, 1.0);
    b = time_update(b, pm, 1.0);
    a = measurement_update(a, mm, z, GainMode::kEkf, w);
    b = measurement_update(b, mm, z, GainMode::kAdekf, w);
    worst = std::max(worst, (a.estimate - b.estimate).norm() /
                                (1.0 + a.estimate.norm()));
    worst = std::max(worst, (a.covariance - b.covariance).norm() /
                                (1.0 + a.covariance.norm()));
  }
  return make_result("insensitive_limit_equals_ekf", worst <= 1e-12,
                     "max rel discrepancy " + sci(worst) + " over 50 steps");
}

CheckResult check_dynamics_jacobian_analytic(RunRng& rng,
                                             const ScenarioConfig& cfg) {
  double worst = 0.0;
  for (int it = 0; it < 100; ++it) {
    const Vec6 x = random_envelope_state(rng, cfg.planet);
    UncertainParams c;
    c.c1 = rng.uniform(-0.15, 0.15);
    c.c2 = rng.uniform(-0.1, 0.1);
    const Mat6 fd = fd_rhs_state_jacobian(x, c, cfg.vehicle_truth, cfg.planet);
    const Mat6 an =
        analytic_state_jacobian(x, c, cfg.vehicle_truth, cfg.planet);
    const Vec6 s = state_scale(x);
    worst = std::max(worst, scaled_jacobian_error(fd, an, s, s));

    const Mat62 fdc = fd_rhs_param_jacobian(x, cfg.vehicle_truth, cfg.planet);
    const Mat62 anc =
        analytic_param_jacobian(x, cfg.vehicle_truth, cfg.planet);
    worst = std::max(
        worst, scaled_jacobian_error(fdc, anc, s, Eigen::Vector2d::Ones()));
  }
  return make_result("dynamics_jacobian_analytic", worst <= 1e-4,
                     "max scaled error " + sci(worst) + " over 100 states");
}

CheckResult check_discrete_jacobian_tangent_linear(RunRng& rng,
                                                   const ScenarioConfig& cfg) {
  double worst_phi = 0.0;
  double worst_psi = 0.0;
  const double dt = cfg.dt;
  for (int it = 0; it < 20; ++it) {
    const Vec6 x = random_envelope_state(rng, cfg.planet);
    const UncertainParams c0;
    const Mat6 phi_fd =
        discrete_state_jacobian(x, c0, dt, cfg.vehicle_filter, cfg.planet);
    Mat6 phi_tl;
    Mat62 psi_tl;
    tangent_linear_rk4(x, dt, cfg.vehicle_filter, cfg.planet, &phi_tl, &psi_tl);
    const Vec6 s = state_scale(x);
    worst_phi =
        std::max(worst_phi, scaled_jacobian_error(phi_fd, phi_tl, s, s));
  }
  // Psi scales with drag, so judge it where drag is significant; at
  // high-altitude states the whole matrix sits below the c-step noise floor.
  for (int it = 0; it < 20; ++it) {
    Vec6 x = random_envelope_state(rng, cfg.planet);
    x(0) = cfg.planet.r0 + rng.uniform(-40e3, 10e3);
    x(1) = rng.uniform(2000.0, 6000.0);
    const Mat62 psi_fd =
        discrete_param_jacobian(x, dt, cfg.vehicle_filter, cfg.planet);
    Mat6 phi_tl;
    Mat62 psi_tl;
    tangent_linear_rk4(x, dt, cfg.vehicle_filter, cfg.planet, &phi_tl, &psi_tl);
    const Vec6 s = state_scale(x);
    worst_psi = std::max(worst_psi, scaled_jacobian_error(
                                        psi_fd, psi_tl, s,
                                        Eigen::Vector2d::Ones()));
  }
  const bool ok = worst_phi <= 1e-8 && worst_psi <= 1e-4;
  return make_result("discrete_jacobian_tangent_linear", ok,
                     "phi " + sci(worst_phi) + ", psi " + sci(worst_psi));
}

CheckResult check_rk4_convergence(const ScenarioConfig& cfg) {
  // Start from the stretch of peak dynamic pressure so truncation, not
  // roundoff, dominates the step-halving differences.
  const UncertainParams c0;
  Vec6 x = cfg.truth_initial.vec();
  for (int k = 0; k < 1050; ++k)
    x = rk4_step(x, c0, 0.1, cfg.vehicle_truth, cfg.planet);

  const double arc = 10.0;
  const auto integrate = [&](double dt) {
    Vec6 y = x;
    const int steps = static_cast<int>(std::llround(arc / dt));
    for (int k = 0; k < steps; ++k)
      y = rk4_step(y, c0, dt, cfg.vehicle_truth, cfg.planet);
    return y;
  };
  const Vec6 ref = integrate(1e-3);
  const Vec6 s = state_scale(ref);
  const std::array<double, 4> dts = {2.0, 1.0, 0.5, 0.25};
  std::array<double, 4> errs{};
  for (std::size_t i = 0; i < dts.size(); ++i)
    errs[i] = ((integrate(dts[i]) - ref).cwiseQuotient(s)).norm();
  double min_order = 1e300;
  std::string orders;
  for (std::size_t i = 0; i + 1 < errs.size(); ++i) {
    const double p = std::log2(errs[i] / errs[i + 1]);
    min_order = std::min(min_order, p);
    if (!orders.empty()) orders += ", ";
    orders += sci(p);
  }
  return make_result("rk4_convergence_order", min_order >= 3.8,
                     "observed orders " + orders);
}

CheckResult check_energy_conservation(const ScenarioConfig& cfg) {
  VehicleModel ballistic = cfg.vehicle_truth;
  ballistic.ballistic_coeff = 0.0;  // no aerodynamic force, pure Kepler motion
  const UncertainParams c0;
  Vec6 x = cfg.truth_initial.vec();
  const auto energy = [&](const Vec6& y) {
    return 0.5 * y(1) * y(1) - cfg.planet.mu / y(0);
  };
  const double e0 = energy(x);
  double worst = 0.0;
  for (int k = 0; k < 4000; ++k) {
    x = rk4_step(x, c0, 0.1, ballistic, cfg.planet);
    worst = std::max(worst, std::abs(energy(x) - e0) / std::abs(e0));
  }
  return make_result("ballistic_energy_conservation", worst <= 1e-6,
                     "max relative drift " + sci(worst) + " over 400 s");
}

CheckResult check_atmosphere_identities(const ScenarioConfig& cfg) {
  double worst = 0.0;
  bool monotone = true;
  double prev = 1e300;
  for (int i = 0; i <= 14; ++i) {
    const double r = cfg.planet.r0 - 40e3 + i * 10e3;
    const double rho = atmospheric_density(r, 0.0, cfg.planet);
    if (rho >= prev) monotone = false;
    prev = rho;
    for (double c1 : {-0.15, -0.05, 0.1}) {
      const double ratio =
          atmospheric_density(r, c1, cfg.planet) / rho - (1.0 + c1);
      worst = std::max(worst, std::abs(ratio));
    }
    for (double c2 : {-0.1, 0.0, 0.07}) {
      UncertainParams c;
      c.c2 = c2;
      const AeroAccels aero =
          aero_accels(r, 4000.0, c, cfg.vehicle_truth, cfg.planet);
      const double expected = 0.5 * cfg.vehicle_truth.ballistic_coeff * rho *
                              4000.0 * 4000.0;
      worst = std::max(worst, std::abs(aero.drag / expected - 1.0));
      worst = std::max(
          worst, std::abs(aero.lift / aero.drag -
                          cfg.vehicle_truth.nominal_ld * (1.0 + c2)));
    }
  }
  return make_result("atmosphere_scaling_identities", monotone && worst <= 1e-13,
                     std::string(monotone ? "monotone" : "NOT monotone") +
                         ", max identity error " + sci(worst));
}

CheckResult check_measurement_jacobians(RunRng& rng,
                                        const ScenarioConfig& cfg) {
  double worst_structural = 0.0;
  double worst_rows = 0.0;
  double worst_hc = 0.0;
  for (int it = 0; it < 100; ++it) {
    const Vec6 x = random_envelope_state(rng, cfg.planet);
    const double t = rng.uniform(0.0, 400.0);
    const MeasurementJacobians jac =
        measurement_jacobians(x, t, cfg.beacons, cfg.vehicle_filter, cfg.planet);

    worst_structural = std::max(
        worst_structural, (jac.Y - Mat6::Identity()).cwiseAbs().maxCoeff());
    worst_structural = std::max(
        worst_structural, jac.Hc.block<3, 2>(3, 0).cwiseAbs().maxCoeff());
    worst_structural = std::max(
        worst_structural, jac.H.block<3, 3>(0, 3).cwiseAbs().maxCoeff());

    const double r = x(0), v = x(1), lon = x(3), lat = x(4);
    const UncertainParams c0;
    const AeroAccels aero =
        aero_accels(r, v, c0, cfg.vehicle_filter, cfg.planet);
    const Vec6 s = state_scale(x);

    // Accelerometer rows against the closed-form drag/lift partials.
    Mat6 h_an = Mat6::Zero();
    h_an(0, 0) = aero.drag / cfg.planet.hs;
    h_an(0, 1) = -2.0 * aero.drag / v;
    h_an(2, 0) = -aero.lift / cfg.planet.hs;
    h_an(2, 1) = 2.0 * aero.lift / v;

    // Range rows through the line-of-sight chain rule.
    const Vec3 p = spherical_to_cartesian(r, lon, lat);
    const double cl = std::cos(lat), sl = std::sin(lat);
    const double ct = std::cos(lon), st = std::sin(lon);
    Eigen::Matrix3d jp;
    jp.col(0) << cl * ct, cl * st, sl;
    jp.col(1) << -r * cl * st, r * cl * ct, 0.0;
    jp.col(2) << -r * sl * ct, -r * sl * st, r * cl;
    for (int b = 0; b < 3; ++b) {
      const Vec3 d = p - beacon_position(cfg.beacons[b], t);
      const Vec3 u = d / d.norm();
      const Vec3 row = jp.transpose() * u;
      h_an(3 + b, 0) = row(0);
      h_an(3 + b, 3) = row(1);
      h_an(3 + b, 4) = row(2);
    }
    for (int i = 0; i < 6; ++i) {
      if (i == 1) continue;  // all-zero row, covered by the structural check
      const Eigen::RowVectorXd fd_row =
          jac.H.row(i).cwiseProduct(s.transpose());
      const Eigen::RowVectorXd an_row =
          h_an.row(i).cwiseProduct(s.transpose());
      worst_rows = std::max(
          worst_rows, (fd_row - an_row).norm() / std::max(an_row.norm(), 1e-300));
    }
    worst_structural =
        std::max(worst_structural, jac.H.row(1).cwiseAbs().maxCoeff());

    // Parameter columns: d(-D)/dc1 = -D, dL/dc1 = dL/dc2 = L at c = 0.
    Mat62 hc_an = Mat62::Zero();
    hc_an(0, 0) = -aero.drag;
    hc_an(2, 0) = aero.lift;
    hc_an(2, 1) = aero.lift;
    worst_hc = std::max(worst_hc, (jac.Hc - hc_an).cwiseAbs().maxCoeff() /
                                      std::max(aero.drag, 1e-300));
  }
  const bool ok =
      worst_structural == 0.0 && worst_rows <= 1e-4 && worst_hc <= 1e-8;
  return make_result("measurement_jacobian_checks", ok,
                     "structural " + sci(worst_structural) + ", rows " +
                         sci(worst_rows) + ", params " + sci(worst_hc));
}

CheckResult check_error_contracts(const ScenarioConfig& cfg) {
  std::string failures;

  {
    auto beacons = cfg.beacons;
    const Vec6 x = cfg.truth_initial.vec();
    beacons[1].position0 = spherical_to_cartesian(x(0), x(3), x(4));
    bool threw = false;
    try {
      measurement_jacobians(x, 0.0, beacons, cfg.vehicle_filter, cfg.planet);
    } catch (const UndefinedJacobian&) {
      threw = true;
    }
    if (!threw) failures += "colocated-beacon ";
  }
  {
    Vec6 x = cfg.truth_initial.vec();
    x(4) = std::numbers::pi / 2.0;
    bool threw = false;
    try {
      dynamics_rhs(x, UncertainParams{}, cfg.vehicle_truth, cfg.planet);
    } catch (const PoleSingularity&) {
      threw = true;
    }
    if (!threw) failures += "pole ";
  }
  {
    bool threw = false;
    try {
      ekf_gain(Mat::Zero(2, 2), Mat::Zero(2, 2), Mat::Identity(2, 2),
               Mat::Zero(2, 2));
    } catch (const SingularInnovation&) {
      threw = true;
    }
    if (!threw) failures += "singular-innovation ";
  }
  {
    bool threw = false;
    try {
      std::vector<Mat> full{Mat::Zero(2, 2)};
      dekf_gain_linear(Mat::Zero(2, 2), Mat::Zero(2, 2), Mat::Identity(2, 2),
                       Mat::Zero(2, 2), Mat::Zero(2, 1), Mat::Zero(2, 1), full);
    } catch (const SingularGainSystem&) {
      threw = true;
    }
    if (!threw) failures += "singular-gain-system ";
  }
  {
    ScenarioConfig bad = cfg;
    bad.r_diag(0) = -1.0;
    bool threw = false;
    try {
      validate_config(bad);
    } catch (const ConfigError&) {
      threw = true;
    }
    if (!threw) failures += "negative-variance ";
  }
  {
    RunHistory h;
    h.diverged = true;
    bool threw = false;
    try {
      rmse({h});
    } catch (const EmptyReport&) {
      threw = true;
    }
    if (!threw) failures += "empty-report ";
  }
  return make_result("error_contracts", failures.empty(),
                     failures.empty() ? "all contracts honored"
                                      : "missing: " + failures);
}

CheckResult check_sampling_statistics(const ScenarioConfig& cfg) {
  std::string failures;
  const int n = 100000;
  {
    RunRng rng(314159);
    double sum1 = 0.0, sum2 = 0.0;
    bool bounds = true;
    for (int i = 0; i < n; ++i) {
      const UncertainParams c = sample_params(cfg, rng);
      if (std::abs(c.c1) > cfg.c_halfwidth(0) ||
          std::abs(c.c2) > cfg.c_halfwidth(1))
        bounds = false;
      sum1 += c.c1;
      sum2 += c.c2;
    }
    const double se1 = cfg.c_halfwidth(0) / std::sqrt(3.0 * n);
    const double se2 = cfg.c_halfwidth(1) / std::sqrt(3.0 * n);
    if (!bounds) failures += "bounds ";
    if (std::abs(sum1 / n) > 4.0 * se1) failures += "c1-mean ";
    if (std::abs(sum2 / n) > 4.0 * se2) failures += "c2-mean ";
  }
  {
    RunRng rng(271828);
    double m1 = 0.0, m2 = 0.0;
    double lo = 1e300, hi = -1e300;
    for (int i = 0; i < n; ++i) {
      const double g = rng.gaussian();
      m1 += g;
      m2 += g * g;
      const double u = rng.uniform01();
      lo = std::min(lo, u);
      hi = std::max(hi, u);
    }
    m1 /= n;
    m2 /= n;
    if (std::abs(m1) > 4.0 / std::sqrt(static_cast<double>(n)))
      failures += "gauss-mean ";
    if (std::abs(m2 - 1.0) > 4.0 * std::sqrt(2.0 / n)) failures += "gauss-var ";
    if (lo < 0.0 || hi >= 1.0) failures += "uniform01-range ";
  }
  {
    RunRng a(42), b(42);
    for (int i = 0; i < 5; ++i)
      if (a.gaussian() != b.gaussian()) failures += "reproducibility ";
    std::set<std::uint64_t> seeds;
    for (int i = 0; i < 2000; ++i) seeds.insert(derive_run_seed(cfg.seed, i));
    if (seeds.size() != 2000) failures += "seed-collision ";
    if (derive_run_seed(1, 0) == derive_run_seed(2, 0))
      failures += "master-insensitive ";
  }
  return make_result("sampling_statistics", failures.empty(),
                     failures.empty() ? "bounds, moments and determinism hold"
                                      : "failed: " + failures);
}

CheckResult check_perturbation_identity(const ScenarioConfig& cfg) {
  ScenarioConfig short_cfg = cfg;
  short_cfg.horizon = 3.0;
  RunRng rng(derive_run_seed(short_cfg.seed, 0));
  const UncertainParams c = sample_params(short_cfg, rng);
  const TruthAndMeasurements tm = simulate_truth(short_cfg, c, rng);
  const RunHistory h = run_filter(short_cfg, tm, GainMode::kAdekf);
  double worst = 0.0;
  for (std::size_t k = 0; k < h.epochs.size(); ++k) {
    Mat62 manual;
    for (int j = 0; j < 2; ++j)
      manual.col(j) = h.sensitivity[k].col(j) * short_cfg.c_sigma(j);
    worst = std::max(worst,
                     (h.perturbation[k] - manual).cwiseAbs().maxCoeff());
  }
  return make_result("perturbation_identity", worst == 0.0,
                     "max abs recomputation diff " + sci(worst));
}

CheckResult check_zero_noise_pipeline(const ScenarioConfig& cfg) {
  ScenarioConfig matched = cfg;
  matched.vehicle_truth = cfg.vehicle_filter;
  matched.estimate_initial = cfg.truth_initial;
  matched.horizon = 30.0;

  // Clean measurements: no bias, no noise, matched parameters.
  const UncertainParams c0;
  const int steps = static_cast<int>(std::llround(matched.horizon / matched.dt));
  TruthAndMeasurements tm;
  tm.c = c0;
  Vec6 x = matched.truth_initial.vec();
  tm.truth.push_back(x);
  for (int k = 1; k <= steps; ++k) {
    x = rk4_step(x, c0, matched.dt, matched.vehicle_truth, matched.planet);
    tm.truth.push_back(x);
    const Vec6 clean = measurement_predict(x, c0, k * matched.dt,
                                           matched.beacons,
                                           matched.vehicle_truth,
                                           matched.planet);
    MeasurementBundle z;
    z.epoch = k * matched.dt;
    z.accel = clean.head<3>();
    z.ranges = clean.tail<3>();
    tm.measurements.push_back(z);
  }

  double worst = 0.0;
  for (GainMode mode : {GainMode::kEkf, GainMode::kAdekf}) {
    const RunHistory h = run_filter(matched, tm, mode);
    if (h.diverged) return make_result("zero_noise_pipeline", false, "diverged");
    const Vec6 s = state_scale(tm.truth.back());
    worst = std::max(
        worst,
        ((h.estimate.back() - tm.truth.back()).cwiseQuotient(s)).cwiseAbs().maxCoeff());
  }
  return make_result("zero_noise_pipeline", worst <= 1e-12,
                     "max scaled terminal error " + sci(worst));
}

CheckResult check_campaign_determinism(const ScenarioConfig& cfg) {
  ScenarioConfig small = cfg;
  small.runs = 4;
  small.horizon = 30.0;
  const MonteCarloReport a = run_campaign(small, 1);
  const MonteCarloReport b = run_campaign(small, 3);
  double worst = 0.0;
  bool exact = true;
  for (int m = 0; m < 2; ++m) {
    if (a.rmse[m].size() != b.rmse[m].size()) exact = false;
    for (std::size_t k = 0; k < a.rmse[m].size() && exact; ++k) {
      for (int i = 0; i < 6; ++i) {
        if (a.rmse[m][k](i) != b.rmse[m][k](i) ||
            a.nme[m][k](i) != b.nme[m][k](i))
          exact = false;
        worst = std::max(worst, std::abs(a.rmse[m][k](i) - b.rmse[m][k](i)));
      }
    }
    if ((a.capture_fraction[m].array() != b.capture_fraction[m].array()).any())
      exact = false;
    if (a.worst_cov_health[m] != b.worst_cov_health[m]) exact = false;
  }
  return make_result("campaign_determinism", exact,
                     exact ? "1-thread and 3-thread reports bit-identical"
                           : "reports differ, max rmse diff " + sci(worst));
}

}  // namespace

Mat6 analytic_state_jacobian(const Vec6& x, const UncertainParams& c,
                             const VehicleModel& vehicle,
                             const PlanetModel& planet) {
  const double r = x(0), v = x(1), fpa = x(2), lat = x(4), azi = x(5);
  const AeroAccels aero = aero_accels(r, v, c, vehicle, planet);
  const double D = aero.drag, L = aero.lift;
  const double g = planet.mu / (r * r);
  const double sg = std::sin(fpa), cg = std::cos(fpa);
  const double sp = std::sin(azi), cp = std::cos(azi);
  const double cl = std::cos(lat), tl = std::tan(lat);
  const double hs = planet.hs, mu = planet.mu;

  Mat6 f = Mat6::Zero();
  f(0, 1) = sg;
  f(0, 2) = v * cg;

  f(1, 0) = D / hs + 2.0 * mu * sg / (r * r * r);
  f(1, 1) = -2.0 * D / v;
  f(1, 2) = -g * cg;

  f(2, 0) = (-v / (r * r) + 2.0 * mu / (r * r * r * v)) * cg - L / (hs * v);
  f(2, 1) = (1.0 / r + g / (v * v)) * cg + L / (v * v);
  f(2, 2) = -(v / r - g / v) * sg;

  f(3, 0) = -v * cg * sp / (r * r * cl);
  f(3, 1) = cg * sp / (r * cl);
  f(3, 2) = -v * sg * sp / (r * cl);
  f(3, 4) = v * cg * sp * tl / (r * cl);
  f(3, 5) = v * cg * cp / (r * cl);

  f(4, 0) = -v * cg * cp / (r * r);
  f(4, 1) = cg * cp / r;
  f(4, 2) = -v * sg * cp / r;
  f(4, 5) = -v * cg * sp / r;

  f(5, 0) = -v * sp * cg * tl / (r * r);
  f(5, 1) = sp * cg * tl / r;
  f(5, 2) = -v * sp * sg * tl / r;
  f(5, 4) = v * sp * cg / (r * cl * cl);
  f(5, 5) = v * cp * cg * tl / r;
  return f;
}

Mat62 analytic_param_jacobian(const Vec6& x, const VehicleModel& vehicle,
                              const PlanetModel& planet) {
  const double r = x(0), v = x(1);
  const UncertainParams c0;
  const AeroAccels aero = aero_accels(r, v, c0, vehicle, planet);
  Mat62 f = Mat62::Zero();
  f(1, 0) = -aero.drag;
  f(2, 0) = aero.lift / v;
  f(2, 1) = aero.lift / v;  // dL/dc2 = D * LD0 = L at c = 0
  return f;
}

double scaled_jacobian_error(const Eigen::MatrixXd& test,
                             const Eigen::MatrixXd& reference,
                             const Eigen::VectorXd& row_scale,
                             const Eigen::VectorXd& col_scale) {
  Eigen::MatrixXd diff = test - reference;
  Eigen::MatrixXd ref = reference;
  for (int i = 0; i < diff.rows(); ++i) {
    for (int j = 0; j < diff.cols(); ++j) {
      const double w = col_scale(j) / row_scale(i);
      diff(i, j) *= w;
      ref(i, j) *= w;
    }
  }
  return diff.norm() / std::max(ref.norm(), 1e-300);
}

std::vector<CheckResult> run_property_suite(std::uint64_t seed) {
  const ScenarioConfig cfg = default_scenario();
  RunRng rng(seed);
  std::vector<CheckResult> results;
  results.push_back(check_gain_w0_reduction(rng));
  results.push_back(check_gain_oracle_equivalence(rng));
  results.push_back(check_gain_stationarity(rng));
  results.push_back(check_gradient_matches_fd(rng));
  results.push_back(check_cost_minimum(rng));
  results.push_back(check_joseph_psd(rng));
  results.push_back(check_insensitive_limit(rng));
  results.push_back(check_dynamics_jacobian_analytic(rng, cfg));
  results.push_back(check_discrete_jacobian_tangent_linear(rng, cfg));
  results.push_back(check_rk4_convergence(cfg));
  results.push_back(check_energy_conservation(cfg));
  results.push_back(check_atmosphere_identities(cfg));
  results.push_back(check_measurement_jacobians(rng, cfg));
  results.push_back(check_error_contracts(cfg));
  results.push_back(check_sampling_statistics(cfg));
  results.push_back(check_perturbation_identity(cfg));
  results.push_back(check_zero_noise_pipeline(cfg));
  results.push_back(check_campaign_determinism(cfg));
  return results;
}

bool all_passed(const std::vector<CheckResult>& results) {
  return std::all_of(results.begin(), results.end(),
                     [](const CheckResult& r) { return r.passed; });
}

}  // namespace entrynav
