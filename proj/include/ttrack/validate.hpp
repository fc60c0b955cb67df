#pragma once

#include <cmath>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "ttrack/dynamics.hpp"
#include "ttrack/model.hpp"
#include "ttrack/simulator.hpp"

namespace ttrack {

/// Deterministic uniform draws from raw mt19937_64 bits. The standard
/// distributions are implementation-defined, so they are avoided here to keep
/// check results identical across toolchains.
struct Rng {
  std::mt19937_64 gen;

  explicit Rng(std::uint64_t seed) : gen(seed) {}
  double unit() { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }
  VectorXd vector(int n, double lo, double hi) {
    VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = uniform(lo, hi);
    return v;
  }
};

namespace oracle {

/// Forward kinematics only: COM position and absolute angle of each link.
/// Kept deliberately free of any Jacobian machinery; every oracle below is
/// built on positions so it cannot share a code path with the dynamics.
struct ComState {
  double x, y, phi;
};

inline std::vector<ComState> com_states(const MechanismModel& model,
                                        const VectorXd& q) {
  std::vector<ComState> out(model.links.size());
  double phi = 0.0, jx = 0.0, jy = 0.0;
  for (int j = 0; j < model.n(); ++j) {
    phi += q[j];
    const LinkParams& lk = model.links[j];
    out[j] = {jx + lk.com_distance * std::sin(phi),
              jy - lk.com_distance * std::cos(phi), phi};
    jx += lk.length * std::sin(phi);
    jy -= lk.length * std::cos(phi);
  }
  return out;
}

/// Kinetic energy from differenced COM positions along the motion direction.
inline double kinetic_energy_fk(const MechanismModel& model, const VectorXd& q,
                                const VectorXd& qdot, double step = 3e-5) {
  const std::vector<ComState> fwd = com_states(model, q + step * qdot);
  const std::vector<ComState> bwd = com_states(model, q - step * qdot);
  double T = 0.0;
  double phidot = 0.0;
  for (int j = 0; j < model.n(); ++j) {
    const double vx = (fwd[j].x - bwd[j].x) / (2.0 * step);
    const double vy = (fwd[j].y - bwd[j].y) / (2.0 * step);
    phidot += qdot[j];
    T += 0.5 * model.links[j].mass * (vx * vx + vy * vy) +
         0.5 * model.links[j].inertia_com * phidot * phidot;
  }
  return T;
}

/// Potential energy from COM heights, zeroed at the hanging configuration.
inline double potential_energy_fk(const MechanismModel& model,
                                  const VectorXd& q) {
  const std::vector<ComState> coms = com_states(model, q);
  double V = 0.0, depth = 0.0;
  for (int j = 0; j < model.n(); ++j) {
    depth += model.links[j].com_distance;
    V += model.links[j].mass * model.gravity * (coms[j].y + depth);
    depth += model.links[j].length - model.links[j].com_distance;
  }
  return V;
}

/// Mass matrix as the Hessian of kinetic energy in qdot, by a four-point
/// second difference about qdot = 0. The quadratic form makes the formula
/// exact up to the position-differencing error.
inline MatrixXd mass_matrix_hessian(const MechanismModel& model,
                                    const VectorXd& q, double step = 0.2) {
  const int n = model.n();
  MatrixXd M(n, n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k <= i; ++k) {
      VectorXd v = VectorXd::Zero(n);
      v[i] += step;
      v[k] += step;
      const double fpp = kinetic_energy_fk(model, q, v);
      v[k] -= 2.0 * step;
      const double fpm = kinetic_energy_fk(model, q, v);
      v[i] -= 2.0 * step;
      const double fmm = kinetic_energy_fk(model, q, v);
      v[k] += 2.0 * step;
      const double fmp = kinetic_energy_fk(model, q, v);
      M(i, k) = (fpp - fpm - fmp + fmm) / (4.0 * step * step);
      M(k, i) = M(i, k);
    }
  }
  return M;
}

inline VectorXd gravity_gradient(const MechanismModel& model, const VectorXd& q,
                                 double step = 1e-5) {
  const int n = model.n();
  VectorXd G(n);
  VectorXd qp = q;
  for (int k = 0; k < n; ++k) {
    qp[k] = q[k] + step;
    const double vp = potential_energy_fk(model, qp);
    qp[k] = q[k] - step;
    const double vm = potential_energy_fk(model, qp);
    qp[k] = q[k];
    G[k] = (vp - vm) / (2.0 * step);
  }
  return G;
}

/// Mdot by central differences of the mass matrix along qdot.
inline MatrixXd mass_matrix_rate(const MechanismModel& model, const VectorXd& q,
                                 const VectorXd& qdot, double step = 1e-6) {
  const MatrixXd fwd = mass_matrix(model, q + step * qdot);
  const MatrixXd bwd = mass_matrix(model, q - step * qdot);
  return (fwd - bwd) / (2.0 * step);
}

}  // namespace oracle

struct CheckResult {
  std::string name;
  bool passed = false;
  double worst = 0.0;  // worst observed value of the checked quantity
  double bound = 0.0;  // the bound it must stay under
};

struct ValidationReport {
  std::string model_name;
  std::vector<CheckResult> checks;

  bool all_passed() const {
    for (const CheckResult& c : checks)
      if (!c.passed) return false;
    return true;
  }
};

/// Dynamics oracle suite over random states.
///
/// Checks, per model: mass-matrix symmetry and positive definiteness, the
/// kinetic-energy Hessian oracle, the potential-gradient oracle, Christoffel
/// skew-symmetry of Mdot - 2C, the inverse/forward round trip, and (on a
/// passive run) either energy conservation with fourth-order step scaling or
/// plain dissipation when the model is damped.
inline ValidationReport run_validation_suite(const MechanismModel& model,
                                             const std::string& name,
                                             int n_states = 1000,
                                             std::uint64_t seed = 20240131) {
  validate_model(model);
  const int n = model.n();
  Rng rng(seed);
  ValidationReport report;
  report.model_name = name;

  double sym_worst = 0.0, hess_worst = 0.0, grad_worst = 0.0;
  double skew_worst = 0.0, round_worst = 0.0;
  bool spd_ok = true;

  for (int s = 0; s < n_states; ++s) {
    const VectorXd q = rng.vector(n, -M_PI, M_PI);
    const VectorXd qdot = rng.vector(n, -3.0, 3.0);
    const VectorXd x = rng.vector(n, -1.0, 1.0);
    const JointState state{q, qdot};

    const MatrixXd M = mass_matrix(model, q);
    const double scale = M.cwiseAbs().maxCoeff();
    sym_worst = std::max(sym_worst,
                         (M - M.transpose()).cwiseAbs().maxCoeff() / scale);
    if (Eigen::LLT<MatrixXd>(M).info() != Eigen::Success) spd_ok = false;

    const MatrixXd M_oracle = oracle::mass_matrix_hessian(model, q);
    hess_worst =
        std::max(hess_worst, (M - M_oracle).cwiseAbs().maxCoeff() / scale);

    const VectorXd G = gravity_vector(model, q);
    grad_worst = std::max(
        grad_worst,
        (G - oracle::gravity_gradient(model, q)).cwiseAbs().maxCoeff());

    const MatrixXd Mdot = oracle::mass_matrix_rate(model, q, qdot);
    const MatrixXd C = coriolis_matrix(model, q, qdot);
    const double qn = qdot.norm();
    if (qn > 1e-12) {
      const double val = std::abs(x.dot((Mdot - 2.0 * C) * x)) /
                         (x.squaredNorm() * qn);
      skew_worst = std::max(skew_worst, val);
    }

    const VectorXd a = rng.vector(n, -5.0, 5.0);
    const VectorXd back =
        forward_dynamics(model, state, inverse_dynamics(model, state, a));
    round_worst = std::max(round_worst, (back - a).cwiseAbs().maxCoeff());
  }

  report.checks.push_back({"mass_matrix_symmetry", sym_worst <= 1e-12,
                           sym_worst, 1e-12});
  report.checks.push_back(
      {"mass_matrix_positive_definite", spd_ok, spd_ok ? 0.0 : 1.0, 0.0});
  report.checks.push_back({"mass_matrix_vs_kinetic_hessian",
                           hess_worst <= 1e-6, hess_worst, 1e-6});
  report.checks.push_back(
      {"gravity_vs_potential_gradient", grad_worst <= 1e-8, grad_worst, 1e-8});
  report.checks.push_back(
      {"coriolis_skew_symmetry", skew_worst <= 1e-6, skew_worst, 1e-6});
  report.checks.push_back({"inverse_forward_round_trip", round_worst <= 1e-10,
                           round_worst, 1e-10});

  bool damped = false;
  for (const LinkParams& lk : model.links) damped = damped || lk.damping > 0.0;

  JointState rest{rng.vector(n, -2.0, 2.0), VectorXd::Zero(n)};
  if (!damped) {
    const double t_end = 5.0;
    const Trace tr1 = simulate_passive(model, rest, t_end, 2e-4).trace;
    const Trace tr2 = simulate_passive(model, rest, t_end, 1e-4).trace;
    double d1 = 0.0, d2 = 0.0;
    for (int i = 0; i < tr1.samples(); ++i)
      d1 = std::max(d1, std::abs(tr1.energy[i] - tr1.energy[0]));
    for (int i = 0; i < tr2.samples(); ++i)
      d2 = std::max(d2, std::abs(tr2.energy[i] - tr2.energy[0]));
    const double escale = std::max(1.0, std::abs(tr1.energy[0]));
    const bool small = d2 <= 1e-6 * escale;
    // fourth-order scaling, unless both drifts sit at the rounding floor
    const double ratio = d2 > 0.0 ? d1 / d2 : 16.0;
    const bool order_ok =
        (ratio >= 8.0 && ratio <= 32.0) || d1 <= 1e-11 * escale;
    report.checks.push_back(
        {"energy_conservation", small, d2, 1e-6 * escale});
    report.checks.push_back({"energy_drift_h4_scaling", order_ok, ratio, 16.0});
  } else {
    const Trace tr = simulate_passive(model, rest, 5.0, 1e-4).trace;
    double rise = 0.0;
    for (int i = 1; i < tr.samples(); ++i)
      rise = std::max(rise, tr.energy[i] - tr.energy[i - 1]);
    const double slack = 1e-9 * std::max(1.0, std::abs(tr.energy[0]));
    report.checks.push_back(
        {"energy_dissipation", rise <= slack, rise, slack});
  }
  return report;
}

/// Unit-parameter 1-, 2- and 3-link chains used by default.
inline std::vector<std::pair<std::string, MechanismModel>>
default_validation_models() {
  const auto link = [] {
    LinkParams lk;
    lk.mass = 1.0;
    lk.length = 1.0;
    lk.com_distance = 0.5;
    lk.inertia_com = 1.0 / 12.0;
    lk.damping = 0.0;
    return lk;
  }();
  std::vector<std::pair<std::string, MechanismModel>> out;
  for (int n = 1; n <= 3; ++n) {
    MechanismModel m;
    m.gravity = 9.81;
    m.links.assign(static_cast<std::size_t>(n), link);
    out.emplace_back(std::to_string(n) + "-link", m);
  }
  return out;
}

}  // namespace ttrack
