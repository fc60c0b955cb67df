#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "ttrack/dynamics.hpp"
#include "ttrack/errors.hpp"
#include "ttrack/model.hpp"
#include "ttrack/trajectory.hpp"

namespace ttrack {

/// Per-joint critically damped PD gains derived from settling times:
///   omega0_i = P / ts_i,  kp_i = omega0_i^2,  kv_i = 2 omega0_i,
/// where P is the settling constant (the positive root of
/// (1 + P) e^-P = 0.02). Kp, Kv are understood as diagonal matrices.
struct GainSchedule {
  VectorXd ts;
  VectorXd omega0;
  VectorXd kp;
  VectorXd kv;

  int n() const { return static_cast<int>(ts.size()); }
};

/// The controller's gains together with the model it believes in. The
/// believed model may differ from the plant; that difference is the
/// model-mismatch experiment, never an accident.
struct ControllerConfig {
  GainSchedule gains;
  MechanismModel control_model;
};

/// Root of (1 + P) e^-P = 0.02 on (0, inf): bisection bracket on [1, 20]
/// followed by Newton polishing. The residual ends below 1e-12.
inline double solve_settling_constant() {
  const auto f = [](double p) { return (1.0 + p) * std::exp(-p) - 0.02; };
  double lo = 1.0, hi = 20.0;  // f(1) > 0 > f(20), f strictly decreasing
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? lo : hi) = mid;
  }
  double p = 0.5 * (lo + hi);
  for (int i = 0; i < 8; ++i) {
    const double deriv = -p * std::exp(-p);
    p -= f(p) / deriv;
  }
  return p;
}

/// Solved once per process; the literature rounding 5.8339 is never used in
/// computation, only asserted in tests.
inline double settling_constant() {
  static const double value = solve_settling_constant();
  return value;
}

/// Gains for the requested per-joint settling times.
inline GainSchedule tune_gains(const VectorXd& ts) {
  detail::require(ts.size() >= 1, "ts must have at least one entry");
  detail::require(ts.allFinite() && (ts.array() > 0.0).all(),
                  "settling times must be finite and > 0");
  GainSchedule g;
  g.ts = ts;
  g.omega0 = settling_constant() / ts.array();
  g.kp = g.omega0.array().square();
  g.kv = 2.0 * g.omega0.array();
  return g;
}

/// Accepts explicit diagonal gains, provided they are exactly critically
/// damped (kp = (kv/2)^2 per joint); anything else is rejected.
inline GainSchedule gains_from_kp_kv(const VectorXd& kp, const VectorXd& kv) {
  detail::require(kp.size() == kv.size() && kp.size() >= 1,
                  "kp and kv must have equal, nonzero dimension");
  detail::require(kp.allFinite() && kv.allFinite() &&
                      (kp.array() > 0.0).all() && (kv.array() > 0.0).all(),
                  "gains must be finite and > 0");
  for (int i = 0; i < kp.size(); ++i) {
    const double want = 0.25 * kv[i] * kv[i];
    if (std::abs(kp[i] - want) > 1e-9 * std::max(1.0, want)) {
      throw InputError("gains are not critically damped: kp[" +
                       std::to_string(i) + "] must equal (kv/2)^2");
    }
  }
  GainSchedule g;
  g.kp = kp;
  g.kv = kv;
  g.omega0 = 0.5 * kv.array();
  g.ts = settling_constant() / g.omega0.array();
  return g;
}

/// Commanded acceleration
///   v = qddot_d - Kp (q - q_d) - Kv (qdot - qdot_d);
/// gains are diagonal, so joint i depends only on joint i quantities.
inline VectorXd commanded_acceleration(const GainSchedule& gains,
                                       const JointState& state,
                                       const TrajectorySample& desired) {
  const int n = gains.n();
  detail::require_dim(state.q, n, "state.q");
  detail::require_dim(state.qdot, n, "state.qdot");
  detail::require_dim(desired.q_d, n, "desired.q_d");
  detail::require_dim(desired.qdot_d, n, "desired.qdot_d");
  detail::require_dim(desired.qddot_d, n, "desired.qddot_d");
  return desired.qddot_d.array() -
         gains.kp.array() * (state.q - desired.q_d).array() -
         gains.kv.array() * (state.qdot - desired.qdot_d).array();
}

/// Computed-torque law: the believed model's inverse dynamics evaluated at
/// the commanded acceleration,
///   u = M v + C qdot + G - u_f.
/// Only q and qdot are fed back; everything else comes from the model.
inline VectorXd computed_torque(const ControllerConfig& cfg,
                                const JointState& state,
                                const TrajectorySample& desired) {
  detail::require(cfg.control_model.n() == cfg.gains.n(),
                  "controller model and gains disagree on joint count");
  const VectorXd v = commanded_acceleration(cfg.gains, state, desired);
  return inverse_dynamics(cfg.control_model, state, v);
}

/// Model-free PD baseline: u = -Kp (q - q_d) - Kv (qdot - qdot_d).
inline VectorXd pd_torque(const GainSchedule& gains, const JointState& state,
                          const TrajectorySample& desired) {
  const int n = gains.n();
  detail::require_dim(state.q, n, "state.q");
  detail::require_dim(state.qdot, n, "state.qdot");
  detail::require_dim(desired.q_d, n, "desired.q_d");
  detail::require_dim(desired.qdot_d, n, "desired.qdot_d");
  return -(gains.kp.array() * (state.q - desired.q_d).array()) -
         gains.kv.array() * (state.qdot - desired.qdot_d).array();
}

}  // namespace ttrack
