#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "ttrack/controller.hpp"
#include "ttrack/dynamics.hpp"
#include "ttrack/errors.hpp"
#include "ttrack/model.hpp"
#include "ttrack/trajectory.hpp"

namespace ttrack {

/// Additive external torque pulse on one plant joint.
struct PulseSpec {
  int joint = 0;
  double t_start = 0.0;
  double duration = 0.0;
  double magnitude = 0.0;  // N m
};

/// Multiplicative scaling of the controller's believed link masses.
/// The plant itself is never scaled.
struct ModelScaling {
  VectorXd mass_scale;
};

struct SimulationConfig {
  double t_end = 1.0;
  double h = 1e-4;              // integrator step
  double control_period = 1e-3; // integer multiple of h
  JointState initial_state;
  std::optional<VectorXd> torque_limit;  // symmetric elementwise clamp
  std::vector<PulseSpec> perturbations;
  std::optional<ModelScaling> mismatch;
};

/// Uniformly sampled closed-loop record, one row per integrator step.
/// eps = q - q_d row by row; u is the applied (possibly clamped) torque and
/// u_raw the torque the control law asked for.
struct Trace {
  VectorXd t;
  MatrixXd q, qdot, qddot;
  MatrixXd q_des, qdot_des, qddot_des;
  MatrixXd eps, epsdot;
  MatrixXd u, u_raw;
  VectorXd energy;

  int joints() const { return static_cast<int>(q.cols()); }
  int samples() const { return static_cast<int>(t.size()); }

  std::vector<double> eps_series(int joint) const {
    std::vector<double> out(samples());
    for (int i = 0; i < samples(); ++i) out[i] = eps(i, joint);
    return out;
  }
};

struct SimulationResult {
  Trace trace;
  bool diverged = false;
  double failure_time = std::numeric_limits<double>::quiet_NaN();
};

/// One classical RK4 step of xdot = (qdot, accel(x, u + w)) with the inputs
/// held constant across the step.
template <class AccelFn>
JointState rk4_step(AccelFn&& accel, const JointState& state,
                    const VectorXd& u_held, const VectorXd& w, double h) {
  detail::require(std::isfinite(h) && h > 0.0, "h must be > 0");
  const VectorXd utot = u_held + w;
  const VectorXd k1v = accel(state, utot);
  const VectorXd& k1q = state.qdot;

  JointState s2{state.q + 0.5 * h * k1q, state.qdot + 0.5 * h * k1v};
  const VectorXd k2v = accel(s2, utot);
  const VectorXd& k2q = s2.qdot;

  JointState s3{state.q + 0.5 * h * k2q, state.qdot + 0.5 * h * k2v};
  const VectorXd k3v = accel(s3, utot);
  const VectorXd& k3q = s3.qdot;

  JointState s4{state.q + h * k3q, state.qdot + h * k3v};
  const VectorXd k4v = accel(s4, utot);
  const VectorXd& k4q = s4.qdot;

  return JointState{
      state.q + (h / 6.0) * (k1q + 2.0 * k2q + 2.0 * k3q + k4q),
      state.qdot + (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)};
}

inline MechanismModel apply_mass_scaling(const MechanismModel& model,
                                         const ModelScaling& scaling) {
  detail::require_dim(scaling.mass_scale, model.n(), "mass_scale");
  detail::require((scaling.mass_scale.array() > 0.0).all(),
                  "mass_scale factors must be > 0");
  MechanismModel scaled = model;
  for (int i = 0; i < model.n(); ++i) {
    scaled.links[i].mass *= scaling.mass_scale[i];
    scaled.links[i].inertia_com *= scaling.mass_scale[i];
  }
  return scaled;
}

inline void validate_sim_config(const SimulationConfig& sim, int n) {
  detail::require(std::isfinite(sim.h) && sim.h > 0.0, "sim.h must be > 0");
  detail::require(std::isfinite(sim.control_period) &&
                      sim.control_period >= sim.h,
                  "sim.control_period must be >= h");
  detail::require(std::isfinite(sim.t_end) && sim.t_end >= sim.control_period,
                  "sim.t_end must be >= control_period");
  const double ratio = sim.control_period / sim.h;
  const double rounded = std::round(ratio);
  detail::require(std::abs(ratio - rounded) <= 1e-9 * rounded,
                  "sim.control_period must be an integer multiple of h");
  detail::require_dim(sim.initial_state.q, n, "sim.initial_state.q");
  detail::require_dim(sim.initial_state.qdot, n, "sim.initial_state.qdot");
  if (sim.torque_limit) {
    detail::require_dim(*sim.torque_limit, n, "sim.torque_limit");
    detail::require((sim.torque_limit->array() > 0.0).all(),
                    "sim.torque_limit entries must be > 0");
  }
  for (std::size_t i = 0; i < sim.perturbations.size(); ++i) {
    const PulseSpec& p = sim.perturbations[i];
    const std::string at = "sim.perturbations[" + std::to_string(i) + "].";
    detail::require(p.joint >= 0 && p.joint < n, at + "joint out of range");
    detail::require(std::isfinite(p.t_start) && p.t_start >= 0.0,
                    at + "t_start must be >= 0");
    detail::require(std::isfinite(p.duration) && p.duration > 0.0,
                    at + "duration must be > 0");
    detail::require(std::isfinite(p.magnitude), at + "magnitude must be finite");
  }
  if (sim.mismatch) {
    detail::require_dim(sim.mismatch->mass_scale, n, "sim.mismatch.mass_scale");
    detail::require((sim.mismatch->mass_scale.array() > 0.0).all(),
                    "sim.mismatch.mass_scale factors must be > 0");
  }
}

namespace detail {

inline VectorXd pulse_torque(const std::vector<PulseSpec>& pulses, double t,
                             int n) {
  VectorXd w = VectorXd::Zero(n);
  for (const PulseSpec& p : pulses) {
    if (t >= p.t_start && t < p.t_start + p.duration) w[p.joint] += p.magnitude;
  }
  return w;
}

inline Trace allocate_trace(int rows, int n) {
  Trace tr;
  tr.t.resize(rows);
  tr.q.resize(rows, n);
  tr.qdot.resize(rows, n);
  tr.qddot.resize(rows, n);
  tr.q_des.resize(rows, n);
  tr.qdot_des.resize(rows, n);
  tr.qddot_des.resize(rows, n);
  tr.eps.resize(rows, n);
  tr.epsdot.resize(rows, n);
  tr.u.resize(rows, n);
  tr.u_raw.resize(rows, n);
  tr.energy.resize(rows);
  return tr;
}

inline void shrink_trace(Trace& tr, int rows) {
  tr.t.conservativeResize(rows);
  tr.q.conservativeResize(rows, Eigen::NoChange);
  tr.qdot.conservativeResize(rows, Eigen::NoChange);
  tr.qddot.conservativeResize(rows, Eigen::NoChange);
  tr.q_des.conservativeResize(rows, Eigen::NoChange);
  tr.qdot_des.conservativeResize(rows, Eigen::NoChange);
  tr.qddot_des.conservativeResize(rows, Eigen::NoChange);
  tr.eps.conservativeResize(rows, Eigen::NoChange);
  tr.epsdot.conservativeResize(rows, Eigen::NoChange);
  tr.u.conservativeResize(rows, Eigen::NoChange);
  tr.u_raw.conservativeResize(rows, Eigen::NoChange);
  tr.energy.conservativeResize(rows);
}

}  // namespace detail

/// Integrates the closed loop: the plant under the computed-torque law with
/// zero-order-hold control. Torque is recomputed from the sampled state every
/// control_period, clamped elementwise to +-torque_limit when configured,
/// and held while the plant integrates at step h. Perturbation pulses act on
/// the plant only. On numerical blow-up the partial trace up to the failure
/// is returned with diverged set and the failure time recorded.
inline SimulationResult simulate(const MechanismModel& plant,
                                 const ControllerConfig& controller,
                                 const TrajectorySpec& traj,
                                 const SimulationConfig& sim) {
  validate_model(plant);
  validate_model(controller.control_model);
  const int n = plant.n();
  detail::require(controller.gains.n() == n,
                  "gains dimension does not match the plant");
  detail::require(controller.control_model.n() == n,
                  "controller model does not match the plant joint count");
  detail::require(trajectory_dim(traj) == n,
                  "trajectory dimension does not match the plant");
  validate_trajectory(traj);
  validate_sim_config(sim, n);

  // The believed model must be exactly the plant with the configured
  // mismatch applied (or the plant itself when no mismatch is configured).
  const MechanismModel expected_model =
      sim.mismatch ? apply_mass_scaling(plant, *sim.mismatch) : plant;
  for (int i = 0; i < n; ++i) {
    const auto& got = controller.control_model.links[i];
    const auto& want = expected_model.links[i];
    const bool same =
        std::abs(got.mass - want.mass) <= 1e-12 * want.mass &&
        got.length == want.length && got.com_distance == want.com_distance &&
        std::abs(got.inertia_com - want.inertia_com) <=
            1e-12 * std::max(1.0, want.inertia_com) &&
        got.damping == want.damping;
    detail::require(same,
                    "controller model is not the plant with sim.mismatch "
                    "applied (link " + std::to_string(i) + ")");
  }

  const long long steps = std::llround(sim.t_end / sim.h);
  detail::require(steps >= 1, "t_end shorter than one step");
  const long long hold = std::llround(sim.control_period / sim.h);

  Trace tr = detail::allocate_trace(static_cast<int>(steps) + 1, n);
  JointState state = sim.initial_state;
  VectorXd u = VectorXd::Zero(n);
  VectorXd u_raw = VectorXd::Zero(n);

  const auto accel = [&plant](const JointState& s, const VectorXd& utot) {
    return forward_dynamics(plant, s, utot);
  };

  SimulationResult result;
  const auto diverge = [&](double t, long long rows) {
    detail::shrink_trace(tr, static_cast<int>(rows));
    result.diverged = true;
    result.failure_time = t;
  };
  for (long long i = 0; i <= steps; ++i) {
    const double t = static_cast<double>(i) * sim.h;
    if (!state.q.allFinite() || !state.qdot.allFinite()) {
      diverge(t, i);
      break;
    }
    const TrajectorySample desired = evaluate(traj, t);
    if (i % hold == 0) {
      // the law spelled out so an overflow shows up as divergence, not as a
      // rejected argument somewhere inside the torque computation
      const VectorXd v =
          commanded_acceleration(controller.gains, state, desired);
      if (!v.allFinite()) {
        diverge(t, i);
        break;
      }
      u_raw = inverse_dynamics(controller.control_model, state, v);
      if (!u_raw.allFinite()) {
        diverge(t, i);
        break;
      }
      u = u_raw;
      if (sim.torque_limit) {
        u = u.cwiseMin(*sim.torque_limit).cwiseMax(-*sim.torque_limit);
      }
    }
    const VectorXd w = detail::pulse_torque(sim.perturbations, t, n);
    const VectorXd qddot = forward_dynamics(plant, state, u + w);
    if (!qddot.allFinite()) {
      diverge(t, i);
      break;
    }

    const int row = static_cast<int>(i);
    tr.t[row] = t;
    tr.q.row(row) = state.q;
    tr.qdot.row(row) = state.qdot;
    tr.qddot.row(row) = qddot;
    tr.q_des.row(row) = desired.q_d;
    tr.qdot_des.row(row) = desired.qdot_d;
    tr.qddot_des.row(row) = desired.qddot_d;
    tr.eps.row(row) = state.q - desired.q_d;
    tr.epsdot.row(row) = state.qdot - desired.qdot_d;
    tr.u.row(row) = u;
    tr.u_raw.row(row) = u_raw;
    tr.energy[row] = total_energy(plant, state);

    if (i < steps) state = rk4_step(accel, state, u, w, sim.h);
  }
  result.trace = std::move(tr);
  return result;
}

/// Zero-torque run of the bare plant; the reference is held at the initial
/// configuration so eps records the excursion from it.
inline SimulationResult simulate_passive(const MechanismModel& model,
                                         const JointState& initial,
                                         double t_end, double h) {
  validate_model(model);
  validate_state(model, initial);
  detail::require(std::isfinite(h) && h > 0.0, "h must be > 0");
  detail::require(std::isfinite(t_end) && t_end >= h, "t_end must be >= h");
  const int n = model.n();
  const long long steps = std::llround(t_end / h);

  Trace tr = detail::allocate_trace(static_cast<int>(steps) + 1, n);
  JointState state = initial;
  const VectorXd zero = VectorXd::Zero(n);
  const auto accel = [&model](const JointState& s, const VectorXd& utot) {
    return forward_dynamics(model, s, utot);
  };

  SimulationResult result;
  for (long long i = 0; i <= steps; ++i) {
    const double t = static_cast<double>(i) * h;
    const VectorXd qddot =
        (state.q.allFinite() && state.qdot.allFinite())
            ? forward_dynamics(model, state, zero)
            : VectorXd::Constant(n, std::numeric_limits<double>::quiet_NaN());
    if (!qddot.allFinite()) {
      detail::shrink_trace(tr, static_cast<int>(i));
      result.diverged = true;
      result.failure_time = t;
      break;
    }
    const int row = static_cast<int>(i);
    tr.t[row] = t;
    tr.q.row(row) = state.q;
    tr.qdot.row(row) = state.qdot;
    tr.qddot.row(row) = qddot;
    tr.q_des.row(row) = initial.q;
    tr.qdot_des.row(row).setZero();
    tr.qddot_des.row(row).setZero();
    tr.eps.row(row) = state.q - initial.q;
    tr.epsdot.row(row) = state.qdot;
    tr.u.row(row).setZero();
    tr.u_raw.row(row).setZero();
    tr.energy[row] = total_energy(model, state);
    if (i < steps) state = rk4_step(accel, state, zero, zero, h);
  }
  result.trace = std::move(tr);
  return result;
}

}  // namespace ttrack
