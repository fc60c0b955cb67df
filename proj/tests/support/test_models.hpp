#pragma once

#include "ttrack/controller.hpp"
#include "ttrack/model.hpp"
#include "ttrack/simulator.hpp"
#include "ttrack/trajectory.hpp"

namespace tt_test {

using namespace ttrack;

/// Point mass at the end of a massless rod: M = m lc^2.
inline MechanismModel point_pendulum(double mass = 1.0, double lc = 1.0,
                                     double damping = 0.0) {
  MechanismModel m;
  m.gravity = 9.81;
  m.links.push_back({mass, lc, lc, 0.0, damping});
  return m;
}

/// Uniform rod pendulum, COM at mid-length.
inline MechanismModel rod_pendulum(double mass = 1.0, double length = 1.0,
                                   double damping = 0.0) {
  MechanismModel m;
  m.gravity = 9.81;
  m.links.push_back({mass, length, 0.5 * length,
                     mass * length * length / 12.0, damping});
  return m;
}

inline MechanismModel chain(int n, double link_mass = 1.0) {
  MechanismModel m;
  m.gravity = 9.81;
  for (int i = 0; i < n; ++i) {
    m.links.push_back({link_mass, 1.0, 0.5, link_mass / 12.0, 0.0});
  }
  return m;
}

inline JointState rest(const VectorXd& q) {
  return JointState{q, VectorXd::Zero(q.size())};
}

inline JointState rest1(double q) {
  return rest(VectorXd::Constant(1, q));
}

inline TrajectorySpec hold_at(const VectorXd& q) { return HoldSpec{q}; }

inline TrajectorySpec step_to(double target, int n = 1) {
  return StepSequenceSpec{VectorXd::Constant(n, target), {}};
}

inline SimulationConfig sim_config(double t_end, double h, double ctrl,
                                   const JointState& init) {
  SimulationConfig sim;
  sim.t_end = t_end;
  sim.h = h;
  sim.control_period = ctrl;
  sim.initial_state = init;
  return sim;
}

inline ControllerConfig exact_controller(const MechanismModel& plant,
                                         const VectorXd& ts) {
  return ControllerConfig{tune_gains(ts), plant};
}

}  // namespace tt_test
