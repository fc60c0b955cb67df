#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ttrack/errors.hpp"

namespace ttrack {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// One rigid link of a planar serial chain.
///
/// The link is a rigid body hinged at its proximal joint. `length` is the
/// joint-to-joint distance, `com_distance` the distance from the joint to the
/// center of mass along the link axis, `inertia_com` the rotational inertia
/// about the out-of-plane axis through the COM, and `damping` the viscous
/// friction coefficient of the joint.
struct LinkParams {
  double mass = 1.0;         // kg
  double length = 1.0;       // m
  double com_distance = 0.5; // m, in [0, length]
  double inertia_com = 0.0;  // kg m^2
  double damping = 0.0;      // N m s / rad
};

/// Planar serial chain with revolute joints, gravity along -y of the base
/// frame. Joint angles are measured from the downward vertical, positive
/// counterclockwise, so q = 0 is the chain hanging straight down. Angles are
/// unwrapped reals; no modular reduction is ever applied.
struct MechanismModel {
  std::vector<LinkParams> links;
  double gravity = 9.81;  // m/s^2, magnitude, acting in -y

  int n() const { return static_cast<int>(links.size()); }
};

/// Joint configuration and velocity at one instant.
struct JointState {
  VectorXd q;
  VectorXd qdot;
};

namespace detail {

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw InputError(msg);
}

inline bool all_finite(const VectorXd& v) { return v.allFinite(); }

inline void require_dim(const VectorXd& v, int n, const char* name) {
  if (v.size() != n) {
    throw InputError(std::string(name) + " has dimension " +
                     std::to_string(v.size()) + ", expected " +
                     std::to_string(n));
  }
  if (!v.allFinite()) {
    throw InputError(std::string(name) + " contains a non-finite entry");
  }
}

}  // namespace detail

/// Checks the model invariants; throws InputError naming the offending field.
inline void validate_model(const MechanismModel& model) {
  detail::require(!model.links.empty(), "model must have at least one link");
  detail::require(std::isfinite(model.gravity) && model.gravity >= 0.0,
                  "model.gravity must be finite and >= 0");
  for (std::size_t i = 0; i < model.links.size(); ++i) {
    const LinkParams& lk = model.links[i];
    const std::string at = "links[" + std::to_string(i) + "].";
    detail::require(std::isfinite(lk.mass) && lk.mass > 0.0,
                    at + "mass must be > 0");
    detail::require(std::isfinite(lk.length) && lk.length > 0.0,
                    at + "length must be > 0");
    detail::require(std::isfinite(lk.com_distance) && lk.com_distance >= 0.0 &&
                        lk.com_distance <= lk.length,
                    at + "com_distance must lie in [0, length]");
    detail::require(std::isfinite(lk.inertia_com) && lk.inertia_com >= 0.0,
                    at + "inertia_com must be >= 0");
    detail::require(std::isfinite(lk.damping) && lk.damping >= 0.0,
                    at + "damping must be >= 0");
  }
}

inline void validate_state(const MechanismModel& model, const JointState& s) {
  detail::require_dim(s.q, model.n(), "state.q");
  detail::require_dim(s.qdot, model.n(), "state.qdot");
}

}  // namespace ttrack
