#pragma once

#include <cmath>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "ttrack/errors.hpp"
#include "ttrack/model.hpp"

namespace ttrack {

/// Desired position, velocity and acceleration at time t.
struct TrajectorySample {
  double t = 0.0;
  VectorXd q_d;
  VectorXd qdot_d;
  VectorXd qddot_d;
};

/// Constant reference, zero derivatives.
struct HoldSpec {
  VectorXd at;
};

/// Piecewise-constant reference. Derivatives are zero everywhere, including
/// at the switch instants; the position jump at a switch turns tracking into
/// a fresh regulation problem.
struct StepSequenceSpec {
  VectorXd start;
  std::vector<std::pair<double, VectorXd>> switches;  // (time, target)
};

/// Rest-to-rest quintic q_d(s) = q0 + (qf - q0)(10 s^3 - 15 s^4 + 6 s^5),
/// s = t / duration clamped to [0, 1]; endpoints are held outside the window.
struct QuinticSpec {
  VectorXd from;
  VectorXd to;
  double duration = 1.0;
};

/// q_d = offset + amplitude * sin(2 pi f t), per joint, f in Hz.
struct SinusoidSpec {
  VectorXd offset;
  VectorXd amplitude;
  VectorXd frequency;
};

using TrajectorySpec =
    std::variant<HoldSpec, StepSequenceSpec, QuinticSpec, SinusoidSpec>;

inline int trajectory_dim(const TrajectorySpec& spec) {
  return std::visit(
      [](const auto& s) -> int {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, HoldSpec>)
          return static_cast<int>(s.at.size());
        else if constexpr (std::is_same_v<T, StepSequenceSpec>)
          return static_cast<int>(s.start.size());
        else if constexpr (std::is_same_v<T, QuinticSpec>)
          return static_cast<int>(s.from.size());
        else
          return static_cast<int>(s.offset.size());
      },
      spec);
}

inline void validate_trajectory(const TrajectorySpec& spec) {
  const int n = trajectory_dim(spec);
  detail::require(n >= 1, "trajectory must have at least one joint");
  if (const auto* st = std::get_if<StepSequenceSpec>(&spec)) {
    detail::require(st->start.allFinite(), "step_sequence.start must be finite");
    double prev = 0.0;
    for (std::size_t i = 0; i < st->switches.size(); ++i) {
      const auto& [t, target] = st->switches[i];
      detail::require(std::isfinite(t) && t > 0.0 && (i == 0 || t > prev),
                      "step_sequence switch times must be strictly increasing");
      detail::require_dim(target, n, "step_sequence switch target");
      prev = t;
    }
  } else if (const auto* qn = std::get_if<QuinticSpec>(&spec)) {
    detail::require(qn->from.allFinite() && qn->to.allFinite(),
                    "quintic endpoints must be finite");
    detail::require_dim(qn->to, n, "quintic.to");
    detail::require(std::isfinite(qn->duration) && qn->duration > 0.0,
                    "quintic.duration must be > 0");
  } else if (const auto* sn = std::get_if<SinusoidSpec>(&spec)) {
    detail::require_dim(sn->amplitude, n, "sinusoid.amplitude");
    detail::require_dim(sn->frequency, n, "sinusoid.frequency");
    detail::require(sn->offset.allFinite(), "sinusoid.offset must be finite");
    detail::require((sn->frequency.array() >= 0.0).all(),
                    "sinusoid.frequency must be >= 0");
  } else if (const auto* h = std::get_if<HoldSpec>(&spec)) {
    detail::require(h->at.allFinite(), "hold.at must be finite");
  }
}

/// Evaluates the reference and its first two derivatives at t >= 0.
inline TrajectorySample evaluate(const TrajectorySpec& spec, double t) {
  detail::require(std::isfinite(t) && t >= 0.0, "t must be finite and >= 0");
  const int n = trajectory_dim(spec);
  TrajectorySample out;
  out.t = t;
  out.qdot_d = VectorXd::Zero(n);
  out.qddot_d = VectorXd::Zero(n);

  if (const auto* h = std::get_if<HoldSpec>(&spec)) {
    out.q_d = h->at;
  } else if (const auto* st = std::get_if<StepSequenceSpec>(&spec)) {
    out.q_d = st->start;
    for (const auto& [ts, target] : st->switches) {
      if (t >= ts) out.q_d = target;
    }
  } else if (const auto* qn = std::get_if<QuinticSpec>(&spec)) {
    double s = t / qn->duration;
    if (s > 1.0) s = 1.0;
    const double s2 = s * s, s3 = s2 * s, s4 = s3 * s, s5 = s4 * s;
    const double blend = 10.0 * s3 - 15.0 * s4 + 6.0 * s5;
    const double dblend = (30.0 * s2 - 60.0 * s3 + 30.0 * s4) / qn->duration;
    const double ddblend =
        (60.0 * s - 180.0 * s2 + 120.0 * s3) / (qn->duration * qn->duration);
    const VectorXd delta = qn->to - qn->from;
    out.q_d = qn->from + blend * delta;
    out.qdot_d = dblend * delta;
    out.qddot_d = ddblend * delta;
  } else {
    const auto& sn = std::get<SinusoidSpec>(spec);
    out.q_d.resize(n);
    for (int i = 0; i < n; ++i) {
      const double w = 2.0 * M_PI * sn.frequency[i];
      out.q_d[i] = sn.offset[i] + sn.amplitude[i] * std::sin(w * t);
      out.qdot_d[i] = sn.amplitude[i] * w * std::cos(w * t);
      out.qddot_d[i] = -sn.amplitude[i] * w * w * std::sin(w * t);
    }
  }
  return out;
}

}  // namespace ttrack
