#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "ttrack/controller.hpp"
#include "ttrack/errors.hpp"
#include "ttrack/simulator.hpp"

namespace ttrack {

/// Closed-form critically damped error solution
///   x(t) = (c1 + c2 t) e^(-omega0 t),  c1 = x0,  c2 = v0 + x0 omega0.
struct AnalyticOscillator {
  double omega0 = 1.0;
  double x0 = 0.0;
  double v0 = 0.0;

  double c1() const { return x0; }
  double c2() const { return v0 + x0 * omega0; }
};

inline double analytic_error(const AnalyticOscillator& osc, double t) {
  detail::require(std::isfinite(t) && t >= 0.0, "t must be finite and >= 0");
  detail::require(osc.omega0 > 0.0, "omega0 must be > 0");
  return (osc.c1() + osc.c2() * t) * std::exp(-osc.omega0 * t);
}

/// Smallest sample time t* (measured from the start of the series) such that
/// |eps(t)| <= threshold * |eps(0)| for every sample from t* through the end.
/// Returns 0 when eps(0) == 0 and nullopt when the series never settles.
inline std::optional<double> measured_settling_time(
    std::span<const double> eps, double dt, double threshold = 0.02) {
  detail::require(!eps.empty(), "settling time of an empty series");
  detail::require(std::isfinite(dt) && dt > 0.0, "dt must be > 0");
  detail::require(threshold > 0.0, "threshold must be > 0");
  const double e0 = std::abs(eps[0]);
  if (e0 == 0.0) return 0.0;
  const double bound = threshold * e0;
  // last sample that still violates the bound
  std::ptrdiff_t last_bad = -1;
  for (std::ptrdiff_t i = static_cast<std::ptrdiff_t>(eps.size()) - 1; i >= 0;
       --i) {
    if (std::abs(eps[static_cast<std::size_t>(i)]) > bound) {
      last_bad = i;
      break;
    }
  }
  if (last_bad == static_cast<std::ptrdiff_t>(eps.size()) - 1) {
    return std::nullopt;  // not settled through the end
  }
  return static_cast<double>(last_bad + 1) * dt;
}

/// Max absolute deviation between one joint's simulated error and the
/// critically damped closed form seeded from the trace's initial error state.
/// Meaningful on regulation segments (constant reference).
inline double compare_to_oracle(const Trace& trace, const GainSchedule& gains,
                                int joint) {
  detail::require(joint >= 0 && joint < trace.joints(), "joint out of range");
  detail::require(gains.n() == trace.joints(),
                  "gains dimension does not match the trace");
  detail::require(trace.samples() >= 1, "empty trace");
  const AnalyticOscillator osc{gains.omega0[joint], trace.eps(0, joint),
                               trace.epsdot(0, joint)};
  double worst = 0.0;
  for (int i = 0; i < trace.samples(); ++i) {
    const double dev =
        std::abs(trace.eps(i, joint) - analytic_error(osc, trace.t[i]));
    if (dev > worst) worst = dev;
  }
  return worst;
}

struct JointSummary {
  std::optional<double> settling_time;  // nullopt = not settled
  double rms_error = 0.0;
  double peak_torque = 0.0;       // max |u applied|
  double saturation_duty = 0.0;   // fraction of samples with u != u_raw
};

struct SummaryReport {
  std::vector<JointSummary> joints;
  double energy_drift = 0.0;  // max |E(t) - E(0)|
};

inline SummaryReport summarize(const Trace& trace, const GainSchedule& gains,
                               double threshold = 0.02) {
  detail::require(trace.samples() >= 2, "trace too short to summarize");
  detail::require(gains.n() == trace.joints(),
                  "gains dimension does not match the trace");
  const double dt = trace.t[1] - trace.t[0];
  SummaryReport rep;
  rep.joints.resize(trace.joints());
  for (int j = 0; j < trace.joints(); ++j) {
    JointSummary& s = rep.joints[j];
    const std::vector<double> eps = trace.eps_series(j);
    s.settling_time = measured_settling_time(eps, dt, threshold);
    double sq = 0.0, peak = 0.0;
    int clamped = 0;
    for (int i = 0; i < trace.samples(); ++i) {
      sq += trace.eps(i, j) * trace.eps(i, j);
      peak = std::max(peak, std::abs(trace.u(i, j)));
      if (trace.u(i, j) != trace.u_raw(i, j)) ++clamped;
    }
    s.rms_error = std::sqrt(sq / trace.samples());
    s.peak_torque = peak;
    s.saturation_duty = static_cast<double>(clamped) / trace.samples();
  }
  double drift = 0.0;
  for (int i = 0; i < trace.samples(); ++i) {
    drift = std::max(drift, std::abs(trace.energy[i] - trace.energy[0]));
  }
  rep.energy_drift = drift;
  return rep;
}

}  // namespace ttrack
