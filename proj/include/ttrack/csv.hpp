#pragma once

#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "ttrack/analysis.hpp"
#include "ttrack/errors.hpp"
#include "ttrack/simulator.hpp"

namespace ttrack {

namespace detail {

/// 17 significant digits: enough to round-trip any double, so re-running a
/// deterministic simulation reproduces the file byte for byte.
inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

/// Fixed column layout:
///   t, q1..qn, qdot1..qdotn, qd1..qdn, qddotd1..qddotdn,
///   eps1..epsn, u1..un, u_raw1..u_rawn, energy
inline std::string trace_csv_header(int n) {
  std::string h = "t";
  const auto block = [&](const char* stem) {
    for (int i = 1; i <= n; ++i) h += "," + std::string(stem) + std::to_string(i);
  };
  block("q");
  block("qdot");
  block("qd");
  block("qddotd");
  block("eps");
  block("u");
  block("u_raw");
  h += ",energy";
  return h;
}

inline void write_trace_csv(std::ostream& out, const Trace& trace) {
  const int n = trace.joints();
  out << trace_csv_header(n) << "\n";
  for (int i = 0; i < trace.samples(); ++i) {
    out << detail::format_g17(trace.t[i]);
    const auto block = [&](const MatrixXd& m) {
      for (int j = 0; j < n; ++j) out << ',' << detail::format_g17(m(i, j));
    };
    block(trace.q);
    block(trace.qdot);
    block(trace.q_des);
    block(trace.qddot_des);
    block(trace.eps);
    block(trace.u);
    block(trace.u_raw);
    out << ',' << detail::format_g17(trace.energy[i]) << "\n";
  }
}

inline void write_trace_csv(const std::string& path, const Trace& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  write_trace_csv(out, trace);
}

// ---- sweep table ---------------------------------------------------------

struct SweepRow {
  double value = 0.0;
  std::string status;  // ok | diverged | config_error
  SummaryReport summary;
  double oracle_deviation = 0.0;  // max over joints
};

inline void write_sweep_csv(std::ostream& out, const std::string& param,
                            const std::vector<SweepRow>& rows, int n) {
  out << param << ",status";
  for (int j = 1; j <= n; ++j)
    out << ",settling_time" << j << ",rms_error" << j << ",peak_torque" << j
        << ",saturation_duty" << j;
  out << ",energy_drift,oracle_deviation\n";
  const double inf = std::numeric_limits<double>::infinity();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const SweepRow& r : rows) {
    out << detail::format_g17(r.value) << ',' << r.status;
    for (int j = 0; j < n; ++j) {
      if (r.status == "ok" || r.status == "diverged") {
        const JointSummary& s = r.summary.joints[j];
        out << ',' << detail::format_g17(s.settling_time.value_or(inf)) << ','
            << detail::format_g17(s.rms_error) << ','
            << detail::format_g17(s.peak_torque) << ','
            << detail::format_g17(s.saturation_duty);
      } else {
        out << ',' << detail::format_g17(nan) << ',' << detail::format_g17(nan)
            << ',' << detail::format_g17(nan) << ',' << detail::format_g17(nan);
      }
    }
    out << ',' << detail::format_g17(r.status == "config_error"
                                         ? nan
                                         : r.summary.energy_drift)
        << ','
        << detail::format_g17(r.status == "config_error" ? nan
                                                         : r.oracle_deviation)
        << "\n";
  }
}

inline void write_sweep_csv(const std::string& path, const std::string& param,
                            const std::vector<SweepRow>& rows, int n) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  write_sweep_csv(out, param, rows, n);
}

}  // namespace ttrack
