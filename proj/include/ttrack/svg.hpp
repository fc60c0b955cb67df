#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <string>

#include "ttrack/errors.hpp"
#include "ttrack/simulator.hpp"

namespace ttrack {

namespace detail {

inline std::string format_coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

struct Panel {
  double x0 = 0, y0 = 0, w = 0, h = 0;  // pixel box
  double tmin = 0, tmax = 1;            // data ranges
  double vmin = 0, vmax = 1;

  double px(double t) const { return x0 + (t - tmin) / (tmax - tmin) * w; }
  double py(double v) const {
    return y0 + h - (v - vmin) / (vmax - vmin) * h;
  }
};

inline void draw_series(std::ostream& out, const Panel& p, const VectorXd& t,
                        const MatrixXd& series, int col, const char* color) {
  const int samples = static_cast<int>(t.size());
  const int stride = std::max(1, samples / 2000);
  out << "<polyline fill=\"none\" stroke=\"" << color
      << "\" stroke-width=\"1.2\" points=\"";
  for (int i = 0; i < samples; i += stride) {
    out << format_coord(p.px(t[i])) << ',' << format_coord(p.py(series(i, col)))
        << ' ';
  }
  const int last = samples - 1;
  out << format_coord(p.px(t[last])) << ','
      << format_coord(p.py(series(last, col)));
  out << "\"/>\n";
}

inline void draw_panel(std::ostream& out, Panel& p, const VectorXd& t,
                       const MatrixXd& series, const std::string& label) {
  p.tmin = t[0];
  p.tmax = t[t.size() - 1];
  p.vmin = series.minCoeff();
  p.vmax = series.maxCoeff();
  if (p.vmax - p.vmin < 1e-12) {  // flat series still needs a finite range
    p.vmin -= 1.0;
    p.vmax += 1.0;
  } else {
    const double pad = 0.05 * (p.vmax - p.vmin);
    p.vmin -= pad;
    p.vmax += pad;
  }
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c",
                                 "#9467bd", "#ff7f0e", "#8c564b"};
  out << "<rect x=\"" << p.x0 << "\" y=\"" << p.y0 << "\" width=\"" << p.w
      << "\" height=\"" << p.h
      << "\" fill=\"white\" stroke=\"#888\" stroke-width=\"1\"/>\n";
  if (p.vmin < 0.0 && p.vmax > 0.0) {
    const double y = p.py(0.0);
    out << "<line x1=\"" << p.x0 << "\" y1=\"" << format_coord(y) << "\" x2=\""
        << p.x0 + p.w << "\" y2=\"" << format_coord(y)
        << "\" stroke=\"#ccc\" stroke-width=\"1\"/>\n";
  }
  for (int j = 0; j < series.cols(); ++j) {
    draw_series(out, p, t, series, j, colors[j % 6]);
  }
  out << "<text x=\"" << p.x0 << "\" y=\"" << p.y0 - 6
      << "\" font-family=\"sans-serif\" font-size=\"13\">" << label
      << "</text>\n";
  out << "<text x=\"" << p.x0 << "\" y=\"" << p.y0 + p.h + 16
      << "\" font-family=\"sans-serif\" font-size=\"11\">t in [" <<
      format_coord(p.tmin) << ", " << format_coord(p.tmax) << "] s, range ["
      << format_coord(p.vmin) << ", " << format_coord(p.vmax) << "]</text>\n";
}

}  // namespace detail

/// Static two-panel line plot of the tracking error and the applied torque.
inline void write_trace_svg(std::ostream& out, const Trace& trace) {
  if (trace.samples() < 2) throw InputError("trace too short to plot");
  const int width = 880, height = 560;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' '
      << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  detail::Panel top{60, 30, 780, 215};
  detail::draw_panel(out, top, trace.t, trace.eps, "tracking error eps [rad]");
  detail::Panel bottom{60, 315, 780, 215};
  detail::draw_panel(out, bottom, trace.t, trace.u, "applied torque u [N m]");
  out << "</svg>\n";
}

inline void write_trace_svg(const std::string& path, const Trace& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  write_trace_svg(out, trace);
}

}  // namespace ttrack
