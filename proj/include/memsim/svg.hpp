#pragma once

// Standalone SVG line plots with linear or logarithmic axes. Output depends
// only on the input data, so equal inputs give byte-identical files.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "memsim/error.hpp"
#include "memsim/io.hpp"

namespace memsim {

enum class PlotKind { IvLoop, KineticsLogLog, ResistanceVsT, Lines };

struct Series {
  std::string label;
  std::vector<double> x, y;
  bool markers = false;
};

struct Plot {
  std::string title;
  std::string x_label, y_label;
  bool log_x = false, log_y = false;
  std::vector<Series> series;
  std::string config_hash;
};

/// Axis defaults for the three standard plot kinds.
inline Plot make_plot(PlotKind kind, std::string title) {
  Plot p;
  p.title = std::move(title);
  switch (kind) {
    case PlotKind::IvLoop:
      p.x_label = "V (V)";
      p.y_label = "I (A)";
      break;
    case PlotKind::KineticsLogLog:
      p.x_label = "V_p (V)";
      p.y_label = "t_SET (s)";
      p.log_x = p.log_y = true;
      break;
    case PlotKind::ResistanceVsT:
      p.x_label = "t (s)";
      p.y_label = "R (ohm)";
      p.log_y = true;
      break;
    case PlotKind::Lines:
      break;
  }
  return p;
}

namespace detail {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

inline std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Axis {
  double lo, hi;
  bool log;
  std::vector<double> ticks;  // in data units

  double map(double v, double a, double b) const {
    const double u = log ? (std::log10(v) - lo) / (hi - lo) : (v - lo) / (hi - lo);
    return a + u * (b - a);
  }
};

inline Axis make_axis(double lo, double hi, bool log) {
  Axis ax{lo, hi, log, {}};
  if (log) {
    ax.lo = std::floor(std::log10(lo));
    ax.hi = std::ceil(std::log10(hi));
    if (ax.hi == ax.lo) ax.hi += 1.0;
    const int step = std::max(1, static_cast<int>(std::ceil((ax.hi - ax.lo) / 8.0)));
    for (double e = ax.lo; e <= ax.hi + 1e-9; e += step) ax.ticks.push_back(std::pow(10.0, e));
    return ax;
  }
  if (hi == lo) {
    const double pad = lo == 0.0 ? 1.0 : 0.05 * std::abs(lo);
    lo -= pad;
    hi += pad;
  }
  const double raw = (hi - lo) / 6.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  }
  ax.lo = std::floor(lo / step) * step;
  ax.hi = std::ceil(hi / step) * step;
  for (double t = ax.lo; t <= ax.hi + 0.5 * step; t += step) ax.ticks.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
  return ax;
}

inline constexpr std::string_view kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                "#9467bd", "#8c564b", "#e377c2", "#17becf"};

}  // namespace detail

/// Render a plot to SVG text. Points that cannot be shown on a log axis
/// (non-positive) and non-finite points are skipped.
inline std::string render_svg(const Plot& p) {
  using detail::num;
  auto usable = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!p.log_x || x > 0.0) && (!p.log_y || y > 0.0);
  };
  const double inf = std::numeric_limits<double>::infinity();
  double x_lo = inf, x_hi = -inf, y_lo = inf, y_hi = -inf;
  std::size_t shown = 0;
  for (const auto& s : p.series) {
    if (s.x.size() != s.y.size()) throw ValidationError("plot: series '" + s.label + "' has mismatched x/y lengths");
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      if (!usable(s.x[k], s.y[k])) continue;
      x_lo = std::min(x_lo, s.x[k]);
      x_hi = std::max(x_hi, s.x[k]);
      y_lo = std::min(y_lo, s.y[k]);
      y_hi = std::max(y_hi, s.y[k]);
      ++shown;
    }
  }
  if (shown == 0) throw ValidationError("plot '" + p.title + "': no data to draw");

  const double W = 640, H = 480, L = 80, R = 170, T = 40, B = 60;
  const detail::Axis ax = detail::make_axis(x_lo, x_hi, p.log_x);
  const detail::Axis ay = detail::make_axis(y_lo, y_hi, p.log_y);
  auto px = [&](double x) { return ax.map(x, L, W - R); };
  auto py = [&](double y) { return ay.map(y, H - B, T); };

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" viewBox=\"0 0 640 480\" "
       "font-family=\"sans-serif\" font-size=\"12\">\n";
  if (!p.config_hash.empty()) s += "<!-- config_hash=" + p.config_hash + " -->\n";
  s += "<rect width=\"640\" height=\"480\" fill=\"white\"/>\n";
  s += "<text x=\"" + num(L + (W - L - R) / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" +
       detail::escape(p.title) + "</text>\n";
  s += "<rect x=\"" + num(L) + "\" y=\"" + num(T) + "\" width=\"" + num(W - L - R) + "\" height=\"" + num(H - T - B) +
       "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double t : ax.ticks) {
    const double x = px(t);
    s += "<line x1=\"" + num(x) + "\" y1=\"" + num(H - B) + "\" x2=\"" + num(x) + "\" y2=\"" + num(H - B + 5) +
         "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + num(x) + "\" y=\"" + num(H - B + 18) + "\" text-anchor=\"middle\">" + detail::tick_label(t) +
         "</text>\n";
  }
  for (double t : ay.ticks) {
    const double y = py(t);
    s += "<line x1=\"" + num(L - 5) + "\" y1=\"" + num(y) + "\" x2=\"" + num(L) + "\" y2=\"" + num(y) +
         "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + num(L - 8) + "\" y=\"" + num(y + 4) + "\" text-anchor=\"end\">" + detail::tick_label(t) +
         "</text>\n";
  }
  s += "<text x=\"" + num(L + (W - L - R) / 2) + "\" y=\"" + num(H - 18) + "\" text-anchor=\"middle\">" +
       detail::escape(p.x_label) + "</text>\n";
  s += "<text x=\"18\" y=\"" + num(T + (H - T - B) / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
       num(T + (H - T - B) / 2) + ")\">" + detail::escape(p.y_label) + "</text>\n";

  for (std::size_t k = 0; k < p.series.size(); ++k) {
    const Series& sr = p.series[k];
    const std::string_view color = detail::kPalette[k % std::size(detail::kPalette)];
    std::string pts;
    for (std::size_t j = 0; j < sr.x.size(); ++j) {
      if (!usable(sr.x[j], sr.y[j])) continue;
      if (!pts.empty()) pts += ' ';
      pts += num(px(sr.x[j])) + "," + num(py(sr.y[j]));
    }
    if (!pts.empty())
      s += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
    if (sr.markers) {
      for (std::size_t j = 0; j < sr.x.size(); ++j) {
        if (!usable(sr.x[j], sr.y[j])) continue;
        s += "<circle cx=\"" + num(px(sr.x[j])) + "\" cy=\"" + num(py(sr.y[j])) + "\" r=\"3\" fill=\"" +
             std::string(color) + "\"/>\n";
      }
    }
    const double ly = T + 10 + 18.0 * static_cast<double>(k);
    s += "<line x1=\"" + num(W - R + 12) + "\" y1=\"" + num(ly) + "\" x2=\"" + num(W - R + 32) + "\" y2=\"" + num(ly) +
         "\" stroke=\"" + std::string(color) + "\" stroke-width=\"2\"/>\n";
    s += "<text x=\"" + num(W - R + 38) + "\" y=\"" + num(ly + 4) + "\">" + detail::escape(sr.label) + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

/// Render first, then write; a plot that cannot be rendered leaves no file.
inline void write_svg(const Plot& p, const std::filesystem::path& path) {
  const std::string body = render_svg(p);
  detail::write_file(path, body);
}

}  // namespace memsim
