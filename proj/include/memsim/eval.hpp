#pragma once

// Feature extraction over traces: switching voltages, loop symmetry,
// switching kinetics, and anti-serial pair resistance analysis.

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "memsim/circuits.hpp"
#include "memsim/error.hpp"
#include "memsim/signals.hpp"
#include "memsim/solver.hpp"
#include "memsim/trace.hpp"

namespace memsim {

// ---- switching voltages ----

struct SwitchingVoltages {
  std::optional<double> v_set, t_set;
  std::optional<double> v_reset, t_reset;
};

/// First crossings of the LRS fraction of device k through `level`: upward is
/// SET, downward is RESET. The applied voltage is interpolated between rows.
inline SwitchingVoltages extract_switching_voltages(const Trace& tr, int k = 0, double level = 0.5,
                                                    double t_from = 0.0) {
  SwitchingVoltages out;
  for (std::size_t r = 1; r < tr.size(); ++r) {
    if (tr.t[r] < t_from) continue;
    const double a = tr.lrs_fraction(k, r - 1) - level;
    const double b = tr.lrs_fraction(k, r) - level;
    const bool up = a < 0.0 && b >= 0.0;
    const bool down = a > 0.0 && b <= 0.0;
    if (!up && !down) continue;
    const double s = a / (a - b);
    const double v = tr.v_applied[r - 1] + s * (tr.v_applied[r] - tr.v_applied[r - 1]);
    const double t = tr.t[r - 1] + s * (tr.t[r] - tr.t[r - 1]);
    if (up && !out.v_set) {
      out.v_set = v;
      out.t_set = t;
    }
    if (down && !out.v_reset) {
      out.v_reset = v;
      out.t_reset = t;
    }
    if (out.v_set && out.v_reset) break;
  }
  return out;
}

// ---- loop symmetry ----

namespace detail {
inline double interp_column(const std::vector<double>& t, const std::vector<double>& y, double at) {
  auto it = std::lower_bound(t.begin(), t.end(), at);
  if (it == t.end()) return y.back();
  const std::size_t j = static_cast<std::size_t>(it - t.begin());
  if (t[j] == at || j == 0) return y[j];
  const double s = (at - t[j - 1]) / (t[j] - t[j - 1]);
  return y[j - 1] + s * (y[j] - y[j - 1]);
}
}  // namespace detail

/// Point-symmetry defect of the I-V loop over the last full drive period.
///
/// A symmetric triangular period satisfies V(c + T - s) = -V(c + s), so a loop
/// that is point-symmetric about the origin has I(c + T - s) = -I(c + s).
/// Returns max |I(t) + I(2c + T - t)| / max |I| over that period.
inline double loop_symmetry_error(const Trace& tr) {
  const double T = tr.meta.period;
  if (!(T > 0.0)) throw ValidationError("loop_symmetry_error: trace is not from a periodic drive");
  if (tr.size() < 3) throw ValidationError("loop_symmetry_error: trace too short");
  const double t_end = tr.t.back();
  const double cycles = std::floor(t_end / T * (1.0 + 1e-12));
  if (cycles < 2.0) throw ValidationError("loop_symmetry_error: need at least two periods (first is discarded)");
  const double c = (cycles - 1.0) * T;
  double i_max = 0.0;
  for (std::size_t r = 0; r < tr.size(); ++r) {
    if (tr.t[r] >= c && tr.t[r] <= c + T) i_max = std::max(i_max, std::abs(tr.i[r]));
  }
  if (i_max == 0.0) return 0.0;
  double worst = 0.0;
  for (std::size_t r = 0; r < tr.size(); ++r) {
    if (tr.t[r] < c || tr.t[r] > c + T) continue;
    const double mirror = 2.0 * c + T - tr.t[r];
    const double im = detail::interp_column(tr.t, tr.i, mirror);
    worst = std::max(worst, std::abs(tr.i[r] + im));
  }
  return worst / i_max;
}

// ---- kinetics ----

enum class ThresholdRule { FixedHalf, HalfRange };

struct KineticsPoint {
  double v_p;
  std::optional<double> t_set;  // empty: no crossing within the simulated time
};

struct KineticsCurve {
  std::vector<KineticsPoint> points;
  ThresholdRule rule = ThresholdRule::FixedHalf;
  double v_p1 = 0.0;        // normalization anchor, 0 if unnormalized
  double threshold = 0.5;   // LRS-fraction level that defines t_set
  double saturated = 1.0;   // LRS fraction reached by a long pulse (half-range rule)
};

struct KineticsOptions {
  ThresholdRule rule = ThresholdRule::FixedHalf;
  double t_end = 100.0;             // s, per pulse
  double saturation_t_end = 1e4;    // s, long pulse for the half-range rule
  double r_ext = 0.0;
  SolverConfig solver;
};

namespace detail {

// Step to the SET-polarity height over 1 ns, then hold until t_end.
inline Waveform kinetics_pulse(const Device& d, double height, double t_end) {
  const double v = set_polarity(d) * height;
  return Waveform({{0.0, 0.0}, {1e-9, v}, {std::max(t_end, 2e-9), v}}, 0.0, "pulse(" + std::to_string(v) + "V)");
}

// LRS fraction at which a long pulse at `height` stops moving the state:
// |dx/dt| below 1e-6 of the largest rate seen so far.
inline double saturated_fraction(const Device& d, double height, const KineticsOptions& o) {
  const CircuitSystem sys = single_device_system(d, o.r_ext);
  const Waveform w = kinetics_pulse(d, height, o.saturation_t_end);
  double peak = 0.0;
  double last = lrs_fraction(d, initial_state(d));
  integrate_steps(sys, w, o.saturation_t_end, o.solver, [&](const StepInfo& s) {
    last = lrs_fraction(d, s.x1[0]);
    const double rate = std::abs(s.f1[0]);
    peak = std::max(peak, rate);
    return !(s.t1 > 2e-9 && peak > 0.0 && rate < 1e-6 * peak);
  });
  return last;
}

}  // namespace detail

/// One pulse simulation per height; t_set is the first time the LRS fraction
/// of the device reaches the rule's threshold. Heights run concurrently.
inline KineticsCurve kinetics_curve(const Device& d, const std::vector<double>& heights, const KineticsOptions& o) {
  if (heights.empty()) throw ValidationError("kinetics: no pulse heights");
  for (std::size_t j = 0; j < heights.size(); ++j) {
    if (!(heights[j] > 0.0)) throw ValidationError("kinetics: pulse heights must be > 0");
    if (j > 0 && !(heights[j] > heights[j - 1])) throw ValidationError("kinetics: heights must be increasing");
  }
  KineticsCurve curve;
  curve.rule = o.rule;
  const double start = lrs_fraction(d, initial_state(d));
  if (o.rule == ThresholdRule::HalfRange) {
    curve.saturated = detail::saturated_fraction(d, heights.back(), o);
    curve.threshold = 0.5 * (curve.saturated + start);
  } else {
    curve.threshold = 0.5;
  }
  if (!(curve.threshold > start)) throw NumericalError("kinetics: threshold not above the initial state");

  const auto [lo, hi] = state_bounds(d);
  const double raw = lrs_direction(d) > 0 ? lo + curve.threshold * (hi - lo) : hi - curve.threshold * (hi - lo);
  const CrossingDirection dir = lrs_direction(d) > 0 ? CrossingDirection::Rising : CrossingDirection::Falling;

  std::vector<std::future<std::optional<double>>> jobs;
  for (double v : heights) {
    jobs.push_back(std::async(std::launch::async, [&, v] {
      const CircuitSystem sys = single_device_system(d, o.r_ext);
      return find_crossing(sys, detail::kinetics_pulse(d, v, o.t_end), o.t_end, 0, raw, dir, o.solver).t;
    }));
  }
  for (std::size_t j = 0; j < heights.size(); ++j) curve.points.push_back({heights[j], jobs[j].get()});
  return curve;
}

inline KineticsCurve normalize_kinetics(const KineticsCurve& c, double v_p1) {
  const KineticsPoint* anchor = nullptr;
  for (const auto& p : c.points) {
    if (std::abs(p.v_p - v_p1) <= 1e-12 * std::max(1.0, std::abs(v_p1))) anchor = &p;
  }
  if (!anchor || !anchor->t_set) throw ValidationError("normalize_kinetics: no defined point at the anchor voltage");
  KineticsCurve out = c;
  out.v_p1 = v_p1;
  const double ref = *anchor->t_set;
  for (auto& p : out.points) {
    if (p.t_set) p.t_set = *p.t_set / ref;
  }
  return out;
}

enum class KineticsClass { PowerLaw, ExponentialLike, Threshold };

inline std::string to_string(KineticsClass k) {
  switch (k) {
    case KineticsClass::PowerLaw: return "power_law";
    case KineticsClass::ExponentialLike: return "exponential_like";
    case KineticsClass::Threshold: return "threshold";
  }
  return "?";
}

struct KineticsClassification {
  KineticsClass kind;
  double power_exponent;      // slope of log t vs log v
  double power_rss;
  double semilog_slope;       // slope of ln t vs v, 1/V
  double semilog_rss;
  std::optional<double> decades_per_doubling;      // at the lowest v with 2v in range
  std::optional<double> max_decades_per_doubling;  // over all such v
  std::size_t defined_points;
  std::size_t undefined_points;
};

namespace detail {
struct LineFit {
  double slope, intercept, rss;
};
inline LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    sx += x[j];
    sy += y[j];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    sxx += (x[j] - mx) * (x[j] - mx);
    sxy += (x[j] - mx) * (y[j] - my);
  }
  const double slope = sxy / sxx;
  const double icpt = my - slope * mx;
  double rss = 0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double r = y[j] - (icpt + slope * x[j]);
    rss += r * r;
  }
  return {slope, icpt, rss};
}
}  // namespace detail

/// Compare a power law (log t vs log v) against an exponential (log t vs v).
/// Both residuals are measured in ln t, so the better fit is the smaller one.
/// Undefined points below the defined range mark a threshold device.
inline KineticsClassification classify_kinetics(const KineticsCurve& c) {
  std::vector<double> lv, v, lt;
  std::size_t undefined = 0;
  for (const auto& p : c.points) {
    if (!p.t_set) {
      ++undefined;
      continue;
    }
    if (!(*p.t_set > 0.0)) throw ValidationError("classify_kinetics: non-positive t_set");
    lv.push_back(std::log(p.v_p));
    v.push_back(p.v_p);
    lt.push_back(std::log(*p.t_set));
  }
  if (lv.size() < 4) throw ValidationError("classify_kinetics: need at least 4 defined points");
  const detail::LineFit pw = detail::least_squares(lv, lt);
  const detail::LineFit ex = detail::least_squares(v, lt);
  KineticsClassification out{};
  out.power_exponent = pw.slope;
  out.power_rss = pw.rss;
  out.semilog_slope = ex.slope;
  out.semilog_rss = ex.rss;
  out.defined_points = lv.size();
  out.undefined_points = undefined;
  if (undefined > 0) out.kind = KineticsClass::Threshold;
  else out.kind = pw.rss <= ex.rss ? KineticsClass::PowerLaw : KineticsClass::ExponentialLike;

  // log t is interpolated linearly in log v between defined points.
  auto log_t_at = [&](double vq) -> std::optional<double> {
    const double lq = std::log(vq);
    for (std::size_t j = 1; j < lv.size(); ++j) {
      if (lq >= lv[j - 1] && lq <= lv[j]) {
        const double s = (lq - lv[j - 1]) / (lv[j] - lv[j - 1]);
        return lt[j - 1] + s * (lt[j] - lt[j - 1]);
      }
    }
    return std::nullopt;
  };
  for (std::size_t j = 0; j < v.size(); ++j) {
    const auto far = log_t_at(2.0 * v[j]);
    if (!far) continue;
    const double d = (lt[j] - *far) / std::log(10.0);
    if (!out.decades_per_doubling) out.decades_per_doubling = d;
    out.max_decades_per_doubling = std::max(out.max_decades_per_doubling.value_or(d), d);
  }
  return out;
}

// ---- anti-serial pair analysis ----

struct CrsOptions {
  double min_abs_voltage = 10e-3;  // V; samples closer to 0 V are ignored
  // ON threshold in ohm; 0 selects the geometric mean of the min and max resistance.
  double on_threshold = 0.0;
  double increase_margin = 1e-3;  // relative excess over the initial resistance
  double min_contrast = 2.0;      // r_max / r_min below this means no ON window
};

struct OnWindow {
  double v_start, v_end;
  double t_start, t_end;
  std::size_t first_row, last_row;
};

struct LobePeak {
  int polarity;          // +1 or -1
  double t_voltage_extremum;
  double t_conductance_peak;
  double v_at_peak;
  bool peak_after_extremum;
};

struct CrsReport {
  double r_total_min = std::numeric_limits<double>::infinity();
  double r_total_max = 0.0;
  double r_initial = std::numeric_limits<double>::quiet_NaN();
  double on_threshold = 0.0;
  std::vector<OnWindow> on_windows;
  std::optional<OnWindow> on_window;  // the one spanning the largest voltage interval
  bool self_crossing = false;
  std::vector<LobePeak> lobes;
  double max_r_over_initial = 0.0;
  bool increased_resistance = false;
};

namespace detail {

inline bool segments_cross(double ax, double ay, double bx, double by, double cx, double cy, double dx, double dy) {
  auto orient = [](double px, double py, double qx, double qy, double rx, double ry) {
    return (qx - px) * (ry - py) - (qy - py) * (rx - px);
  };
  const double o1 = orient(ax, ay, bx, by, cx, cy);
  const double o2 = orient(ax, ay, bx, by, dx, dy);
  const double o3 = orient(cx, cy, dx, dy, ax, ay);
  const double o4 = orient(cx, cy, dx, dy, bx, by);
  return ((o1 > 0) != (o2 > 0)) && o1 != 0 && o2 != 0 && ((o3 > 0) != (o4 > 0)) && o3 != 0 && o4 != 0;
}

}  // namespace detail

/// Chordal resistance statistics, ON windows, self-crossing and conductance-peak timing.
inline CrsReport crs_analysis(const Trace& tr, const CrsOptions& o = {}) {
  CrsReport rep;
  const std::size_t n = tr.size();
  std::vector<double> r(n, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t k = 0; k < n; ++k) {
    if (std::abs(tr.v_applied[k]) < o.min_abs_voltage) continue;
    r[k] = tr.i[k] != 0.0 ? tr.v_applied[k] / tr.i[k] : std::numeric_limits<double>::infinity();
    if (std::isnan(rep.r_initial)) rep.r_initial = r[k];
    rep.r_total_min = std::min(rep.r_total_min, r[k]);
    if (std::isfinite(r[k])) rep.r_total_max = std::max(rep.r_total_max, r[k]);
  }
  if (std::isnan(rep.r_initial)) return rep;
  rep.on_threshold = o.on_threshold > 0.0 ? o.on_threshold : std::sqrt(rep.r_total_min * rep.r_total_max);

  // ON windows: maximal runs of valid samples below the threshold.
  std::vector<char> on(n, 0);
  const bool contrast = rep.r_total_max >= o.min_contrast * rep.r_total_min;
  for (std::size_t k = 0; k < n; ++k) on[k] = contrast && !std::isnan(r[k]) && r[k] < rep.on_threshold;
  for (std::size_t k = 0; k < n;) {
    if (!on[k]) {
      ++k;
      continue;
    }
    std::size_t j = k;
    while (j + 1 < n && on[j + 1]) ++j;
    double vmin = tr.v_applied[k], vmax = tr.v_applied[k];
    for (std::size_t q = k; q <= j; ++q) {
      vmin = std::min(vmin, tr.v_applied[q]);
      vmax = std::max(vmax, tr.v_applied[q]);
    }
    rep.on_windows.push_back({tr.v_applied[k], tr.v_applied[j], tr.t[k], tr.t[j], k, j});
    const double span = vmax - vmin;
    if (!rep.on_window || span > std::abs(rep.on_window->v_end - rep.on_window->v_start)) {
      rep.on_window = OnWindow{vmin, vmax, tr.t[k], tr.t[j], k, j};
      if (tr.v_applied[j] < tr.v_applied[k]) std::swap(rep.on_window->v_start, rep.on_window->v_end);
    }
    k = j + 1;
  }

  // Self-crossing: an ON-region segment properly intersects another
  // non-adjacent segment of the (v, i) polyline.
  std::vector<std::size_t> on_segments;
  for (std::size_t k = 1; k < n; ++k) {
    if (on[k - 1] || on[k]) on_segments.push_back(k);
  }
  double i_scale = 0.0;
  for (double v : tr.i) i_scale = std::max(i_scale, std::abs(v));
  double v_scale = 0.0;
  for (double v : tr.v_applied) v_scale = std::max(v_scale, std::abs(v));
  if (i_scale > 0.0 && v_scale > 0.0) {
    auto X = [&](std::size_t k) { return tr.v_applied[k] / v_scale; };
    auto Y = [&](std::size_t k) { return tr.i[k] / i_scale; };
    for (std::size_t a : on_segments) {
      const double ax0 = std::min(X(a - 1), X(a)), ax1 = std::max(X(a - 1), X(a));
      const double ay0 = std::min(Y(a - 1), Y(a)), ay1 = std::max(Y(a - 1), Y(a));
      for (std::size_t b = 1; b < n && !rep.self_crossing; ++b) {
        if (b + 1 >= a && b <= a + 1) continue;
        if (std::abs(tr.v_applied[b]) < o.min_abs_voltage && std::abs(tr.v_applied[b - 1]) < o.min_abs_voltage) {
          continue;
        }
        if (std::max(X(b - 1), X(b)) < ax0 || std::min(X(b - 1), X(b)) > ax1) continue;
        if (std::max(Y(b - 1), Y(b)) < ay0 || std::min(Y(b - 1), Y(b)) > ay1) continue;
        if (detail::segments_cross(X(a - 1), Y(a - 1), X(a), Y(a), X(b - 1), Y(b - 1), X(b), Y(b))) {
          rep.self_crossing = true;
        }
      }
      if (rep.self_crossing) break;
    }
  }

  // Lobes: contiguous runs of same-sign applied voltage beyond the dead band.
  for (std::size_t k = 0; k < n;) {
    if (std::isnan(r[k])) {
      ++k;
      continue;
    }
    const int pol = tr.v_applied[k] > 0.0 ? 1 : -1;
    std::size_t j = k;
    while (j + 1 < n && !std::isnan(r[j + 1]) && (tr.v_applied[j + 1] > 0.0 ? 1 : -1) == pol) ++j;
    std::size_t ext = k, peak = k;
    double g_best = -1.0;
    for (std::size_t q = k; q <= j; ++q) {
      if (pol * tr.v_applied[q] > pol * tr.v_applied[ext]) ext = q;
      const double g = tr.i[q] / tr.v_applied[q];
      if (g > g_best) {
        g_best = g;
        peak = q;
      }
    }
    if (j > k) rep.lobes.push_back({pol, tr.t[ext], tr.t[peak], tr.v_applied[peak], tr.t[peak] > tr.t[ext]});
    k = j + 1;
  }

  for (std::size_t k = 0; k < n; ++k) {
    if (std::isnan(r[k])) continue;
    rep.max_r_over_initial = std::max(rep.max_r_over_initial, r[k] / rep.r_initial);
  }
  rep.increased_resistance = rep.max_r_over_initial > 1.0 + o.increase_margin;
  return rep;
}

/// Applied voltage at which device k's LRS fraction has risen by `rise` above its initial value.
inline std::optional<double> set_onset_voltage(const Trace& tr, int k = 0, double rise = 0.01) {
  if (tr.size() == 0) return std::nullopt;
  const double start = tr.lrs_fraction(k, 0);
  for (std::size_t r = 1; r < tr.size(); ++r) {
    const double a = tr.lrs_fraction(k, r - 1) - start - rise;
    const double b = tr.lrs_fraction(k, r) - start - rise;
    if (a < 0.0 && b >= 0.0) {
      const double s = a / (a - b);
      return tr.v_applied[r - 1] + s * (tr.v_applied[r] - tr.v_applied[r - 1]);
    }
  }
  return std::nullopt;
}

struct Snapback {
  double drop = 0.0;       // V, largest fall of |v_device| while |v_applied| keeps rising
  double v_applied = 0.0;  // applied voltage where that fall ends
};

/// Snapback of device 0 on branches of the given polarity: within each run of
/// rows where polarity * v_applied strictly increases, the largest decrease of
/// polarity * v_device below its running maximum.
inline Snapback detect_snapback(const Trace& tr, int polarity) {
  Snapback best;
  double run_max = -std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < tr.size(); ++r) {
    const double va = polarity * tr.v_applied[r];
    const double vd = polarity * tr.v_device[0][r];
    const bool rising = r > 0 && va > polarity * tr.v_applied[r - 1] && va > 0.0;
    if (!rising) {
      run_max = vd;
      continue;
    }
    run_max = std::max(run_max, vd);
    if (run_max - vd > best.drop) best = {run_max - vd, tr.v_applied[r]};
  }
  return best;
}

}  // namespace memsim
