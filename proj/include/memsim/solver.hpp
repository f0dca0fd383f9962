#pragma once

// Adaptive Dormand-Prince 5(4) integration of a circuit's state ODE under a
// piecewise-linear drive, with bound projection and threshold-crossing search.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <optional>
#include <string>

#include "memsim/circuits.hpp"
#include "memsim/error.hpp"
#include "memsim/signals.hpp"
#include "memsim/trace.hpp"

namespace memsim {

struct SolverConfig {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;       // fraction of each state's bound range
  double max_step = 0.0;        // s; 0 selects duration / 1e4
  double min_step = 1e-30;      // s
  int max_newton_iters = 200;
  double newton_tol = 1e-12;
  bool clamp_states = true;
  double output_interval = 0.0; // s; 0 records accepted step endpoints only
  // Cap each step at this fraction of the projected time to the monitored
  // threshold during find_crossing. 0 disables the cap.
  double max_step_time_fraction = 0.0;
  std::size_t max_steps = 20'000'000;

  SolverConfig tightened(double factor) const {
    SolverConfig c = *this;
    c.rel_tol /= factor;
    c.abs_tol /= factor;
    return c;
  }
};

inline void validate(const SolverConfig& c) {
  if (!(c.rel_tol > 0.0 && c.abs_tol > 0.0)) throw ValidationError("solver tolerances must be > 0");
  if (!(c.newton_tol > 0.0)) throw ValidationError("solver.newton_tol must be > 0");
  if (c.max_newton_iters < 1) throw ValidationError("solver.max_newton_iters must be >= 1");
  if (!(c.min_step > 0.0)) throw ValidationError("solver.min_step must be > 0");
  if (c.max_step != 0.0 && !(c.min_step < c.max_step)) throw ValidationError("solver: need min_step < max_step");
  if (c.output_interval < 0.0) throw ValidationError("solver.output_interval must be >= 0");
  if (c.max_step_time_fraction < 0.0) throw ValidationError("solver.max_step_time_fraction must be >= 0");
}

/// FNV-1a digest of a string, as 16 hex digits.
inline std::string fnv1a_hex(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string solver_hash(const SolverConfig& c) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "rel=%.17g;abs=%.17g;max=%.17g;min=%.17g;nit=%d;ntol=%.17g;clamp=%d;out=%.17g;frac=%.17g",
                c.rel_tol, c.abs_tol, c.max_step, c.min_step, c.max_newton_iters, c.newton_tol,
                static_cast<int>(c.clamp_states), c.output_interval, c.max_step_time_fraction);
  return fnv1a_hex(buf);
}

/// One accepted step, with everything needed for cubic Hermite dense output.
struct StepInfo {
  double t0, t1;
  State x0, x1;
  State f0, f1;
  double v1;
  OperatingPoint op1;

  State interpolate(double t) const {
    const double h = t1 - t0;
    const double s = (t - t0) / h;
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
    const double h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s);
    const double h11 = s * s * (s - 1);
    State out{};
    for (int k = 0; k < 2; ++k) out[k] = h00 * x0[k] + h10 * h * f0[k] + h01 * x1[k] + h11 * h * f1[k];
    return out;
  }
};

namespace detail {

// Dormand-Prince 5(4) tableau.
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                        a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                        e6 = 22.0 / 525, e7 = -1.0 / 40;

}  // namespace detail

using StepObserver = std::function<bool(const StepInfo&)>;
using StepLimiter = std::function<double(double t, const State& x, const State& f)>;

namespace detail {

struct Eval {
  State f;
  double v;
  OperatingPoint op;
};

struct Attempt {
  State y;       // fifth-order solution, unclamped
  Eval end;      // derivative at y (projected)
  double err;    // local error / tolerance, max norm
  double over;   // largest bound excursion / absolute tolerance
};

// One Dormand-Prince step of size h from (t, x) with known derivative k1.
template <class Rhs>
Attempt dp_attempt(Rhs& rhs, int n, double t, double t_new, const State& x, const State& k1, double h,
                   const State& atol, double rel_tol, const State& lo, const State& hi) {
  auto stage = [&](std::initializer_list<std::pair<double, const State*>> terms) {
    State y = x;
    for (auto [a, k] : terms)
      for (int j = 0; j < n; ++j) y[j] += h * a * (*k)[j];
    return y;
  };
  const State k2 = rhs(t + c2 * h, stage({{a21, &k1}})).f;
  const State k3 = rhs(t + c3 * h, stage({{a31, &k1}, {a32, &k2}})).f;
  const State k4 = rhs(t + c4 * h, stage({{a41, &k1}, {a42, &k2}, {a43, &k3}})).f;
  const State k5 = rhs(t + c5 * h, stage({{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}})).f;
  const State k6 = rhs(t_new, stage({{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}})).f;
  Attempt out{stage({{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}}), {}, 0.0, 0.0};
  out.end = rhs(t_new, out.y);
  for (int j = 0; j < n; ++j) {
    const double ej = h * (e1 * k1[j] + e3 * k3[j] + e4 * k4[j] + e5 * k5[j] + e6 * k6[j] + e7 * out.end.f[j]);
    const double sc = atol[j] + rel_tol * std::max(std::abs(x[j]), std::abs(out.y[j]));
    out.err = std::max(out.err, std::abs(ej) / sc);
    const double o = std::max(lo[j] - out.y[j], out.y[j] - hi[j]);
    if (o > 0.0) out.over = std::max(out.over, o / atol[j]);
  }
  if (!std::isfinite(out.err)) out.err = 1e10;
  return out;
}

inline double next_step_factor(double err) { return err > 0.0 ? std::min(5.0, 0.9 * std::pow(err, -0.2)) : 5.0; }
inline double reject_factor(double err, bool too_far) {
  double shrink = std::max(0.1, 0.9 * std::pow(err, -0.2));
  if (too_far) shrink = std::min(shrink, 0.5);
  return std::min(shrink, 0.9);
}

}  // namespace detail

/// Integrate from t = 0 to t_end, calling observe after every accepted step.
/// Returns the stats; stops early when observe returns false.
///
/// When the controller asks for a step shorter than the spacing of doubles at
/// the current t, the transient is integrated over that one representable
/// interval on a local clock with the drive held at its value at t, and
/// reported as a single step.
inline SolverStats integrate_steps(const CircuitSystem& sys, const Waveform& w, double t_end, const SolverConfig& cfg,
                                   const StepObserver& observe, const StepLimiter& limit = {},
                                   StepInfo* first = nullptr) {
  validate(cfg);
  if (!(t_end > 0.0)) throw ValidationError("integrate: t_end must be > 0");
  using detail::Eval;
  const int n = sys.dim();
  const State lo = sys.lower();
  const State hi = sys.upper();
  State atol{};
  for (int k = 0; k < n; ++k) atol[k] = cfg.abs_tol * std::max(hi[k] - lo[k], std::numeric_limits<double>::min());

  CircuitSystem local = sys;
  local.newton_tol = cfg.newton_tol;
  local.max_newton_iters = cfg.max_newton_iters;

  SolverStats stats;
  auto project = [&](State x) {
    for (int k = 0; k < n; ++k) x[k] = std::clamp(x[k], lo[k], hi[k]);
    return x;
  };
  auto eval_at = [&](double t, double v, const State& x_raw) {
    const State x = project(x_raw);
    const OperatingPoint op = local.partition(x, v);
    State f = local.rates(x, op);
    for (int k = 0; k < n; ++k) {
      if (!std::isfinite(f[k])) throw NumericalError("state rate not finite at t = " + std::to_string(t));
      if ((x[k] <= lo[k] && f[k] < 0.0) || (x[k] >= hi[k] && f[k] > 0.0)) f[k] = 0.0;
    }
    ++stats.rhs_evals;
    return Eval{f, v, op};
  };
  auto rhs = [&](double t, const State& x) { return eval_at(t, w.sample(t), x); };

  auto fail = [&](const char* what, double t, double h, const State& x) {
    char buf[240];
    std::snprintf(buf, sizeof buf, "integrate: %s at t = %.9g (h = %.3g, x = [%.9g, %.9g])", what, t, h, x[0], x[1]);
    throw NumericalError(buf);
  };
  auto budget = [&](double t, double h, const State& x) {
    if (stats.accepted + stats.rejected >= cfg.max_steps) fail("step budget exhausted", t, h, x);
  };

  // Frozen-drive collapse into a bound: if the slowest rate on the straight
  // path from x_k to its bound still covers the distance within `span`, the
  // bound is reached inside the interval.
  auto try_snap = [&](double v, State x, double span) -> std::optional<State> {
    bool moved = false;
    for (int k = 0; k < n; ++k) {
      const double raw = local.rates(x, local.partition(x, v))[k];
      if (raw == 0.0) continue;
      const double bound = raw > 0.0 ? hi[k] : lo[k];
      const double dist = std::abs(bound - x[k]);
      if (dist == 0.0) continue;
      double slowest = std::numeric_limits<double>::infinity();
      for (int j = 0; j <= 32 && slowest * span >= dist; ++j) {
        State p = x;
        p[k] = x[k] + (bound - x[k]) * std::min(j / 32.0, 1.0 - 1e-9);
        const double r = local.rates(p, local.partition(p, v))[k];
        slowest = (r > 0.0) == (raw > 0.0) ? std::min(slowest, std::abs(r)) : 0.0;
      }
      if (!(slowest * span >= dist)) return std::nullopt;
      x[k] = bound;
      moved = true;
    }
    if (!moved) return std::nullopt;
    ++stats.snapped_to_bound;
    return x;
  };

  // Frozen-drive integration of x over a local clock tau in [0, span].
  auto resolve_transient = [&](double t, double span, const State& x_in, const Eval& e_in) {
    const double v = e_in.v;
    auto frhs = [&](double, const State& x) { return eval_at(t, v, x); };
    double tau = 0.0;
    State x = x_in;
    Eval e = e_in;
    double h = span * 1e-6;
    while (tau < span) {
      budget(t, h, x);
      bool lands = false;
      if (tau + h >= span) {
        h = span - tau;
        lands = true;
      }
      if (!(h > 4.0 * std::numeric_limits<double>::epsilon() * tau) || !(h > 0.0)) {
        if (auto snapped = try_snap(v, x, span - tau)) {
          x = *snapped;
          e = frhs(span, x);
          break;
        }
        fail("stiff transient could not be resolved", t, h, x);
      }
      const double tau_new = lands ? span : tau + h;
      detail::Attempt a = detail::dp_attempt(frhs, n, tau, tau_new, x, e.f, h, atol, cfg.rel_tol, lo, hi);
      const bool too_far = cfg.clamp_states && a.over > 1.0;
      if (a.err > 1.0 || too_far) {
        ++stats.rejected;
        h *= detail::reject_factor(a.err, too_far);
        continue;
      }
      ++stats.accepted;
      stats.max_error_ratio = std::max(stats.max_error_ratio, a.err);
      if (cfg.clamp_states && project(a.y) != a.y) {
        stats.max_clamp_ratio = std::max(stats.max_clamp_ratio, a.over);
        a.y = project(a.y);
        a.end = frhs(tau_new, a.y);
      }
      tau = tau_new;
      x = a.y;
      e = a.end;
      h *= std::max(1.0, detail::next_step_factor(a.err));
    }
    ++stats.frozen_drive_steps;
    return std::pair<State, Eval>{x, e};
  };

  const double max_step = cfg.max_step > 0.0 ? cfg.max_step : t_end / 1e4;
  double t = 0.0;
  State x = project(sys.initial_state());
  Eval e0 = rhs(t, x);
  if (first) *first = StepInfo{0.0, 0.0, x, x, e0.f, e0.f, e0.v, e0.op};
  double next_bp = w.next_breakpoint_after(0.0);
  double h = std::min({max_step, next_bp, t_end}) * 1e-3;

  while (t < t_end) {
    budget(t, h, x);
    while (next_bp <= t) next_bp = w.next_breakpoint_after(t);
    const double stop = std::min(next_bp, t_end);
    h = std::min(h, max_step);
    if (limit) h = std::min(h, limit(t, x, e0.f));
    bool lands = false;
    if (t + h >= stop || stop - (t + h) < 1e-9 * h) {
      h = stop - t;
      lands = true;
    }

    const double resolution = std::nextafter(t, std::numeric_limits<double>::infinity()) - t;
    if (h < 4.0 * resolution) {
      if (4.0 * resolution < cfg.min_step) fail("step size underflow", t, h, x);
      const double t_new = std::min(t + 4.0 * resolution, stop);
      auto [x_new, e_new] = resolve_transient(t, t_new - t, x, e0);
      e_new = rhs(t_new, x_new);
      StepInfo info{t, t_new, x, x_new, e0.f, e_new.f, e_new.v, e_new.op};
      t = t_new;
      x = x_new;
      e0 = e_new;
      h = 4.0 * resolution;
      if (!observe(info)) break;
      continue;
    }
    if (h < cfg.min_step) fail("step size underflow", t, h, x);

    const double t_new = lands ? stop : t + h;
    detail::Attempt a = detail::dp_attempt(rhs, n, t, t_new, x, e0.f, h, atol, cfg.rel_tol, lo, hi);

    // A step that would push a state well past its bound is retried shorter,
    // so the post-step clamp only ever removes tolerance-level excursions.
    const bool too_far = cfg.clamp_states && a.over > 1.0;
    if (a.err > 1.0 || too_far) {
      ++stats.rejected;
      h *= detail::reject_factor(a.err, too_far);
      continue;
    }

    if (cfg.clamp_states && project(a.y) != a.y) {
      stats.max_clamp_ratio = std::max(stats.max_clamp_ratio, a.over);
      a.y = project(a.y);
      a.end = rhs(t_new, a.y);
    }
    ++stats.accepted;
    stats.max_error_ratio = std::max(stats.max_error_ratio, a.err);
    StepInfo info{t, t_new, x, a.y, e0.f, a.end.f, a.end.v, a.end.op};
    t = t_new;
    x = a.y;
    e0 = a.end;
    h = (lands ? info.t1 - info.t0 : h) * std::max(1.0, detail::next_step_factor(a.err));
    if (!observe(info)) break;
  }
  return stats;
}

/// Full trace: initial row, every accepted step endpoint, and an optional
/// uniform output grid filled from dense output.
inline Trace integrate(const CircuitSystem& sys, const Waveform& w, double t_end, const SolverConfig& cfg,
                       std::string model_id = {}) {
  Trace tr;
  tr.meta.model_id = std::move(model_id);
  tr.meta.waveform_label = w.label();
  tr.meta.period = w.period();
  tr.meta.devices = sys.dim();
  tr.meta.lower = sys.lower();
  tr.meta.upper = sys.upper();
  tr.meta.r_ext = sys.r_ext();
  for (int k = 0; k < sys.dim(); ++k) tr.meta.lrs_direction[k] = lrs_direction(sys.device(k));
  tr.meta.solver_hash = solver_hash(cfg);

  CircuitSystem local = sys;
  local.newton_tol = cfg.newton_tol;
  local.max_newton_iters = cfg.max_newton_iters;
  auto push = [&](double t, double v, const OperatingPoint& op, const State& x) {
    tr.push(t, v, op.v_a, op.v_b, op.i, x[0], x[1]);
  };

  double next_out = cfg.output_interval > 0.0 ? cfg.output_interval : std::numeric_limits<double>::infinity();
  StepInfo first{};
  bool seeded = false;
  auto observe = [&](const StepInfo& s) {
    if (!seeded) {
      push(s.t0, w.sample(s.t0), local.partition(s.x0, w.sample(s.t0)), s.x0);
      seeded = true;
    }
    while (next_out < s.t1) {
      const State xi = s.interpolate(next_out);
      State xc = xi;
      for (int k = 0; k < sys.dim(); ++k) xc[k] = std::clamp(xi[k], tr.meta.lower[k], tr.meta.upper[k]);
      const double v = w.sample(next_out);
      if (next_out > s.t0) push(next_out, v, local.partition(xc, v), xc);
      next_out += cfg.output_interval;
    }
    if (next_out == s.t1) next_out += cfg.output_interval;
    push(s.t1, s.v1, s.op1, s.x1);
    return true;
  };
  tr.meta.stats = integrate_steps(sys, w, t_end, cfg, observe, {}, &first);
  if (!seeded) push(0.0, first.v1, first.op1, first.x0);
  return tr;
}

enum class CrossingDirection { Rising, Falling };

struct CrossingResult {
  std::optional<double> t;  // empty: no crossing before t_end
  SolverStats stats;
};

/// Time at which state component k first crosses threshold in the given direction.
inline CrossingResult find_crossing(const CircuitSystem& sys, const Waveform& w, double t_end, int k,
                                    double threshold, CrossingDirection dir, const SolverConfig& cfg) {
  const State lo = sys.lower();
  const State hi = sys.upper();
  if (!(threshold >= lo[k] && threshold <= hi[k])) throw ValidationError("find_crossing: threshold outside bounds");
  const double sgn = dir == CrossingDirection::Rising ? 1.0 : -1.0;
  const State x0 = sys.initial_state();
  if (sgn * (x0[k] - threshold) >= 0.0) return {0.0, {}};

  std::optional<double> hit;
  auto observe = [&](const StepInfo& s) {
    if (sgn * (s.x1[k] - threshold) < 0.0) return true;
    double a = s.t0, b = s.t1;
    for (int it = 0; it < 200 && b - a > 1e-12 * b; ++it) {
      const double m = 0.5 * (a + b);
      if (sgn * (s.interpolate(m)[k] - threshold) >= 0.0) b = m;
      else a = m;
    }
    hit = b;
    return false;
  };
  StepLimiter limit;
  if (cfg.max_step_time_fraction > 0.0) {
    limit = [&, k](double t, const State& x, const State& f) {
      const double gap = threshold - x[k];
      if (f[k] == 0.0 || (gap > 0.0) != (f[k] > 0.0)) return std::numeric_limits<double>::infinity();
      return cfg.max_step_time_fraction * (t + gap / f[k]);
    };
  }
  CrossingResult r;
  r.stats = integrate_steps(sys, w, t_end, cfg, observe, limit);
  r.t = hit;
  return r;
}

struct ConstraintReport {
  double kirchhoff = 0.0;         // max |v_a + v_b + i r_ext - v| / max(1 V, |v|)
  double current = 0.0;           // max |i(x, v_device) - i| / max_row |i|
  std::size_t degenerate_rows = 0;
  bool degenerate_ok = true;      // zero-current rows conduct below the degenerate level
};

/// Re-evaluate every trace row against the circuit's algebraic constraints.
inline ConstraintReport check_constraints(const CircuitSystem& sys, const Trace& tr) {
  ConstraintReport rep;
  double i_scale = 0.0;
  for (double i : tr.i) i_scale = std::max(i_scale, std::abs(i));
  for (std::size_t r = 0; r < tr.size(); ++r) {
    const double v = tr.v_applied[r];
    const double vb = sys.dim() == 2 ? tr.v_device[1][r] : 0.0;
    const double i = tr.i[r];
    rep.kirchhoff = std::max(rep.kirchhoff, std::abs(tr.v_device[0][r] + vb + i * sys.r_ext() - v) / std::max(1.0, std::abs(v)));
    if (v == 0.0) continue;
    for (int k = 0; k < sys.dim(); ++k) {
      const double drop = tr.v_device[k][r];
      const double again = sys.branch_current(k, tr.x[k][r], drop);
      if (i == 0.0 && sys.dim() == 2) {
        ++rep.degenerate_rows;
        if (!(std::abs(again) < kDegenerateCurrent)) rep.degenerate_ok = false;
        continue;
      }
      if (i_scale > 0.0) rep.current = std::max(rep.current, std::abs(again - i) / i_scale);
    }
  }
  return rep;
}

}  // namespace memsim
