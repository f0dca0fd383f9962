#pragma once

// Linear ionic-drift memristor: R(x) interpolates between HRS (x = 0) and
// LRS (x = 1), and x moves at K1 * I * f(x, I).

#include <cmath>
#include <limits>

#include "memsim/error.hpp"
#include "memsim/quadrature.hpp"
#include "memsim/windows.hpp"

namespace memsim {

struct LinearParams {
  double k1 = 1e4;          // 1/(A s)
  double r_lrs = 100.0;     // ohm
  double r_hrs = 16000.0;   // ohm
  double thickness = 10e-9; // m, informative only
  double x0 = 0.0;
};

inline void validate(const LinearParams& p) {
  if (!(p.k1 > 0.0)) throw ValidationError("linear: k1 must be > 0");
  if (!(p.r_lrs > 0.0)) throw ValidationError("linear: r_lrs must be > 0");
  if (!(p.r_hrs > p.r_lrs)) throw ValidationError("linear: r_hrs must exceed r_lrs");
  if (!(p.x0 >= 0.0 && p.x0 <= 1.0)) throw ValidationError("linear: x0 must lie in [0, 1]");
}

inline double resistance(const LinearParams& p, double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw ValidationError("linear: state outside [0, 1]");
  return (p.r_lrs - p.r_hrs) * x + p.r_hrs;
}

inline int sign_of(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

inline double state_rate(const LinearParams& p, const WindowSpec& w, double x, double i) {
  if (i == 0.0) return 0.0;
  return p.k1 * i * eval_window(w, x, sign_of(i));
}

/// K2 = integral of R(x) / (K1 f(x, +)) over [x_start, x_end], in V s.
inline double set_time_constant(const LinearParams& p, const WindowSpec& w, double x_start, double x_end) {
  if (!(x_start >= 0.0 && x_start < x_end && x_end <= 1.0)) {
    throw ValidationError("analytic_set_time: need 0 <= x_start < x_end <= 1");
  }
  auto integrand = [&](double x) {
    const double f = eval_window(w, x, +1);
    if (!(f > 0.0)) return std::numeric_limits<double>::infinity();
    return resistance(p, x) / (p.k1 * f);
  };
  if (x_start == 0.0) return integrate_adaptive(integrand, x_start, x_end, 1e-10).value;
  // With x = exp(u) a 1/x endpoint behaviour (symmetric windows near 0) becomes flat.
  auto in_log = [&](double u) {
    const double x = std::exp(u);
    return integrand(x) * x;
  };
  return integrate_adaptive(in_log, std::log(x_start), std::log(x_end), 1e-10).value;
}

/// Time to drive x from x_start to x_end under a constant device voltage v_p.
inline double analytic_set_time(const LinearParams& p, const WindowSpec& w, double v_p, double x_start,
                                double x_end) {
  if (!(v_p > 0.0)) throw ValidationError("analytic_set_time: v_p must be > 0");
  return set_time_constant(p, w, x_start, x_end) / v_p;
}

}  // namespace memsim
