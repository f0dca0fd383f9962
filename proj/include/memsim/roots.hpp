#pragma once

// Bracketed scalar root finding: safeguarded Newton with bisection fallback.

#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "memsim/error.hpp"

namespace memsim {

enum class RootMethod { NewtonBisection, Bisection };

struct RootResult {
  double root;
  double residual;
  int iterations;
};

/// Find r in [lo, hi] with residual(r) = 0.
///
/// residual(lo) and residual(hi) must differ in sign (or one be zero). The
/// residual may return +/-inf at points where the underlying model is
/// undefined; the sign of the infinity tells which side of the root the point
/// is on, and such points only ever shrink the bracket.
///
/// Converges when the bracket width or the Newton step falls below
/// tol * max(x_scale, |x|). Newton uses a finite-difference slope.
template <class F>
RootResult solve_scalar(F&& residual, double lo, double hi, double tol, int max_iters,
                        RootMethod method = RootMethod::NewtonBisection, double x_scale = 1.0) {
  if (!(tol > 0.0)) throw ValidationError("solve_scalar: tol must be > 0");
  if (lo > hi) std::swap(lo, hi);
  double f_lo = residual(lo);
  double f_hi = residual(hi);
  if (std::isnan(f_lo) || std::isnan(f_hi)) throw NumericalError("solve_scalar: residual is NaN at bracket end");
  if (f_lo == 0.0) return {lo, 0.0, 0};
  if (f_hi == 0.0) return {hi, 0.0, 0};
  if ((f_lo > 0.0) == (f_hi > 0.0)) {
    throw ValidationError("solve_scalar: invalid bracket [" + std::to_string(lo) + ", " + std::to_string(hi) +
                          "], residuals " + std::to_string(f_lo) + " and " + std::to_string(f_hi) +
                          " have the same sign");
  }
  const bool increasing = f_hi > 0.0;

  // Start from the finite endpoint with the smaller residual, or the midpoint.
  double x = 0.5 * (lo + hi);
  if (std::isfinite(f_lo) && std::isfinite(f_hi)) x = std::abs(f_lo) < std::abs(f_hi) ? lo : hi;
  double fx = x == lo ? f_lo : (x == hi ? f_hi : residual(x));
  double dx_old = hi - lo;
  double dx = dx_old;

  for (int it = 1; it <= max_iters; ++it) {
    const double xtol = tol * std::max(x_scale, std::abs(x));
    if (std::isnan(fx)) throw NumericalError("solve_scalar: residual is NaN at x = " + std::to_string(x));
    if (fx == 0.0) return {x, 0.0, it};
    if ((fx > 0.0) == increasing) {
      hi = x;
      f_hi = fx;
    } else {
      lo = x;
      f_lo = fx;
    }
    if (hi - lo <= xtol) {
      // Report whichever bracket end has the smaller finite residual.
      const bool take_lo = !std::isfinite(f_hi) || (std::isfinite(f_lo) && std::abs(f_lo) <= std::abs(f_hi));
      return take_lo ? RootResult{lo, f_lo, it} : RootResult{hi, f_hi, it};
    }

    double next = 0.5 * (lo + hi);
    if (method == RootMethod::NewtonBisection && std::isfinite(fx)) {
      double h = 1e-7 * std::max(x_scale, std::abs(x));
      if (x + h > hi) h = -h;
      const double fh = residual(x + h);
      if (std::isfinite(fh)) {
        const double slope = (fh - fx) / h;
        if (slope != 0.0 && std::isfinite(slope)) {
          const double cand = x - fx / slope;
          // Take the Newton step only if it stays inside the bracket and is
          // shrinking faster than bisection would.
          if (cand > lo && cand < hi && std::abs(cand - x) < 0.5 * std::abs(dx_old)) {
            if (std::abs(cand - x) <= xtol) {
              const double fc = residual(cand);
              return {cand, fc, it};
            }
            next = cand;
          }
        }
      }
    }
    dx_old = dx;
    dx = next - x;
    x = next;
    fx = residual(x);
  }
  throw NumericalError("solve_scalar: no convergence after " + std::to_string(max_iters) +
                       " iterations, x = " + std::to_string(x) + ", residual = " + std::to_string(fx));
}

}  // namespace memsim
