#pragma once

// Globally adaptive Gauss-Kronrod (7/15) quadrature.

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <vector>

#include "memsim/error.hpp"

namespace memsim {

struct QuadratureResult {
  double value;
  double error_estimate;
  int evaluations;
};

namespace detail {

// Kronrod nodes (non-negative half) and weights for the 15-point rule, and the
// embedded 7-point Gauss weights at the odd-indexed nodes.
inline constexpr std::array<double, 8> kXgk{0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                           0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                           0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                           0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk{0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                           0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                           0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                           0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg{0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                          0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment gk15(F& f, double a, double b, int& evals) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  evals += 15;
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const double f1 = f(c - dx);
    const double f2 = f(c + dx);
    kronrod += kWgk[j] * (f1 + f2);
    if (j % 2 == 1) gauss += kWg[j / 2] * (f1 + f2);
  }
  if (!std::isfinite(kronrod)) {
    throw NumericalError("quadrature: integrand not finite on [" + std::to_string(a) + ", " + std::to_string(b) + "]");
  }
  return {a, b, kronrod * h, std::abs((kronrod - gauss) * h)};
}

}  // namespace detail

/// Integrate f over [a, b] to |error| <= max(abs_tol, rel_tol * |I|).
/// Throws NumericalError when the segment budget runs out, which is how a
/// non-integrable singularity surfaces.
template <class F>
QuadratureResult integrate_adaptive(F f, double a, double b, double rel_tol = 1e-10, double abs_tol = 0.0,
                                    int max_segments = 4000) {
  int evals = 0;
  std::priority_queue<detail::Segment> heap;
  heap.push(detail::gk15(f, a, b, evals));
  double total = heap.top().value;
  double err = heap.top().error;
  while (err > std::max(abs_tol, rel_tol * std::abs(total))) {
    if (static_cast<int>(heap.size()) >= max_segments) {
      throw NumericalError("quadrature did not converge: estimate " + std::to_string(total) + ", error " +
                           std::to_string(err));
    }
    detail::Segment worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      throw NumericalError("quadrature did not converge: interval collapsed near " + std::to_string(mid));
    }
    detail::Segment left = detail::gk15(f, worst.a, mid, evals);
    detail::Segment right = detail::gk15(f, mid, worst.b, evals);
    total += left.value + right.value - worst.value;
    err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }
  // Re-sum to shed the accumulated rounding of the running updates.
  double sum = 0.0, esum = 0.0;
  while (!heap.empty()) {
    sum += heap.top().value;
    esum += heap.top().error;
    heap.pop();
  }
  return {sum, esum, evals};
}

}  // namespace memsim
