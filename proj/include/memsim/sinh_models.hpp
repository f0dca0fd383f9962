#pragma once

// Generalized hyperbolic-sine models: Laiho, Chang and Yakopcic.

#include <cmath>
#include <string>

#include "memsim/error.hpp"
#include "memsim/windows.hpp"

namespace memsim {

struct LaihoParams {
  double a1 = 1e-8, a2 = 1e-8;  // A
  double b1 = 1.5, b2 = 1.5;    // 1/V
  double c1 = 0.2, c2 = 0.2;    // 1/s
  double d1 = 2.0, d2 = 2.0;    // 1/V
  WindowSpec window{WindowKind::Biolek, 1, false};
  double x0 = 0.0;
};

struct ChangParams {
  double alpha = 1e-6;       // A
  double beta = 1.0;         // 1/V
  double gamma = 4e-6;       // A
  double delta = 2.0;        // 1/V
  double lambda_rate = 1.0;
  double eta1 = 0.05;        // 1/s
  double eta2 = 3.0;         // 1/V
  double x0 = 0.0;
  // Use 1 - exp(-beta V) in the first current term, which keeps that term passive for beta > 0.
  bool sign_corrected = false;
};

struct YakopcicParams {
  double a1 = 1e-4, a2 = 1e-4;  // A
  double b = 1.0;               // 1/V
  int eta = 1;
  double a_pos = 10.0, a_neg = 10.0;         // 1/s
  double v_th_pos = 1.2, v_th_neg = 1.2;     // V
  double x_p = 0.8, x_n = 0.8;
  double alpha_p = 1.0, alpha_n = 1.0;
  double x0 = 0.01;
};

namespace detail {
inline void check_state(double x, const char* model) {
  if (!(x >= 0.0 && x <= 1.0)) throw ValidationError(std::string(model) + ": state outside [0, 1]");
}
inline void check_x0(double x0, const char* model) {
  if (!(x0 >= 0.0 && x0 <= 1.0)) throw ValidationError(std::string(model) + ": x0 must lie in [0, 1]");
}
}  // namespace detail

inline void validate(const LaihoParams& p) {
  if (!(p.c1 > 0.0 && p.c2 > 0.0 && p.d1 > 0.0 && p.d2 > 0.0)) {
    throw ValidationError("laiho: rate parameters c1, c2, d1, d2 must be > 0");
  }
  if (!(p.a1 > 0.0 && p.a2 > 0.0 && p.b1 > 0.0 && p.b2 > 0.0)) {
    throw ValidationError("laiho: current parameters a1, a2, b1, b2 must be > 0");
  }
  validate(p.window);
  detail::check_x0(p.x0, "laiho");
}

inline void validate(const ChangParams& p) {
  if (!(p.eta1 > 0.0 && p.eta2 > 0.0 && p.lambda_rate > 0.0)) {
    throw ValidationError("chang: lambda, eta1, eta2 must be > 0");
  }
  detail::check_x0(p.x0, "chang");
}

inline void validate(const YakopcicParams& p) {
  if (p.eta != 1 && p.eta != -1) throw ValidationError("yakopcic: eta must be +1 or -1");
  if (!(p.x_p > 0.0 && p.x_p < 1.0 && p.x_n > 0.0 && p.x_n < 1.0)) {
    throw ValidationError("yakopcic: x_p and x_n must lie in (0, 1)");
  }
  if (!(p.v_th_pos >= 0.0 && p.v_th_neg >= 0.0)) throw ValidationError("yakopcic: thresholds must be >= 0");
  if (!(p.a_pos > 0.0 && p.a_neg > 0.0)) throw ValidationError("yakopcic: a_pos and a_neg must be > 0");
  detail::check_x0(p.x0, "yakopcic");
}

// ---- Laiho ----

inline double sinh_current(const LaihoParams& p, double x, double v) {
  detail::check_state(x, "laiho");
  return v >= 0.0 ? p.a1 * x * std::sinh(p.b1 * v) : p.a2 * x * std::sinh(p.b2 * v);
}

inline double sinh_rate(const LaihoParams& p, double x, double v) {
  detail::check_state(x, "laiho");
  if (v == 0.0) return 0.0;
  const int s = v > 0.0 ? 1 : -1;
  const double drive = v > 0.0 ? p.c1 * std::sinh(p.d1 * v) : p.c2 * std::sinh(p.d2 * v);
  return drive * eval_window(p.window, x, s);
}

// ---- Chang ----

inline double sinh_current(const ChangParams& p, double x, double v) {
  detail::check_state(x, "chang");
  const double ex = p.sign_corrected ? std::exp(-p.beta * v) : std::exp(p.beta * v);
  return (1.0 - x) * p.alpha * (1.0 - ex) + x * p.gamma * std::sinh(p.delta * v);
}

inline double sinh_rate(const ChangParams& p, double x, double v) {
  detail::check_state(x, "chang");
  return p.lambda_rate * p.eta1 * std::sinh(p.eta2 * v);
}

// ---- Yakopcic ----

inline double yakopcic_window(const YakopcicParams& p, double x) {
  if (x >= p.x_p) return std::exp(-p.alpha_p * (x - p.x_p)) * ((p.x_p - x) / (1.0 - p.x_p) + 1.0);
  if (x <= 1.0 - p.x_n) return std::exp(p.alpha_n * (x + p.x_n - 1.0)) * (x / (1.0 - p.x_n));
  return 1.0;
}

inline double yakopcic_threshold(const YakopcicParams& p, double v) {
  if (v > p.v_th_pos) return p.a_pos * (std::exp(v) - std::exp(p.v_th_pos));
  if (v < -p.v_th_neg) return -p.a_neg * (std::exp(-v) - std::exp(p.v_th_neg));
  return 0.0;
}

inline double sinh_current(const YakopcicParams& p, double x, double v) {
  detail::check_state(x, "yakopcic");
  return v >= 0.0 ? p.a1 * x * std::sinh(p.b * v) : p.a2 * x * std::sinh(p.b * v);
}

inline double sinh_rate(const YakopcicParams& p, double x, double v) {
  detail::check_state(x, "yakopcic");
  const double g = yakopcic_threshold(p, v);
  if (g == 0.0) return 0.0;
  return p.eta * g * yakopcic_window(p, x);
}

}  // namespace memsim
