#pragma once

// State-bounding window functions f(x, sign(I)) for the linear drift model.

#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include "memsim/error.hpp"

namespace memsim {

enum class WindowKind { Benderli, Joglekar, Biolek, Shin };

struct WindowSpec {
  WindowKind kind = WindowKind::Joglekar;
  int p = 1;
  // Use σ(x − 1) instead of σ(x) on the negative-current branch of the Shin window.
  // The literal form is identically zero on [0, 1) and so forbids RESET.
  bool shin_literal = false;
};

inline std::string_view to_string(WindowKind k) {
  switch (k) {
    case WindowKind::Benderli: return "benderli";
    case WindowKind::Joglekar: return "joglekar";
    case WindowKind::Biolek: return "biolek";
    case WindowKind::Shin: return "shin";
  }
  return "?";
}

inline std::optional<WindowKind> parse_window_kind(std::string_view s) {
  if (s == "benderli") return WindowKind::Benderli;
  if (s == "joglekar") return WindowKind::Joglekar;
  if (s == "biolek") return WindowKind::Biolek;
  if (s == "shin") return WindowKind::Shin;
  return std::nullopt;
}

inline void validate(const WindowSpec& spec) {
  if (spec.p < 1) throw ValidationError("window.p must be >= 1");
}

namespace detail {

inline double step(double u) { return u > 0.0 ? 1.0 : 0.0; }

// 1 - |u|^(2p) given log|u|; stays accurate when |u| is within rounding of 1.
inline double one_minus_pow_even(double log_abs_u, int p) { return -std::expm1(2.0 * p * log_abs_u); }

// log|u| for u in [-1, 1] given as u = a - b with the subtraction done in log1p where it cancels.
inline double log_abs_2x_minus_1(double x) { return x < 0.5 ? std::log1p(-2.0 * x) : std::log1p(2.0 * x - 2.0); }
inline double log_abs_x(double x) { return x < 0.5 ? std::log(x) : std::log1p(x - 1.0); }
inline double log_abs_x_minus_1(double x) { return x < 0.5 ? std::log1p(-x) : std::log(1.0 - x); }

}  // namespace detail

/// Window value in [0, 1]. current_sign 0 is treated as +1.
inline double eval_window(const WindowSpec& spec, double x, int current_sign) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw ValidationError("window evaluated outside [0, 1]: x = " + std::to_string(x));
  }
  const bool positive = current_sign >= 0;
  switch (spec.kind) {
    case WindowKind::Benderli:
      return x * (1.0 - x);
    case WindowKind::Joglekar:
      return detail::one_minus_pow_even(detail::log_abs_2x_minus_1(x), spec.p);
    case WindowKind::Biolek:
      return detail::one_minus_pow_even(positive ? detail::log_abs_x(x) : detail::log_abs_x_minus_1(x), spec.p);
    case WindowKind::Shin:
      if (positive) return detail::step(1.0 - x);
      return spec.shin_literal ? detail::step(x - 1.0) : detail::step(x);
  }
  return 0.0;
}

}  // namespace memsim
