#pragma once

// TiO2 tunnel-gap model: Simmons barrier current through a gap of width w,
// double-exponential gap dynamics, and an internal series resistance.

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>

#include "memsim/error.hpp"
#include "memsim/roots.hpp"

namespace memsim {

namespace phys {
inline constexpr double e = 1.602176634e-19;       // C
inline constexpr double m_e = 9.1093837015e-31;    // kg
inline constexpr double h = 6.62607015e-34;        // J s
inline constexpr double eps0 = 8.8541878128e-12;   // F/m
}  // namespace phys

enum class BarrierForm {
  AsPrinted,  // e|V_g| (w1 + w2) / w
  Simmons,    // e|V_g| (w1 + w2) / (2 w), Simmons' intermediate-voltage form
};

inline std::optional<BarrierForm> parse_barrier_form(std::string_view s) {
  if (s == "as_printed") return BarrierForm::AsPrinted;
  if (s == "simmons") return BarrierForm::Simmons;
  return std::nullopt;
}

inline std::string_view to_string(BarrierForm f) { return f == BarrierForm::AsPrinted ? "as_printed" : "simmons"; }

struct PickettParams {
  double phi0 = 0.95;        // eV
  double area = 1e-14;       // m^2
  double r_s = 215.0;        // ohm
  double f_off = 3.5e-6;     // m/s
  double f_on = 40e-6;       // m/s
  double i_off = 115e-6;     // A
  double i_on = 8.9e-6;      // A
  double a_off = 1.2e-9;     // m
  double a_on = 1.8e-9;      // m
  double w_c = 107e-12;      // m
  double b = 500e-6;         // A
  double w0 = 2.0e-9;        // m
  double w_min = 1.0e-9;     // m
  double w_max = 2.0e-9;     // m
  double kappa = 5.0;
  BarrierForm barrier_form = BarrierForm::AsPrinted;
};

inline void validate(const PickettParams& p) {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(std::string("pickett: ") + name + " must be > 0");
  };
  positive(p.phi0, "phi0");
  positive(p.area, "area");
  positive(p.f_off, "f_off");
  positive(p.f_on, "f_on");
  positive(p.i_off, "i_off");
  positive(p.i_on, "i_on");
  positive(p.a_off, "a_off");
  positive(p.a_on, "a_on");
  positive(p.w_c, "w_c");
  positive(p.b, "b");
  positive(p.kappa, "kappa");
  positive(p.w_min, "w_min");
  if (!(p.r_s >= 0.0)) throw ValidationError("pickett: r_s must be >= 0");
  if (!(p.w_min < p.w_max)) throw ValidationError("pickett: need w_min < w_max");
  if (!(p.w0 >= p.w_min && p.w0 <= p.w_max)) throw ValidationError("pickett: w0 outside [w_min, w_max]");
}

struct BarrierGeometry {
  double w1;      // m
  double w2;      // m
  double dw;      // m
  double lambda;  // eV
  double phi_i;   // eV
  double B;       // 1/sqrt(eV)
};

/// Image-force-lowered barrier for gap w at gap voltage v_g.
inline BarrierGeometry barrier_geometry(const PickettParams& p, double w, double v_g) {
  if (!(w > 0.0)) throw ValidationError("pickett: gap width must be > 0");
  using namespace phys;
  const double lambda = e * std::numbers::ln2 / (8.0 * std::numbers::pi * p.kappa * eps0 * w);  // eV
  const double ev = std::abs(v_g);                                                                // eV
  const double w1 = 1.2 * lambda * w / p.phi0;
  const double denom = 3.0 * p.phi0 + 4.0 * lambda - 2.0 * ev;
  if (!(denom > 0.0)) throw NonPhysicalRegime("3*phi0 + 4*lambda - 2e|V_g| [eV]", denom);
  const double w2 = w1 + w * (1.0 - 9.2 * lambda / denom);
  const double dw = w2 - w1;
  if (!(dw > 0.0)) throw NonPhysicalRegime("w2 - w1 [m]", dw);
  if (!(w2 < w)) throw NonPhysicalRegime("w - w2 [m]", w - w2);
  const double log_arg = w2 * (w - w1) / (w1 * (w - w2));
  if (!(log_arg > 0.0)) throw NonPhysicalRegime("image-force log argument", log_arg);
  const double field_share = p.barrier_form == BarrierForm::AsPrinted ? (w1 + w2) / w : (w1 + w2) / (2.0 * w);
  const double phi_i = p.phi0 - ev * field_share - (1.15 * lambda * w / dw) * std::log(log_arg);
  if (!(phi_i > 0.0)) throw NonPhysicalRegime("phi_I [eV]", phi_i);
  // 4 pi dw sqrt(2 m) / h, with sqrt(eV) converted to sqrt(J).
  const double B = 4.0 * std::numbers::pi * dw * std::sqrt(2.0 * m_e * e) / h;
  return {w1, w2, dw, lambda, phi_i, B};
}

/// Signed tunnel current, sign(v_g) * |I|.
inline double tunnel_current(const PickettParams& p, double w, double v_g) {
  if (v_g == 0.0) return 0.0;
  using namespace phys;
  const BarrierGeometry g = barrier_geometry(p, w, v_g);
  const double ev = std::abs(v_g);
  // J0 = e / (2 pi h) in A/J; energies below are in eV, hence the extra factor e.
  const double prefactor = e * e / (2.0 * std::numbers::pi * h) * p.area / (g.dw * g.dw);
  const double braced = g.phi_i * std::exp(-g.B * std::sqrt(g.phi_i)) -
                        (g.phi_i + ev) * std::exp(-g.B * std::sqrt(g.phi_i + ev));
  const double magnitude = prefactor * braced;
  if (!(magnitude > 0.0)) throw NonPhysicalRegime("tunnel current magnitude [A]", magnitude);
  return std::copysign(magnitude, v_g);
}

namespace detail {

inline double log_sinh(double z) {
  if (z > 20.0) return z - std::numbers::ln2 + std::log1p(-std::exp(-2.0 * z));
  return std::log(std::sinh(z));
}

// f * sinh(z) * exp(-exp(u) - w/w_c), assembled in log space.
inline double double_exp_rate(double f, double z, double u, double w_over_wc) {
  const double outer = (u > 709.0 ? -std::numeric_limits<double>::infinity() : -std::exp(u)) - w_over_wc;
  if (outer <= -745.0) return 0.0;
  return f * std::exp(outer + log_sinh(z));
}

}  // namespace detail

/// dw/dt in m/s. Positive current opens the gap (RESET), negative closes it (SET).
inline double state_rate(const PickettParams& p, double w, double i) {
  if (i == 0.0) return 0.0;
  const double a = std::abs(i);
  if (i > 0.0) {
    return detail::double_exp_rate(p.f_off, a / p.i_off, (w - p.a_off) / p.w_c - a / p.b, w / p.w_c);
  }
  return -detail::double_exp_rate(p.f_on, a / p.i_on, (p.a_on - w) / p.w_c - a / p.b, w / p.w_c);
}

struct DeviceCurrent {
  double i;    // A
  double v_g;  // V
};

/// Solve v_g + I(w, v_g) (R_s + r_extra) = v_device for the gap voltage.
///
/// The bracket is [min(0, v), max(0, v)]. Points where the barrier model is
/// non-physical, or where |I| no longer grows with |v_g|, are treated as
/// lying beyond the root.
inline DeviceCurrent solve_device_current(const PickettParams& p, double v_device, double w, double tol = 1e-13,
                                          double r_extra = 0.0, RootMethod method = RootMethod::NewtonBisection,
                                          int max_iters = 200) {
  const double r = p.r_s + r_extra;
  if (v_device == 0.0) return {0.0, 0.0};
  if (r == 0.0) return {tunnel_current(p, w, v_device), v_device};
  // Past the current maximum near the validity edge the residual turns back
  // down and would create spurious roots; those points count as beyond.
  auto residual = [&](double vg) {
    const double beyond = std::copysign(std::numeric_limits<double>::infinity(), vg);
    double i = 0.0;
    try {
      i = tunnel_current(p, w, vg);
      if (vg != 0.0 && std::abs(tunnel_current(p, w, vg + std::copysign(1e-6, vg))) <= std::abs(i)) return beyond;
    } catch (const NonPhysicalRegime&) {
      return beyond;
    }
    return vg + i * r - v_device;
  };
  const double lo = std::min(0.0, v_device);
  const double hi = std::max(0.0, v_device);
  const RootResult root = solve_scalar(residual, lo, hi, tol, max_iters, method);
  if (!std::isfinite(root.residual) || std::abs(root.residual) > 1e3 * tol * std::max(1.0, std::abs(v_device))) {
    // The loop equation has no solution inside the barrier model's validity region.
    throw NonPhysicalRegime("series-loop residual at the barrier validity edge [V] (v_device = " + std::to_string(v_device) + ", w = " + std::to_string(w * 1e9) + " nm)", root.residual);
  }
  const double i = tunnel_current(p, w, root.root);
  return {i, root.root};
}

}  // namespace memsim
