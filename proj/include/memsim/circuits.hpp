#pragma once

// Circuit topologies: one device with a series resistor, or two devices in
// anti-series (complementary resistive switch). Both share one branch current.

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "memsim/device.hpp"
#include "memsim/error.hpp"
#include "memsim/roots.hpp"

namespace memsim {

enum class Topology { Single, AntiSerial };

using State = std::array<double, 2>;

/// Branch-frame operating point. v_a and v_b are the voltage drops across the
/// devices along the branch, so v_a + v_b + i * r_ext = v_applied. A device's
/// own-frame voltage and current are its orientation times these.
struct OperatingPoint {
  double v_a = 0.0;
  double v_b = 0.0;
  double i = 0.0;
};

inline constexpr double kDegenerateCurrent = 1e-15;  // A

class CircuitSystem {
 public:
  CircuitSystem(Topology topology, std::vector<Device> devices, std::array<int, 2> orientation, double r_ext,
                State x0)
      : topology_(topology), devices_(std::move(devices)), orientation_(orientation), r_ext_(r_ext), x0_(x0) {
    if (!(r_ext_ >= 0.0)) throw ValidationError("series resistance must be >= 0");
    const std::size_t n = topology_ == Topology::Single ? 1 : 2;
    if (devices_.size() != n) throw ValidationError("topology/device count mismatch");
    for (std::size_t k = 0; k < n; ++k) {
      validate(devices_[k]);
      if (orientation_[k] != 1 && orientation_[k] != -1) throw ValidationError("orientation must be +1 or -1");
      const auto [lo, hi] = state_bounds(devices_[k]);
      if (!(x0_[k] >= lo && x0_[k] <= hi)) {
        throw ValidationError("initial state of device " + std::string(1, char('a' + k)) + " outside its bounds");
      }
    }
    if (n == 2) {
      if (orientation_[0] == orientation_[1]) throw ValidationError("anti-serial devices need opposite orientation");
      const bool short_partner = devices_[0].is<Resistor>() || devices_[1].is<Resistor>();
      if (!short_partner && family(devices_[0]) != family(devices_[1])) {
        throw ValidationError("mixed-kind CRS pairs are not supported");
      }
    }
  }

  Topology topology() const noexcept { return topology_; }
  int dim() const noexcept { return topology_ == Topology::Single ? 1 : 2; }
  const Device& device(int k) const { return devices_.at(static_cast<std::size_t>(k)); }
  int orientation(int k) const { return orientation_.at(static_cast<std::size_t>(k)); }
  double r_ext() const noexcept { return r_ext_; }
  State initial_state() const noexcept { return x0_; }

  State lower() const {
    State s{0.0, 0.0};
    for (int k = 0; k < dim(); ++k) s[k] = state_bounds(device(k))[0];
    return s;
  }
  State upper() const {
    State s{0.0, 0.0};
    for (int k = 0; k < dim(); ++k) s[k] = state_bounds(device(k))[1];
    return s;
  }

  double newton_tol = 1e-12;
  int max_newton_iters = 200;

  /// Solve the algebraic constraint for the branch current at applied voltage v.
  OperatingPoint partition(const State& x, double v) const {
    if (v == 0.0) return {0.0, 0.0, 0.0};
    return topology_ == Topology::Single ? partition_single(x, v) : partition_pair(x, v);
  }

  /// Own-frame state rates at operating point op.
  State rates(const State& x, const OperatingPoint& op) const {
    State r{0.0, 0.0};
    const double drops[2] = {op.v_a, op.v_b};
    for (int k = 0; k < dim(); ++k) {
      const int s = orientation(k);
      r[k] = device_rate(device(k), x[k], s * drops[k], s * op.i);
    }
    return r;
  }

  /// Branch current a device carries at a given branch-frame drop.
  double branch_current(int k, double x, double drop, double r_extra = 0.0) const {
    const int s = orientation(k);
    return s * terminal_current(device(k), x, s * drop, inner_tol(), r_extra);
  }

 private:
  double inner_tol() const { return std::max(1e-15, newton_tol * 1e-3); }

  OperatingPoint partition_single(const State& x, double v) const {
    const Device& d = device(0);
    if (is_ohmic(d)) {
      const double i = v / (ohmic_resistance(d, x[0]) + r_ext_);
      return {v - i * r_ext_, 0.0, i};
    }
    if (d.is<PickettParams>()) {
      const double i = branch_current(0, x[0], v, r_ext_);
      return {v - i * r_ext_, 0.0, i};
    }
    if (r_ext_ == 0.0) return {v, 0.0, branch_current(0, x[0], v)};
    auto residual = [&](double va) { return va + branch_current(0, x[0], va) * r_ext_ - v; };
    const RootResult rr = solve_scalar(residual, std::min(0.0, v), std::max(0.0, v), newton_tol * 1e-2,
                                       max_newton_iters);
    return {rr.root, 0.0, (v - rr.root) / r_ext_};
  }

  OperatingPoint partition_pair(const State& x, double v) const {
    const Device& a = device(0);
    const Device& b = device(1);
    if (is_ohmic(a) && is_ohmic(b)) {
      const double ra = ohmic_resistance(a, x[0]);
      const double rb = ohmic_resistance(b, x[1]);
      const double i = v / (ra + rb + r_ext_);
      return {i * ra, i * rb, i};
    }
    if (a.is<Resistor>() || b.is<Resistor>()) return partition_with_resistor(x, v);
    if (a.is<PickettParams>() && b.is<PickettParams>()) {
      if (gap_guess_) {
        if (auto op = pickett_pair_newton(x, v)) return *op;
      }
      const OperatingPoint op = partition_pair_nested(x, v);
      gap_guess_ = State{op.v_a - op.i * std::get<PickettParams>(a.model).r_s,
                         op.v_b - op.i * std::get<PickettParams>(b.model).r_s};
      return op;
    }
    return partition_pair_nested(x, v);
  }

  // Two-unknown Newton on the gap voltages, started from the previous
  // operating point. Returns nullopt whenever it leaves the barrier model's
  // validity region or fails to converge quickly.
  std::optional<OperatingPoint> pickett_pair_newton(const State& x, double v) const {
    const PickettParams& pa = std::get<PickettParams>(device(0).model);
    const PickettParams& pb = std::get<PickettParams>(device(1).model);
    const int sa = orientation(0);
    const int sb = orientation(1);
    const double r_tot = pa.r_s + pb.r_s + r_ext_;
    auto current = [&](const PickettParams& p, int s, double xk, double u) { return s * tunnel_current(p, xk, s * u); };
    double ua = (*gap_guess_)[0];
    double ub = (*gap_guess_)[1];
    const double h = 1e-7;
    try {
      for (int it = 0; it < 30; ++it) {
        const double ia = current(pa, sa, x[0], ua);
        const double ib = current(pb, sb, x[1], ub);
        const double ga = (current(pa, sa, x[0], ua + h) - ia) / h;
        const double gb = (current(pb, sb, x[1], ub + h) - ib) / h;
        if (!(ga > 0.0) || !(gb > 0.0)) return std::nullopt;
        const double f1 = ia - ib;
        const double f2 = ua + ub + ia * r_tot - v;
        // [[ga, -gb], [1 + ga r_tot, 1]] (dua, dub) = -(f1, f2)
        const double det = ga + gb * (1.0 + ga * r_tot);
        const double dua = (-f1 + gb * (-f2)) / det;
        const double dub = (-f2 * ga + f1 * (1.0 + ga * r_tot)) / det;
        if (!std::isfinite(dua) || !std::isfinite(dub) || std::abs(dua) > 0.5 || std::abs(dub) > 0.5) return std::nullopt;
        ua += dua;
        ub += dub;
        const double tol = newton_tol * 1e-2;
        if (std::abs(dua) <= tol * std::max(1.0, std::abs(ua)) && std::abs(dub) <= tol * std::max(1.0, std::abs(ub))) {
          const double i = current(pa, sa, x[0], ua);
          const double va = ua + i * pa.r_s;
          gap_guess_ = State{ua, ub};
          return OperatingPoint{va, v - va - i * r_ext_, i};
        }
      }
    } catch (const NonPhysicalRegime&) {
    }
    return std::nullopt;
  }

  OperatingPoint partition_pair_nested(const State& x, double v) const {
    auto current_a = [&](double va) { return branch_current(0, x[0], va); };
    // The residual rises monotonically in v_a. A device pushed past the
    // validity edge of its current law marks its side of the root.
    const double inf = std::numeric_limits<double>::infinity();
    auto residual = [&](double va) {
      double ia = 0.0;
      try {
        ia = current_a(va);
      } catch (const NonPhysicalRegime&) {
        return std::copysign(inf, va);
      }
      const double vb = v - va - ia * r_ext_;
      try {
        return ia - branch_current(1, x[1], vb);
      } catch (const NonPhysicalRegime&) {
        return -std::copysign(inf, vb);
      }
    };
    const double lo = std::min(0.0, v);
    const double hi = std::max(0.0, v);
    const double r_lo = residual(lo);
    const double r_hi = residual(hi);
    if (!std::isfinite(r_lo) && !std::isfinite(r_hi) && (r_lo > 0) == (r_hi > 0))
      throw NonPhysicalRegime("CRS split residual at both bracket ends", r_lo);
    if (std::abs(r_lo) < kDegenerateCurrent && std::abs(r_hi) < kDegenerateCurrent) {
      // Neither device can conduct measurably anywhere in the bracket.
      return {0.5 * v, 0.5 * v, 0.0};
    }
    const RootResult rr = solve_scalar(residual, lo, hi, newton_tol * 1e-2, max_newton_iters);
    const double ia = current_a(rr.root);
    return {rr.root, v - rr.root - ia * r_ext_, ia};
  }

  // One partner is a plain resistor: fold it into the series resistance.
  OperatingPoint partition_with_resistor(const State& x, double v) const {
    const int k = device(0).is<Resistor>() ? 1 : 0;
    const double r_fixed = std::get<Resistor>(device(1 - k).model).r;
    const double r_tot = r_fixed + r_ext_;
    const Device& d = device(k);
    double drop = v;
    double i = 0.0;
    if (d.is<PickettParams>() || r_tot == 0.0) {
      i = branch_current(k, x[k], v, r_tot);
      drop = v - i * r_tot;
    } else {
      auto residual = [&](double vd) { return vd + branch_current(k, x[k], vd) * r_tot - v; };
      const RootResult rr =
          solve_scalar(residual, std::min(0.0, v), std::max(0.0, v), newton_tol * 1e-2, max_newton_iters);
      drop = rr.root;
      i = (v - drop) / r_tot;
    }
    const double other = i * r_fixed;
    return k == 0 ? OperatingPoint{drop, other, i} : OperatingPoint{other, drop, i};
  }

  Topology topology_;
  std::vector<Device> devices_;
  std::array<int, 2> orientation_;
  double r_ext_;
  State x0_;
  mutable std::optional<State> gap_guess_;  // warm start for Pickett pairs
};

inline CircuitSystem single_device_system(const Device& d, double r_series, int orientation = 1) {
  return CircuitSystem(Topology::Single, {d}, {orientation, 1}, r_series, {initial_state(d), 0.0});
}

/// Anti-serial pair; device B is reversed. Initial states are in each device's own frame.
inline CircuitSystem crs_system(const Device& a, const Device& b, double x0a, double x0b, double r_ext = 0.0) {
  return CircuitSystem(Topology::AntiSerial, {a, b}, {1, -1}, r_ext, {x0a, x0b});
}

}  // namespace memsim
