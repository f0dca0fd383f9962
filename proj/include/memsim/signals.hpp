#pragma once

// Piecewise-linear excitation waveforms: triangular sweeps, rectangular pulses,
// and user-specified breakpoint lists.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "memsim/error.hpp"

namespace memsim {

struct Breakpoint {
  double t;  // seconds
  double v;  // volts
};

enum class StartPolarity { Positive, Negative };

/// Immutable piecewise-linear voltage signal.
///
/// Breakpoints start at t = 0 and are strictly increasing in time. A periodic
/// waveform stores exactly one period (last breakpoint at t = period) and is
/// sampled modulo the period; `cycles` only sets the nominal duration.
class Waveform {
 public:
  Waveform(std::vector<Breakpoint> points, double period, std::string label, int cycles = 1)
      : points_(std::move(points)), period_(period), cycles_(cycles), label_(std::move(label)) {
    if (points_.size() < 2) throw ValidationError("waveform needs at least two breakpoints");
    if (points_.front().t != 0.0) throw ValidationError("waveform must start at t = 0");
    for (std::size_t k = 1; k < points_.size(); ++k) {
      if (!(points_[k].t > points_[k - 1].t)) {
        throw ValidationError("waveform breakpoint times must be strictly increasing");
      }
    }
    for (const auto& p : points_) {
      if (!std::isfinite(p.t) || !std::isfinite(p.v)) throw ValidationError("waveform breakpoint not finite");
    }
    if (period_ < 0.0) throw ValidationError("waveform period must be >= 0");
    if (cycles_ < 1) throw ValidationError("waveform cycles must be >= 1");
    if (period_ > 0.0) {
      if (points_.back().t != period_) {
        throw ValidationError("periodic waveform must end exactly at t = period");
      }
      if (points_.front().v != points_.back().v) {
        throw ValidationError("periodic waveform must start and end at the same voltage");
      }
    }
  }

  const std::vector<Breakpoint>& breakpoints() const noexcept { return points_; }
  double period() const noexcept { return period_; }
  bool periodic() const noexcept { return period_ > 0.0; }
  int cycles() const noexcept { return cycles_; }
  const std::string& label() const noexcept { return label_; }

  /// Nominal run length: `cycles` periods, or the last breakpoint for one-shot signals.
  double duration() const noexcept { return periodic() ? period_ * cycles_ : points_.back().t; }

  double sample(double t) const {
    if (!(t >= 0.0)) throw ValidationError("waveform sampled at negative time");
    double local = t;
    if (periodic()) {
      local = std::fmod(t, period_);
    } else if (t > points_.back().t) {
      throw ValidationError("waveform '" + label_ + "' sampled past its last breakpoint");
    }
    auto it = std::upper_bound(points_.begin(), points_.end(), local,
                               [](double value, const Breakpoint& b) { return value < b.t; });
    if (it == points_.end()) return points_.back().v;
    if (it == points_.begin()) return points_.front().v;
    const Breakpoint& b = *it;
    const Breakpoint& a = *(it - 1);
    if (local == a.t) return a.v;
    const double s = (local - a.t) / (b.t - a.t);
    return a.v + s * (b.v - a.v);
  }

  /// First breakpoint strictly after t, unrolling periodic signals; +inf if none.
  double next_breakpoint_after(double t) const {
    double base = 0.0;
    double local = t;
    if (periodic()) {
      base = std::floor(t / period_) * period_;
      local = t - base;
    }
    for (const auto& p : points_) {
      const double abs_t = base + p.t;
      if (abs_t > t && abs_t - t > 1e-15 * std::max(1.0, std::abs(t))) return abs_t;
    }
    if (periodic()) {
      // `local` sat at or past the last stored point; continue into the next period.
      return base + period_ + points_[1].t;
    }
    (void)local;
    return std::numeric_limits<double>::infinity();
  }

  Waveform negated() const {
    std::vector<Breakpoint> pts = points_;
    for (auto& p : pts) p.v = -p.v;
    return Waveform(std::move(pts), period_, "-" + label_, cycles_);
  }

 private:
  std::vector<Breakpoint> points_;
  double period_;
  int cycles_;
  std::string label_;
};

/// Symmetric-slope triangular sweep 0 -> amp_pos -> amp_neg -> 0 (or the
/// negative lobe first). |dV/dt| equals `rate` everywhere.
inline Waveform triangular_sweep(double amplitude_pos, double amplitude_neg, double rate, int cycles,
                                 StartPolarity start = StartPolarity::Positive) {
  if (!(rate > 0.0) || !std::isfinite(rate)) throw ValidationError("sweep rate must be > 0");
  if (!(amplitude_pos > 0.0)) throw ValidationError("sweep amplitude_pos must be > 0");
  if (!(amplitude_neg < 0.0)) throw ValidationError("sweep amplitude_neg must be < 0");
  if (cycles < 1) throw ValidationError("sweep cycles must be >= 1");

  const double first = start == StartPolarity::Positive ? amplitude_pos : amplitude_neg;
  const double second = start == StartPolarity::Positive ? amplitude_neg : amplitude_pos;
  const double t1 = std::abs(first) / rate;
  const double t2 = t1 + std::abs(first - second) / rate;
  const double t3 = t2 + std::abs(second) / rate;
  std::vector<Breakpoint> pts{{0.0, 0.0}, {t1, first}, {t2, second}, {t3, 0.0}};
  std::string label = "triangular(" + std::to_string(amplitude_pos) + "," + std::to_string(amplitude_neg) +
                      "," + std::to_string(rate) + "V/s)";
  return Waveform(std::move(pts), t3, std::move(label), cycles);
}

/// Rectangular pulse with finite linear edges, starting at 0 V.
inline Waveform rectangular_pulse(double height, double width, double rise_time = 1e-9, double delay = 0.0) {
  if (!(rise_time > 0.0)) throw ValidationError("pulse rise time must be > 0");
  if (!(width > 0.0)) throw ValidationError("pulse width must be > 0");
  if (delay < 0.0) throw ValidationError("pulse delay must be >= 0");
  if (height == 0.0 || !std::isfinite(height)) throw ValidationError("pulse height must be nonzero");
  std::vector<Breakpoint> pts{{0.0, 0.0}};
  if (delay > 0.0) pts.push_back({delay, 0.0});
  pts.push_back({delay + rise_time, height});
  pts.push_back({delay + rise_time + width, height});
  pts.push_back({delay + 2.0 * rise_time + width, 0.0});
  return Waveform(std::move(pts), 0.0, "pulse(" + std::to_string(height) + "V)");
}

/// Explicit breakpoint list. period > 0 makes it periodic.
inline Waveform custom_waveform(std::span<const Breakpoint> points, double period = 0.0, int cycles = 1) {
  return Waveform(std::vector<Breakpoint>(points.begin(), points.end()), period, "custom", cycles);
}

}  // namespace memsim
