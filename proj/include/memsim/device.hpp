#pragma once

// A single two-terminal device: one of the model families plus its initial state.

#include <array>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "memsim/error.hpp"
#include "memsim/linear_model.hpp"
#include "memsim/pickett_model.hpp"
#include "memsim/sinh_models.hpp"

namespace memsim {

struct LinearModel {
  LinearParams params;
  WindowSpec window;
};

// Stateless ohmic element; used as a CRS partner in identity checks.
struct Resistor {
  double r = 0.0;
};

using ModelVariant = std::variant<LinearModel, PickettParams, LaihoParams, ChangParams, YakopcicParams, Resistor>;

struct Device {
  std::string id;
  ModelVariant model;

  template <class T>
  bool is() const {
    return std::holds_alternative<T>(model);
  }
};

inline const std::vector<std::string>& model_ids() {
  static const std::vector<std::string> ids{"linear-benderli", "linear-joglekar", "linear-biolek", "linear-shin",
                                            "pickett",         "laiho",           "chang",         "yakopcic"};
  return ids;
}

/// Default-parameter device for a registered model id.
inline Device make_device(std::string_view id) {
  auto linear = [&](WindowKind k, double x0) {
    LinearModel m;
    m.window.kind = k;
    m.params.x0 = x0;
    return Device{std::string(id), m};
  };
  if (id == "linear-benderli") return linear(WindowKind::Benderli, 0.002);
  if (id == "linear-joglekar") return linear(WindowKind::Joglekar, 1e-12);
  if (id == "linear-biolek") return linear(WindowKind::Biolek, 0.0);
  if (id == "linear-shin") return linear(WindowKind::Shin, 0.0);
  if (id == "pickett") return Device{"pickett", PickettParams{}};
  if (id == "laiho") return Device{"laiho", LaihoParams{}};
  if (id == "chang") return Device{"chang", ChangParams{}};
  if (id == "yakopcic") return Device{"yakopcic", YakopcicParams{}};
  throw ValidationError("unknown model id '" + std::string(id) + "'");
}

inline void validate(const Device& d) {
  std::visit(
      [](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LinearModel>) {
          validate(m.params);
          validate(m.window);
        } else if constexpr (std::is_same_v<T, Resistor>) {
          if (!(m.r >= 0.0)) throw ValidationError("resistor: r must be >= 0");
        } else {
          validate(m);
        }
      },
      d.model);
}

/// Model family name, used to reject mixed-kind CRS pairs.
inline std::string_view family(const Device& d) {
  static constexpr std::array<std::string_view, 6> names{"linear", "pickett", "laiho", "chang", "yakopcic", "resistor"};
  return names[d.model.index()];
}

inline std::array<double, 2> state_bounds(const Device& d) {
  if (const auto* p = std::get_if<PickettParams>(&d.model)) return {p->w_min, p->w_max};
  if (d.is<Resistor>()) return {0.0, 0.0};
  return {0.0, 1.0};
}

inline double initial_state(const Device& d) {
  return std::visit(
      [](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LinearModel>) return m.params.x0;
        else if constexpr (std::is_same_v<T, PickettParams>) return m.w0;
        else if constexpr (std::is_same_v<T, Resistor>) return 0.0;
        else return m.x0;
      },
      d.model);
}

inline void set_initial_state(Device& d, double x0) {
  std::visit(
      [x0](auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LinearModel>) m.params.x0 = x0;
        else if constexpr (std::is_same_v<T, PickettParams>) m.w0 = x0;
        else if constexpr (!std::is_same_v<T, Resistor>) m.x0 = x0;
      },
      d.model);
}

/// +1 if the state grows toward the low-resistance state, -1 if it shrinks (tunnel gap).
inline int lrs_direction(const Device& d) { return d.is<PickettParams>() ? -1 : 1; }

/// Voltage polarity that drives the device toward LRS.
inline int set_polarity(const Device& d) { return d.is<PickettParams>() ? -1 : 1; }

/// Map a raw state to [0, 1] with 0 = HRS end of the range and 1 = LRS end.
inline double lrs_fraction(const Device& d, double x) {
  const auto [lo, hi] = state_bounds(d);
  if (hi == lo) return 0.0;
  const double s = (x - lo) / (hi - lo);
  return lrs_direction(d) > 0 ? s : 1.0 - s;
}

/// Devices whose port relation is a plain resistance R(x).
inline bool is_ohmic(const Device& d) { return d.is<LinearModel>() || d.is<Resistor>(); }

inline double ohmic_resistance(const Device& d, double x) {
  if (const auto* m = std::get_if<LinearModel>(&d.model)) return resistance(m->params, x);
  if (const auto* r = std::get_if<Resistor>(&d.model)) return r->r;
  throw ValidationError("ohmic_resistance on a non-ohmic device");
}

/// Internal series resistance that a circuit may fold into its external resistor.
inline double internal_series_resistance(const Device& d) {
  if (const auto* p = std::get_if<PickettParams>(&d.model)) return p->r_s;
  return 0.0;
}

/// Own-frame terminal current at terminal voltage v. Pickett solves its
/// internal series-resistance loop (plus r_extra) to tol.
inline double terminal_current(const Device& d, double x, double v, double tol = 1e-13, double r_extra = 0.0) {
  return std::visit(
      [&](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LinearModel>) {
          return v / (resistance(m.params, x) + r_extra);
        } else if constexpr (std::is_same_v<T, Resistor>) {
          return v / (m.r + r_extra);
        } else if constexpr (std::is_same_v<T, PickettParams>) {
          return solve_device_current(m, v, x, tol, r_extra).i;
        } else {
          if (r_extra != 0.0) throw ValidationError("terminal_current: r_extra only supported for pickett");
          return sinh_current(m, x, v);
        }
      },
      d.model);
}

/// Own-frame state rate given terminal voltage v and current i.
inline double device_rate(const Device& d, double x, double v, double i) {
  return std::visit(
      [&](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LinearModel>) return state_rate(m.params, m.window, x, i);
        else if constexpr (std::is_same_v<T, PickettParams>) return state_rate(m, x, i);
        else if constexpr (std::is_same_v<T, Resistor>) return 0.0;
        else return sinh_rate(m, x, v);
      },
      d.model);
}

}  // namespace memsim
