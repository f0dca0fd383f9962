#pragma once

// Experiment configuration: strict JSON parsing into a fully validated
// ExperimentConfig. Unknown keys and wrong types are validation errors.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "memsim/device.hpp"
#include "memsim/error.hpp"
#include "memsim/eval.hpp"
#include "memsim/signals.hpp"
#include "memsim/solver.hpp"

namespace memsim {

using json = nlohmann::json;

enum class ExperimentKind { Sweep, Kinetics, Crs, WindowShapes };

inline std::string_view to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::Sweep: return "sweep";
    case ExperimentKind::Kinetics: return "kinetics";
    case ExperimentKind::Crs: return "crs";
    case ExperimentKind::WindowShapes: return "window_shapes";
  }
  return "?";
}

struct ModelEntry {
  Device device;
  std::string label;
  std::vector<double> heights;  // kinetics only; empty inherits pulse.heights
};

struct SweepSpec {
  double amplitude_pos = 1.0;
  double amplitude_neg = -1.0;
  std::vector<double> rates{10.0};
  int cycles = 1;
  std::optional<StartPolarity> start;  // empty: the model's SET polarity first
};

struct PulseSpec {
  std::vector<double> heights;
  ThresholdRule rule = ThresholdRule::FixedHalf;
  double t_end = 100.0;
  double saturation_t_end = 1e4;
  std::optional<double> v_p1;
};

struct ShapeSpec {
  std::vector<WindowSpec> windows;
  int points = 201;
};

struct OutputSpec {
  std::string dir;  // empty: MEMSIM_OUT_DIR or the working directory
  bool csv = true;
  bool json = false;
  bool svg = true;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::string description;
  ExperimentKind kind = ExperimentKind::Sweep;
  std::vector<ModelEntry> models;
  SweepSpec sweep;
  PulseSpec pulse;
  ShapeSpec shapes;
  std::optional<double> x0a, x0b;
  double r_ext = 0.0;
  CrsOptions crs;
  SolverConfig solver;
  OutputSpec output;
  std::string hash;  // FNV-1a of the canonical JSON input
};

namespace detail {

// Tracks which keys of a JSON object were consumed; finish() rejects the rest.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ValidationError(where() + ": expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& raw(const std::string& key) {
    used_.insert(key);
    return j_.at(key);
  }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_number()) throw ValidationError(where(key) + ": expected a number");
    return v.get<double>();
  }

  std::optional<double> maybe_number(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return number(key, 0.0);
  }

  int integer(const std::string& key, int fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_number_integer()) throw ValidationError(where(key) + ": expected an integer");
    return v.get<int>();
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_boolean()) throw ValidationError(where(key) + ": expected true or false");
    return v.get<bool>();
  }

  std::string text(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_string()) throw ValidationError(where(key) + ": expected a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key) {
    if (!has(key)) return {};
    const json& v = raw(key);
    if (!v.is_array()) throw ValidationError(where(key) + ": expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) throw ValidationError(where(key) + ": expected an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  ObjectReader object(const std::string& key) { return ObjectReader(raw(key), where(key)); }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!used_.count(key)) throw ValidationError(where(key) + ": unknown key");
    }
  }

  std::string where(const std::string& key = "") const {
    if (key.empty()) return path_.empty() ? "config" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

inline WindowSpec read_window(ObjectReader r, WindowSpec w) {
  if (r.has("kind")) {
    const std::string k = r.text("kind", "");
    auto kind = parse_window_kind(k);
    if (!kind) throw ValidationError(r.where("kind") + ": unknown window '" + k + "'");
    w.kind = *kind;
  }
  w.p = r.integer("p", w.p);
  w.shin_literal = r.boolean("shin_literal", w.shin_literal);
  r.finish();
  validate(w);
  return w;
}

inline void read_params(ObjectReader r, Device& d) {
  std::visit(
      [&](auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LinearModel>) {
          auto& p = m.params;
          p.k1 = r.number("k1", p.k1);
          p.r_lrs = r.number("r_lrs", p.r_lrs);
          p.r_hrs = r.number("r_hrs", p.r_hrs);
          p.thickness = r.number("thickness", p.thickness);
          p.x0 = r.number("x0", p.x0);
        } else if constexpr (std::is_same_v<T, PickettParams>) {
          m.phi0 = r.number("phi0", m.phi0);
          m.area = r.number("area", m.area);
          m.r_s = r.number("r_s", m.r_s);
          m.f_off = r.number("f_off", m.f_off);
          m.f_on = r.number("f_on", m.f_on);
          m.i_off = r.number("i_off", m.i_off);
          m.i_on = r.number("i_on", m.i_on);
          m.a_off = r.number("a_off", m.a_off);
          m.a_on = r.number("a_on", m.a_on);
          m.w_c = r.number("w_c", m.w_c);
          m.b = r.number("b", m.b);
          m.w0 = r.number("w0", m.w0);
          m.w_min = r.number("w_min", m.w_min);
          m.w_max = r.number("w_max", m.w_max);
          m.kappa = r.number("kappa", m.kappa);
          if (r.has("barrier_form")) {
            const std::string s = r.text("barrier_form", "");
            auto f = parse_barrier_form(s);
            if (!f) throw ValidationError(r.where("barrier_form") + ": expected \"as_printed\" or \"simmons\"");
            m.barrier_form = *f;
          }
        } else if constexpr (std::is_same_v<T, LaihoParams>) {
          m.a1 = r.number("a1", m.a1);
          m.a2 = r.number("a2", m.a2);
          m.b1 = r.number("b1", m.b1);
          m.b2 = r.number("b2", m.b2);
          m.c1 = r.number("c1", m.c1);
          m.c2 = r.number("c2", m.c2);
          m.d1 = r.number("d1", m.d1);
          m.d2 = r.number("d2", m.d2);
          m.window.p = r.integer("window_p", m.window.p);
          m.x0 = r.number("x0", m.x0);
        } else if constexpr (std::is_same_v<T, ChangParams>) {
          m.alpha = r.number("alpha", m.alpha);
          m.beta = r.number("beta", m.beta);
          m.gamma = r.number("gamma", m.gamma);
          m.delta = r.number("delta", m.delta);
          m.lambda_rate = r.number("lambda", m.lambda_rate);
          m.eta1 = r.number("eta1", m.eta1);
          m.eta2 = r.number("eta2", m.eta2);
          m.x0 = r.number("x0", m.x0);
          m.sign_corrected = r.boolean("sign_corrected", m.sign_corrected);
        } else if constexpr (std::is_same_v<T, YakopcicParams>) {
          m.a1 = r.number("a1", m.a1);
          m.a2 = r.number("a2", m.a2);
          m.b = r.number("b", m.b);
          m.eta = r.integer("eta", m.eta);
          m.a_pos = r.number("a_pos", m.a_pos);
          m.a_neg = r.number("a_neg", m.a_neg);
          m.v_th_pos = r.number("v_th_pos", m.v_th_pos);
          m.v_th_neg = r.number("v_th_neg", m.v_th_neg);
          m.x_p = r.number("x_p", m.x_p);
          m.x_n = r.number("x_n", m.x_n);
          m.alpha_p = r.number("alpha_p", m.alpha_p);
          m.alpha_n = r.number("alpha_n", m.alpha_n);
          m.x0 = r.number("x0", m.x0);
        } else {
          m.r = r.number("r", m.r);
        }
      },
      d.model);
  r.finish();
}

// "model" plus optional "window" and "params" keys, shared by the top level
// and by entries of "models".
inline ModelEntry read_model(ObjectReader& r) {
  std::string id = r.text("model", "");
  if (id.empty()) throw ValidationError(r.where("model") + ": missing model id");
  std::optional<WindowSpec> window_override;
  if (id == "linear") {
    if (!r.has("window")) throw ValidationError(r.where("window") + ": model \"linear\" needs a window");
    const WindowSpec w = read_window(r.object("window"), WindowSpec{});
    id = "linear-" + std::string(to_string(w.kind));
    window_override = w;
  }
  ModelEntry e{make_device(id), id, {}};
  if (auto* lin = std::get_if<LinearModel>(&e.device.model)) {
    if (window_override) lin->window = *window_override;
    else if (r.has("window")) lin->window = read_window(r.object("window"), lin->window);
  } else if (r.has("window")) {
    throw ValidationError(r.where("window") + ": only linear models take a window");
  }
  if (r.has("params")) read_params(r.object("params"), e.device);
  validate(e.device);
  return e;
}

inline std::optional<StartPolarity> read_start(const std::string& s, const std::string& where) {
  if (s == "set") return std::nullopt;
  if (s == "positive") return StartPolarity::Positive;
  if (s == "negative") return StartPolarity::Negative;
  throw ValidationError(where + ": expected \"set\", \"positive\" or \"negative\"");
}

inline void require_increasing_positive(const std::vector<double>& v, const std::string& where) {
  if (v.empty()) throw ValidationError(where + ": must not be empty");
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (!(v[k] > 0.0) || !std::isfinite(v[k])) throw ValidationError(where + ": values must be positive");
    if (k > 0 && !(v[k] > v[k - 1])) throw ValidationError(where + ": values must be strictly increasing");
  }
}

inline SolverConfig read_solver(ObjectReader r, SolverConfig c) {
  c.rel_tol = r.number("rel_tol", c.rel_tol);
  c.abs_tol = r.number("abs_tol", c.abs_tol);
  c.max_step = r.number("max_step", c.max_step);
  c.min_step = r.number("min_step", c.min_step);
  c.max_newton_iters = r.integer("max_newton_iters", c.max_newton_iters);
  c.newton_tol = r.number("newton_tol", c.newton_tol);
  c.clamp_states = r.boolean("clamp_states", c.clamp_states);
  c.output_interval = r.number("output_interval", c.output_interval);
  c.max_step_time_fraction = r.number("max_step_time_fraction", c.max_step_time_fraction);
  c.max_steps = static_cast<std::size_t>(r.number("max_steps", static_cast<double>(c.max_steps)));
  r.finish();
  validate(c);
  return c;
}

}  // namespace detail

inline std::string config_hash(const json& j) { return fnv1a_hex(j.dump()); }

/// Parse and validate a complete experiment description.
inline ExperimentConfig parse_config(const json& j) {
  using detail::ObjectReader;
  ExperimentConfig c;
  ObjectReader r(j, "");
  c.hash = config_hash(j);
  c.name = r.text("name", c.name);
  c.description = r.text("description", "");

  const std::string kind = r.text("kind", "sweep");
  if (kind == "sweep") c.kind = ExperimentKind::Sweep;
  else if (kind == "kinetics") c.kind = ExperimentKind::Kinetics;
  else if (kind == "crs") c.kind = ExperimentKind::Crs;
  else if (kind == "window_shapes") c.kind = ExperimentKind::WindowShapes;
  else throw ValidationError("kind: unknown experiment kind '" + kind + "'");

  if (r.has("model") && r.has("models")) throw ValidationError("config: give either \"model\" or \"models\"");
  if (r.has("model")) {
    c.models.push_back(detail::read_model(r));
  } else if (r.has("models")) {
    const json& list = r.raw("models");
    if (!list.is_array() || list.empty()) throw ValidationError("models: expected a non-empty array");
    for (std::size_t k = 0; k < list.size(); ++k) {
      ObjectReader m(list[k], "models[" + std::to_string(k) + "]");
      ModelEntry e = detail::read_model(m);
      e.label = m.text("label", e.label);
      e.heights = m.numbers("heights");
      m.finish();
      c.models.push_back(std::move(e));
    }
  } else if (c.kind != ExperimentKind::WindowShapes) {
    throw ValidationError("model: missing");
  } else {
    if (r.has("window") || r.has("params")) throw ValidationError("config: window/params need a model");
  }

  if (r.has("r_ext") && r.has("r_series_external")) throw ValidationError("config: r_ext given twice");
  c.r_ext = r.number("r_ext", r.number("r_series_external", 0.0));
  if (!(c.r_ext >= 0.0) || !std::isfinite(c.r_ext)) throw ValidationError("r_ext: must be >= 0");
  c.x0a = r.maybe_number("x0a");
  c.x0b = r.maybe_number("x0b");

  if (r.has("sweep")) {
    ObjectReader s = r.object("sweep");
    if (s.has("amplitude")) {
      const double a = s.number("amplitude", 0.0);
      c.sweep.amplitude_pos = a;
      c.sweep.amplitude_neg = -a;
    }
    c.sweep.amplitude_pos = s.number("amplitude_pos", c.sweep.amplitude_pos);
    c.sweep.amplitude_neg = s.number("amplitude_neg", c.sweep.amplitude_neg);
    if (s.has("rates")) c.sweep.rates = s.numbers("rates");
    c.sweep.cycles = s.integer("cycles", c.sweep.cycles);
    c.sweep.start = detail::read_start(s.text("start", "set"), s.where("start"));
    s.finish();
  }
  if (r.has("pulse")) {
    ObjectReader p = r.object("pulse");
    c.pulse.heights = p.numbers("heights");
    const std::string rule = p.text("threshold_rule", "fixed_half");
    if (rule == "fixed_half") c.pulse.rule = ThresholdRule::FixedHalf;
    else if (rule == "half_range") c.pulse.rule = ThresholdRule::HalfRange;
    else throw ValidationError(p.where("threshold_rule") + ": expected \"fixed_half\" or \"half_range\"");
    c.pulse.t_end = p.number("t_end", c.pulse.t_end);
    c.pulse.saturation_t_end = p.number("saturation_t_end", c.pulse.saturation_t_end);
    c.pulse.v_p1 = p.maybe_number("v_p1");
    p.finish();
  }
  if (r.has("crs")) {
    ObjectReader o = r.object("crs");
    c.crs.min_abs_voltage = o.number("min_abs_voltage", c.crs.min_abs_voltage);
    c.crs.on_threshold = o.number("on_threshold", c.crs.on_threshold);
    c.crs.increase_margin = o.number("increase_margin", c.crs.increase_margin);
    c.crs.min_contrast = o.number("min_contrast", c.crs.min_contrast);
    o.finish();
  }
  if (r.has("shapes")) {
    ObjectReader s = r.object("shapes");
    c.shapes.points = s.integer("points", c.shapes.points);
    if (s.has("windows")) {
      const json& list = s.raw("windows");
      if (!list.is_array()) throw ValidationError(s.where("windows") + ": expected an array");
      for (std::size_t k = 0; k < list.size(); ++k) {
        // {"kind": ..., "p": [1, 7, 50]} expands to one window per exponent.
        ObjectReader w(list[k], s.where("windows") + "[" + std::to_string(k) + "]");
        const std::string name = w.text("kind", "");
        auto wk = parse_window_kind(name);
        if (!wk) throw ValidationError(w.where("kind") + ": unknown window '" + name + "'");
        std::vector<double> ps = w.has("p") ? w.numbers("p") : std::vector<double>{1.0};
        const bool literal = w.boolean("shin_literal", false);
        w.finish();
        for (double p : ps) {
          if (p != std::floor(p)) throw ValidationError(w.where("p") + ": exponents must be integers");
          WindowSpec spec{*wk, static_cast<int>(p), literal};
          validate(spec);
          c.shapes.windows.push_back(spec);
        }
      }
    }
    s.finish();
  }
  if (r.has("solver")) c.solver = detail::read_solver(r.object("solver"), c.solver);
  if (r.has("output")) {
    ObjectReader o = r.object("output");
    c.output.dir = o.text("dir", "");
    c.output.csv = o.boolean("csv", c.output.csv);
    c.output.json = o.boolean("json", c.output.json);
    c.output.svg = o.boolean("svg", c.output.svg);
    o.finish();
  }
  r.finish();

  // Cross-field checks, all before any simulation runs.
  switch (c.kind) {
    case ExperimentKind::Sweep:
    case ExperimentKind::Crs: {
      if (c.models.size() != 1) throw ValidationError("models: " + std::string(to_string(c.kind)) + " takes one model");
      detail::require_increasing_positive(c.sweep.rates, "sweep.rates");
      if (!(c.sweep.amplitude_pos > 0.0) || !(c.sweep.amplitude_neg < 0.0))
        throw ValidationError("sweep: need amplitude_pos > 0 and amplitude_neg < 0");
      if (c.sweep.cycles < 1) throw ValidationError("sweep.cycles: must be >= 1");
      Device& d = c.models.front().device;
      if (d.is<Resistor>()) throw ValidationError("model: resistor is not a memristive model");
      if (c.kind == ExperimentKind::Crs) {
        if (!c.x0a || !c.x0b) throw ValidationError("crs: x0a and x0b are required");
        const auto [lo, hi] = state_bounds(d);
        for (double x : {*c.x0a, *c.x0b})
          if (!(x >= lo && x <= hi)) throw ValidationError("crs: initial state outside the model's state bounds");
      } else {
        if (c.x0b) throw ValidationError("x0b: only valid for crs experiments");
        if (c.x0a) {
          set_initial_state(d, *c.x0a);
          validate(d);
        }
      }
      break;
    }
    case ExperimentKind::Kinetics: {
      for (ModelEntry& e : c.models) {
        if (e.heights.empty()) e.heights = c.pulse.heights;
        detail::require_increasing_positive(e.heights, "pulse.heights (" + e.label + ")");
        if (c.pulse.v_p1 && std::find(e.heights.begin(), e.heights.end(), *c.pulse.v_p1) == e.heights.end())
          throw ValidationError("pulse.v_p1: not among the heights of " + e.label);
      }
      if (!(c.pulse.t_end > 0.0) || !(c.pulse.saturation_t_end > 0.0))
        throw ValidationError("pulse: t_end and saturation_t_end must be > 0");
      if (c.x0a || c.x0b) throw ValidationError("x0a/x0b: set per-model initial states through params.x0");
      break;
    }
    case ExperimentKind::WindowShapes: {
      if (c.shapes.windows.empty()) throw ValidationError("shapes.windows: must not be empty");
      if (c.shapes.points < 2) throw ValidationError("shapes.points: must be >= 2");
      break;
    }
  }
  return c;
}

inline ExperimentConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config: invalid JSON: ") + e.what());
  }
  return parse_config(j);
}

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(path.string() + ": cannot open config");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + ": invalid JSON: " + e.what());
  }
}

inline ExperimentConfig load_config(const std::filesystem::path& path) { return parse_config(read_json_file(path)); }

}  // namespace memsim
