#pragma once

// Run a parsed ExperimentConfig end to end: simulations, criteria metrics,
// and output files. Simulations fan out over std::async; every file is
// written by the calling thread.

#include <cstdio>
#include <filesystem>
#include <future>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "memsim/circuits.hpp"
#include "memsim/config.hpp"
#include "memsim/eval.hpp"
#include "memsim/io.hpp"
#include "memsim/solver.hpp"
#include "memsim/svg.hpp"

namespace memsim {

/// A named scalar result. `floor` is the absolute change below which two
/// runs count as agreeing regardless of relative size.
struct Metric {
  std::string name;
  std::optional<double> value;
  double floor = 0.0;
};

struct RateRun {
  double rate;
  Trace trace;
  SwitchingVoltages switching;
  std::optional<CrsReport> crs;
  ConstraintReport constraints;
};

struct CurveRun {
  std::string label;
  KineticsCurve curve;
  std::optional<KineticsCurve> normalized;
  std::optional<KineticsClassification> classification;
  std::string classification_error;
};

struct ShapeTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<RateRun> runs;
  std::vector<CurveRun> curves;
  ShapeTable shapes;
  std::vector<Metric> metrics;

  const Metric* metric(const std::string& name) const {
    for (const auto& m : metrics)
      if (m.name == name) return &m;
    return nullptr;
  }
};

inline std::string rate_tag(double rate) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", rate);
  return buf;
}

namespace detail {

inline StartPolarity start_polarity(const ExperimentConfig& c) {
  if (c.sweep.start) return *c.sweep.start;
  return set_polarity(c.models.front().device) > 0 ? StartPolarity::Positive : StartPolarity::Negative;
}

inline CircuitSystem build_system(const ExperimentConfig& c) {
  const Device& d = c.models.front().device;
  if (c.kind == ExperimentKind::Crs) return crs_system(d, d, *c.x0a, *c.x0b, c.r_ext);
  return single_device_system(d, c.r_ext);
}

// Current through the pair at |v_applied| = amplitude / 2 on the first branch.
inline std::optional<double> current_at_half_amplitude(const Trace& tr, double amplitude, int polarity) {
  const double level = 0.5 * amplitude;
  for (std::size_t r = 1; r < tr.size(); ++r) {
    const double a = polarity * tr.v_applied[r - 1];
    const double b = polarity * tr.v_applied[r];
    if (a < level && b >= level) {
      const double f = (level - a) / (b - a);
      return polarity * (tr.i[r - 1] + f * (tr.i[r] - tr.i[r - 1]));
    }
  }
  return std::nullopt;
}

inline double state_sum_drift(const Trace& tr) {
  double worst = 0.0;
  for (std::size_t r = 0; r < tr.size(); ++r)
    worst = std::max(worst, std::abs(tr.x[0][r] + tr.x[1][r] - tr.x[0][0] - tr.x[1][0]));
  return worst;
}

inline double flag(bool b) { return b ? 1.0 : 0.0; }

inline void sweep_metrics(ExperimentResult& res) {
  const ExperimentConfig& c = res.config;
  const Device& d = c.models.front().device;
  std::vector<Metric>& out = res.metrics;
  const int set_pol = set_polarity(d);
  bool increasing = true;
  std::optional<double> prev;
  for (const RateRun& run : res.runs) {
    const std::string at = "@" + rate_tag(run.rate);
    out.push_back({"v_set" + at, run.switching.v_set, 1e-6});
    out.push_back({"v_reset" + at, run.switching.v_reset, 1e-6});
    if (!run.switching.v_set || (prev && !(set_pol * *run.switching.v_set > set_pol * *prev))) increasing = false;
    prev = run.switching.v_set;
    if (c.kind == ExperimentKind::Sweep) {
      if (c.sweep.cycles >= 2 && c.sweep.amplitude_pos == -c.sweep.amplitude_neg)
        out.push_back({"symmetry_error" + at, loop_symmetry_error(run.trace), 1e-4});
      out.push_back({"snapback_drop" + at, detect_snapback(run.trace, set_pol).drop, 1e-4});
    } else {
      const CrsReport& r = *run.crs;
      out.push_back({"r_total_min" + at, r.r_total_min, 0.0});
      out.push_back({"r_total_max" + at, r.r_total_max, 0.0});
      out.push_back({"r_total_contrast" + at, r.r_total_max / r.r_total_min - 1.0, 1e-9});
      out.push_back({"on_window" + at, flag(r.on_window.has_value()), 0.0});
      out.push_back({"self_crossing" + at, flag(r.self_crossing), 0.0});
      out.push_back({"max_r_over_initial" + at, r.max_r_over_initial, 1e-6});
      out.push_back({"increased_resistance" + at, flag(r.increased_resistance), 0.0});
      for (const LobePeak& l : r.lobes) {
        const std::string side = l.polarity > 0 ? "pos" : "neg";
        out.push_back({"peak_after_extremum_" + side + at, flag(l.peak_after_extremum), 0.0});
      }
      out.push_back({"set_onset_a" + at, set_onset_voltage(run.trace, 0), 1e-6});
      const double amp = set_pol > 0 ? c.sweep.amplitude_pos : -c.sweep.amplitude_neg;
      out.push_back({"i_half_amplitude" + at, current_at_half_amplitude(run.trace, amp, set_pol), 1e-15});
      out.push_back({"state_sum_drift" + at, state_sum_drift(run.trace), 1e-8});
    }
  }
  out.push_back({"v_set_increasing", flag(increasing), 0.0});
}

inline void kinetics_metrics(ExperimentResult& res) {
  for (const CurveRun& cr : res.curves) {
    const std::string tag = "[" + cr.label + "]";
    for (const KineticsPoint& p : cr.curve.points)
      res.metrics.push_back({"t_set" + tag + "@" + rate_tag(p.v_p), p.t_set, 0.0});
    if (cr.normalized) {
      for (const KineticsPoint& p : cr.normalized->points)
        res.metrics.push_back({"t_norm" + tag + "@" + rate_tag(p.v_p), p.t_set, 0.0});
    }
    res.metrics.push_back({"threshold" + tag, cr.curve.threshold, 1e-9});
    if (cr.classification) {
      const auto& k = *cr.classification;
      res.metrics.push_back({"class" + tag, static_cast<double>(static_cast<int>(k.kind)), 0.0});
      res.metrics.push_back({"power_exponent" + tag, k.power_exponent, 1e-6});
      res.metrics.push_back({"decades_per_doubling" + tag, k.decades_per_doubling, 1e-6});
      res.metrics.push_back({"max_decades_per_doubling" + tag, k.max_decades_per_doubling, 1e-6});
    }
  }
}

}  // namespace detail

inline ExperimentResult run_experiment(const ExperimentConfig& c) {
  ExperimentResult res;
  res.config = c;
  switch (c.kind) {
    case ExperimentKind::Sweep:
    case ExperimentKind::Crs: {
      const CircuitSystem sys = detail::build_system(c);
      const StartPolarity start = detail::start_polarity(c);
      std::vector<std::future<RateRun>> jobs;
      for (double rate : c.sweep.rates) {
        jobs.push_back(std::async(std::launch::async, [&, rate] {
          const Waveform w = triangular_sweep(c.sweep.amplitude_pos, c.sweep.amplitude_neg, rate, c.sweep.cycles, start);
          RateRun run{rate, integrate(sys, w, w.duration(), c.solver, c.models.front().label), {}, {}, {}};
          run.trace.meta.config_hash = c.hash;
          return run;
        }));
      }
      for (auto& j : jobs) res.runs.push_back(j.get());
      for (RateRun& run : res.runs) {
        run.switching = extract_switching_voltages(run.trace, 0);
        if (c.kind == ExperimentKind::Crs) run.crs = crs_analysis(run.trace, c.crs);
        CircuitSystem check = sys;
        check.newton_tol = c.solver.newton_tol;
        run.constraints = check_constraints(check, run.trace);
      }
      detail::sweep_metrics(res);
      break;
    }
    case ExperimentKind::Kinetics: {
      for (const ModelEntry& e : c.models) {
        KineticsOptions o;
        o.rule = c.pulse.rule;
        o.t_end = c.pulse.t_end;
        o.saturation_t_end = c.pulse.saturation_t_end;
        o.r_ext = c.r_ext;
        o.solver = c.solver;
        CurveRun cr{e.label, kinetics_curve(e.device, e.heights, o), {}, {}, {}};
        if (c.pulse.v_p1) cr.normalized = normalize_kinetics(cr.curve, *c.pulse.v_p1);
        try {
          cr.classification = classify_kinetics(cr.curve);
        } catch (const ValidationError& err) {
          cr.classification_error = err.what();
        }
        res.curves.push_back(std::move(cr));
      }
      detail::kinetics_metrics(res);
      break;
    }
    case ExperimentKind::WindowShapes: {
      res.shapes.header.push_back("x");
      std::vector<std::pair<WindowSpec, int>> columns;
      for (const WindowSpec& w : c.shapes.windows) {
        const bool signed_window = w.kind == WindowKind::Biolek || w.kind == WindowKind::Shin;
        const std::string base = std::string(to_string(w.kind)) + "_p" + std::to_string(w.p);
        if (signed_window) {
          columns.push_back({w, 1});
          res.shapes.header.push_back(base + "_ipos");
          columns.push_back({w, -1});
          res.shapes.header.push_back(base + "_ineg");
        } else {
          columns.push_back({w, 1});
          res.shapes.header.push_back(base);
        }
      }
      for (int k = 0; k < c.shapes.points; ++k) {
        const double x = static_cast<double>(k) / (c.shapes.points - 1);
        std::vector<double> row{x};
        for (const auto& [w, sign] : columns) row.push_back(eval_window(w, x, sign));
        res.shapes.rows.push_back(std::move(row));
      }
      break;
    }
  }
  return res;
}

inline nlohmann::json report_json(const ExperimentResult& res) {
  nlohmann::json j;
  j["name"] = res.config.name;
  j["kind"] = std::string(to_string(res.config.kind));
  j["config_hash"] = res.config.hash;
  j["solver_hash"] = solver_hash(res.config.solver);
  nlohmann::json metrics = nlohmann::json::array();
  for (const Metric& m : res.metrics) {
    metrics.push_back({{"name", m.name}, {"value", m.value ? nlohmann::json(*m.value) : nlohmann::json(nullptr)}});
  }
  j["metrics"] = metrics;
  for (const CurveRun& cr : res.curves) {
    nlohmann::json c;
    c["label"] = cr.label;
    c["threshold"] = cr.curve.threshold;
    c["saturated"] = cr.curve.saturated;
    if (cr.classification) {
      const auto& k = *cr.classification;
      c["class"] = to_string(k.kind);
      c["power_exponent"] = k.power_exponent;
      c["semilog_slope"] = k.semilog_slope;
      if (k.decades_per_doubling) c["decades_per_doubling"] = *k.decades_per_doubling;
    } else {
      c["class_error"] = cr.classification_error;
    }
    j["kinetics"].push_back(c);
  }
  for (const RateRun& run : res.runs) {
    const auto& s = run.trace.meta.stats;
    j["runs"].push_back({{"rate", run.rate},
                         {"rows", run.trace.size()},
                         {"accepted", s.accepted},
                         {"rejected", s.rejected},
                         {"max_clamp_ratio", s.max_clamp_ratio},
                         {"kirchhoff_residual", run.constraints.kirchhoff},
                         {"current_residual", run.constraints.current}});
  }
  return j;
}

inline std::string metrics_table(const ExperimentResult& res) {
  std::string out;
  for (const Metric& m : res.metrics) {
    char buf[64];
    if (m.value) std::snprintf(buf, sizeof buf, "%.6g", *m.value);
    else std::snprintf(buf, sizeof buf, "absent");
    out += m.name + std::string(m.name.size() < 40 ? 40 - m.name.size() : 1, ' ') + buf + "\n";
  }
  return out;
}

/// Write all outputs for a finished experiment into dir; returns the paths.
inline std::vector<std::filesystem::path> write_outputs(const ExperimentResult& res, const std::filesystem::path& dir) {
  const ExperimentConfig& c = res.config;
  std::vector<std::filesystem::path> written;
  auto emit = [&](const std::filesystem::path& p, const std::string& body) {
    detail::write_file(p, body);
    written.push_back(p);
  };
  const std::string stem = c.name;

  if (!res.runs.empty()) {
    const bool crs = c.kind == ExperimentKind::Crs;
    Plot iv = make_plot(PlotKind::IvLoop, stem + (crs ? " (CRS)" : ""));
    iv.config_hash = c.hash;
    if (!crs && c.r_ext > 0.0) iv.x_label = "V_device (V)";
    Plot rt = make_plot(PlotKind::ResistanceVsT, stem + " chordal R");
    rt.config_hash = c.hash;
    for (const RateRun& run : res.runs) {
      const std::string base = stem + "_r" + rate_tag(run.rate);
      if (c.output.csv) emit(dir / (base + ".csv"), trace_csv(run.trace));
      if (c.output.json) emit(dir / (base + ".json"), trace_json(run.trace).dump(1) + "\n");
      Series s{rate_tag(run.rate) + " V/s", {}, run.trace.i, false};
      s.x = crs || c.r_ext == 0.0 ? run.trace.v_applied : run.trace.v_device[0];
      iv.series.push_back(std::move(s));
      Series r{rate_tag(run.rate) + " V/s", {}, {}, false};
      for (std::size_t k = 0; k < run.trace.size(); ++k) {
        if (std::abs(run.trace.v_applied[k]) < c.crs.min_abs_voltage || run.trace.i[k] == 0.0) continue;
        r.x.push_back(run.trace.t[k]);
        r.y.push_back(std::abs(run.trace.v_applied[k] / run.trace.i[k]));
      }
      rt.series.push_back(std::move(r));
    }
    if (c.output.svg) {
      write_svg(iv, dir / (stem + "_iv.svg"));
      written.push_back(dir / (stem + "_iv.svg"));
      if (crs) {
        write_svg(rt, dir / (stem + "_resistance.svg"));
        written.push_back(dir / (stem + "_resistance.svg"));
      }
    }
  }

  if (!res.curves.empty()) {
    std::string csv = "model,v_p,t_set,t_set_norm\n";
    Plot raw = make_plot(PlotKind::KineticsLogLog, stem + " kinetics");
    raw.config_hash = c.hash;
    Plot norm = make_plot(PlotKind::KineticsLogLog, stem + " normalized kinetics");
    norm.y_label = "t_SET / t_SET(V_p1)";
    norm.config_hash = c.hash;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (const CurveRun& cr : res.curves) {
      Series s{cr.label, {}, {}, true};
      Series sn{cr.label, {}, {}, true};
      for (std::size_t k = 0; k < cr.curve.points.size(); ++k) {
        const KineticsPoint& p = cr.curve.points[k];
        const double tn = cr.normalized && cr.normalized->points[k].t_set ? *cr.normalized->points[k].t_set : nan;
        csv += cr.label + "," + format_double(p.v_p) + "," + format_double(p.t_set.value_or(nan)) + "," +
               format_double(tn) + "\n";
        if (p.t_set) {
          s.x.push_back(p.v_p);
          s.y.push_back(*p.t_set);
        }
        if (std::isfinite(tn)) {
          sn.x.push_back(p.v_p);
          sn.y.push_back(tn);
        }
      }
      raw.series.push_back(std::move(s));
      norm.series.push_back(std::move(sn));
    }
    csv += "# config_hash=" + c.hash + "\n";
    if (c.output.csv) emit(dir / (stem + "_kinetics.csv"), csv);
    if (c.output.svg) {
      write_svg(raw, dir / (stem + "_kinetics.svg"));
      written.push_back(dir / (stem + "_kinetics.svg"));
      if (c.pulse.v_p1) {
        write_svg(norm, dir / (stem + "_normalized.svg"));
        written.push_back(dir / (stem + "_normalized.svg"));
      }
    }
  }

  if (!res.shapes.rows.empty()) {
    if (c.output.csv) emit(dir / (stem + "_windows.csv"), table_csv(res.shapes.header, res.shapes.rows, c.hash));
    if (c.output.svg) {
      Plot p = make_plot(PlotKind::Lines, stem + " window functions");
      p.x_label = "x";
      p.y_label = "f(x)";
      p.config_hash = c.hash;
      for (std::size_t col = 1; col < res.shapes.header.size(); ++col) {
        Series s{res.shapes.header[col], {}, {}, false};
        for (const auto& row : res.shapes.rows) {
          s.x.push_back(row[0]);
          s.y.push_back(row[col]);
        }
        p.series.push_back(std::move(s));
      }
      write_svg(p, dir / (stem + "_windows.svg"));
      written.push_back(dir / (stem + "_windows.svg"));
    }
  }

  emit(dir / (stem + "_report.json"), report_json(res).dump(1) + "\n");
  return written;
}

/// Agreement of two metric sets: same names, same presence, and each value
/// within max(rel * |value|, floor).
struct MetricDiff {
  std::string name;
  std::optional<double> a, b;
};

inline std::vector<MetricDiff> compare_metrics(const std::vector<Metric>& a, const std::vector<Metric>& b, double rel) {
  std::vector<MetricDiff> bad;
  for (const Metric& m : a) {
    const Metric* o = nullptr;
    for (const Metric& n : b)
      if (n.name == m.name) o = &n;
    if (!o) {
      bad.push_back({m.name, m.value, std::nullopt});
      continue;
    }
    if (m.value.has_value() != o->value.has_value()) {
      bad.push_back({m.name, m.value, o->value});
      continue;
    }
    if (!m.value) continue;
    const double x = *m.value, y = *o->value;
    if (std::isnan(x) && std::isnan(y)) continue;
    const double allowed = std::max(rel * std::max(std::abs(x), std::abs(y)), m.floor);
    if (!(std::abs(x - y) <= allowed)) bad.push_back({m.name, x, y});
  }
  for (const Metric& n : b) {
    bool found = false;
    for (const Metric& m : a) found = found || m.name == n.name;
    if (!found) bad.push_back({n.name, std::nullopt, n.value});
  }
  return bad;
}

}  // namespace memsim
