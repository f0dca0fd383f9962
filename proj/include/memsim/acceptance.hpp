#pragma once

// The acceptance suite: eleven criteria evaluated on the canned experiment
// configs. Each criterion yields one pass/fail line with its key numbers.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "memsim/config.hpp"
#include "memsim/experiments.hpp"
#include "memsim/linear_model.hpp"

namespace memsim {

struct CriterionResult {
  int id;
  std::string title;
  bool pass;
  std::string detail;
};

namespace acceptance {

inline std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// Loads and runs each canned config once, on demand.
class Suite {
 public:
  explicit Suite(std::filesystem::path config_dir) : dir_(std::move(config_dir)) {}

  const ExperimentResult& run(const std::string& name) {
    auto it = cache_.find(name);
    if (it == cache_.end()) it = cache_.emplace(name, run_experiment(config(name))).first;
    return it->second;
  }

  ExperimentConfig config(const std::string& name) const { return load_config(dir_ / (name + ".json")); }

  json raw(const std::string& name) const { return read_json_file(dir_ / (name + ".json")); }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& e : std::filesystem::directory_iterator(dir_))
      if (e.path().extension() == ".json") out.push_back(e.path().stem().string());
    std::sort(out.begin(), out.end());
    return out;
  }

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  std::map<std::string, ExperimentResult> cache_;
};

inline std::optional<double> value(const ExperimentResult& r, const std::string& name) {
  const Metric* m = r.metric(name);
  return m ? m->value : std::nullopt;
}

inline const std::vector<std::string>& linear_windows() {
  static const std::vector<std::string> w{"benderli", "joglekar", "biolek", "shin"};
  return w;
}

inline CriterionResult c1_linear_kinetics_law(Suite& s) {
  const ExperimentResult& r = s.run("fig4a");
  bool pass = true;
  std::string detail;
  double worst_spread = 0.0, worst_oracle = 0.0;
  for (std::size_t m = 0; m < r.curves.size(); ++m) {
    const CurveRun& cr = r.curves[m];
    const Device& d = r.config.models[m].device;
    const auto& lin = std::get<LinearModel>(d.model);
    double lo = INFINITY, hi = 0.0, sum = 0.0;
    for (const KineticsPoint& p : cr.curve.points) {
      if (!p.t_set) {
        pass = false;
        detail += cr.label + " no crossing at " + fmt("%g", p.v_p) + " V; ";
        continue;
      }
      const double k2 = p.v_p * *p.t_set;
      lo = std::min(lo, k2);
      hi = std::max(hi, k2);
      sum += k2;
      const double oracle = analytic_set_time(lin.params, lin.window, p.v_p, lin.params.x0, 0.5);
      worst_oracle = std::max(worst_oracle, std::abs(*p.t_set / oracle - 1.0));
    }
    const double spread = (hi - lo) / (sum / cr.curve.points.size());
    worst_spread = std::max(worst_spread, spread);
    detail += cr.label + " K2=" + fmt("%.6g", sum / cr.curve.points.size()) + " ";
  }
  pass = pass && worst_spread < 5e-3 && worst_oracle < 5e-3;
  detail += "max spread " + fmt("%.2e", worst_spread) + " (< 5e-3), max oracle dev " + fmt("%.2e", worst_oracle) +
            " (< 5e-3)";
  return {1, "linear-model kinetics law V_p * t_SET = K2", pass, detail};
}

inline CriterionResult c2_kinetics_collapse(Suite& s) {
  const ExperimentResult& r = s.run("fig4b");
  bool pass = true;
  double worst_law = 0.0, worst_spread = 0.0;
  const auto& first = r.curves.front().normalized->points;
  for (std::size_t j = 0; j < first.size(); ++j) {
    const double v = first[j].v_p;
    double lo = INFINITY, hi = 0.0, sum = 0.0;
    for (const CurveRun& cr : r.curves) {
      const auto& p = cr.normalized->points[j];
      if (!p.t_set || p.v_p != v) {
        pass = false;
        continue;
      }
      worst_law = std::max(worst_law, std::abs(*p.t_set / (0.7 / v) - 1.0));
      lo = std::min(lo, *p.t_set);
      hi = std::max(hi, *p.t_set);
      sum += *p.t_set;
    }
    worst_spread = std::max(worst_spread, (hi - lo) / (sum / r.curves.size()));
  }
  pass = pass && worst_law < 1e-2 && worst_spread < 1e-2;
  return {2, "kinetics collapse after normalizing at 0.7 V", pass,
          "max |t_norm/(0.7/V_p) - 1| " + fmt("%.2e", worst_law) + " (< 1e-2), max window spread " +
              fmt("%.2e", worst_spread) + " (< 1e-2)"};
}

inline CriterionResult c3_power_law(Suite& s) {
  const ExperimentResult& r = s.run("fig4a");
  bool pass = true;
  std::string detail;
  for (const CurveRun& cr : r.curves) {
    if (!cr.classification) {
      pass = false;
      detail += cr.label + " unclassified; ";
      continue;
    }
    const auto& k = *cr.classification;
    pass = pass && k.kind == KineticsClass::PowerLaw && std::abs(k.power_exponent + 1.0) <= 0.02;
    detail += cr.label + " " + to_string(k.kind) + " " + fmt("%.5f", k.power_exponent) + "; ";
  }
  return {3, "linear kinetics classified power_law with exponent -1 +/- 0.02", pass, detail};
}

inline CriterionResult c4_loop_symmetry(Suite& s) {
  bool pass = true;
  std::string detail;
  for (const std::string& w : linear_windows()) {
    const ExperimentResult& r = s.run("symmetry_" + w);
    const auto e = value(r, "symmetry_error@10");
    const bool symmetric_window = w == "benderli" || w == "joglekar";
    const bool ok = e && (symmetric_window ? *e < 1e-3 : *e > 0.1);
    pass = pass && ok;
    detail += w + " " + (e ? fmt("%.3g", *e) : std::string("absent")) + (symmetric_window ? " (< 1e-3); " : " (> 0.1); ");
  }
  return {4, "loop symmetry fingerprint at 10 V/s", pass, detail};
}

inline CriterionResult c5_sweep_rate_trend(Suite& s) {
  bool pass = true;
  std::string detail;
  const std::vector<std::pair<std::string, std::string>> figs{
      {"fig3f", "linear-biolek"}, {"fig3h", "linear-shin"}, {"fig6e", "chang"}, {"fig6g", "yakopcic"}};
  for (const auto& [fig, label] : figs) {
    const ExperimentResult& r = s.run(fig);
    detail += label + " v_set";
    for (double rate : r.config.sweep.rates) {
      const auto v = value(r, "v_set@" + rate_tag(rate));
      detail += " " + (v ? fmt("%.4g", *v) : std::string("absent"));
    }
    const bool ok = value(r, "v_set_increasing").value_or(0.0) == 1.0;
    pass = pass && ok;
    detail += ok ? "; " : " (not increasing); ";
  }
  return {5, "v_set strictly increasing with sweep rate", pass, detail};
}

inline CriterionResult c6_linear_crs_constancy(Suite& s) {
  bool pass = true;
  std::string detail;
  for (const std::string& w : linear_windows()) {
    json j = s.raw("fig5a");
    j["window"]["kind"] = w;
    j["name"] = "fig5a_" + w;
    const ExperimentConfig cfg = parse_config(j);
    const ExperimentResult r = run_experiment(cfg);
    const double contrast = *value(r, "r_total_contrast@10");
    const double drift = *value(r, "state_sum_drift@10");
    const double drift_limit = 10.0 * cfg.solver.abs_tol;
    const bool ok = contrast < 1e-6 && drift < drift_limit;
    pass = pass && ok;
    detail += w + " dR/R " + fmt("%.2e", contrast) + " drift " + fmt("%.2e", drift) + "; ";
  }
  detail += "limits 1e-6 and 10*abs_tol";
  return {6, "linear CRS with symmetric states keeps R_total constant", pass, detail};
}

inline CriterionResult c7_joglekar_crs(Suite& s) {
  const ExperimentResult& b = s.run("fig5b");
  const ExperimentResult& c = s.run("fig5c");
  const bool neg_after = value(b, "peak_after_extremum_neg@10").value_or(0.0) == 1.0;
  const bool pos_before = value(b, "peak_after_extremum_pos@10").value_or(1.0) == 0.0;
  const bool increased = value(c, "increased_resistance@10").value_or(0.0) == 1.0;
  const double ratio = value(c, "max_r_over_initial@10").value_or(NAN);
  return {7, "Joglekar CRS asymmetric-init fingerprints", neg_after && increased,
          std::string("fig5b negative-lobe conductance peak after |V| extremum: ") + (neg_after ? "yes" : "no") +
              " (positive lobe before: " + (pos_before ? "yes" : "no") + "); fig5c increased chordal R: " +
              (increased ? "yes" : "no") + " (max R/R0 " + fmt("%.4g", ratio) + ")"};
}

inline CriterionResult c8_yakopcic_threshold(Suite& s) {
  const ExperimentResult& k = s.run("fig7");
  bool pass = true;
  std::string detail = "kinetics:";
  for (const CurveRun& cr : k.curves) {
    if (cr.label != "yakopcic") continue;
    for (const KineticsPoint& p : cr.curve.points) {
      if (p.v_p <= 1.2) {
        pass = pass && !p.t_set;
        detail += " " + fmt("%g", p.v_p) + "V " + (p.t_set ? "crossed" : "no crossing");
      }
    }
  }
  const ExperimentResult& crs = s.run("fig6h");
  detail += "; CRS onset";
  for (double rate : crs.config.sweep.rates) {
    const auto v = value(crs, "set_onset_a@" + rate_tag(rate));
    pass = pass && v && *v > 1.2;
    detail += " " + (v ? fmt("%.4g", *v) : std::string("absent"));
  }
  detail += " V (> 1.2)";
  return {8, "Yakopcic threshold behavior", pass, detail};
}

inline CriterionResult c9_laiho_floor(Suite& s) {
  const ExperimentResult& r = s.run("fig6d");
  bool pass = true;
  std::string detail = "min chordal R";
  for (double rate : r.config.sweep.rates) {
    const auto v = value(r, "r_total_min@" + rate_tag(rate));
    pass = pass && v && *v > 50e6;
    detail += " " + (v ? fmt("%.3g", *v) : std::string("absent"));
  }
  detail += " ohm (> 5e7)";
  return {9, "Laiho CRS resistance floor", pass, detail};
}

inline CriterionResult c10_pickett(Suite& s) {
  const ExperimentResult& a = s.run("fig6a");
  const ExperimentResult& b = s.run("fig6b");
  const ExperimentResult& k = s.run("fig7");
  bool snap = true, window = true;
  std::string detail = "snapback drop";
  for (double rate : a.config.sweep.rates) {
    const auto d = value(a, "snapback_drop@" + rate_tag(rate));
    snap = snap && d && *d > 0.01;
    detail += " " + (d ? fmt("%.3g", *d) : std::string("absent"));
  }
  detail += " V (> 0.01); CRS on-window/self-crossing";
  for (double rate : b.config.sweep.rates) {
    const bool w = value(b, "on_window@" + rate_tag(rate)).value_or(0.0) == 1.0;
    const bool x = value(b, "self_crossing@" + rate_tag(rate)).value_or(0.0) == 1.0;
    window = window && w && x;
    detail += std::string(" ") + (w ? "y" : "n") + "/" + (x ? "y" : "n");
  }
  std::optional<double> dpd;
  for (const CurveRun& cr : k.curves)
    if (cr.label == "pickett" && cr.classification) dpd = cr.classification->max_decades_per_doubling;
  const bool steep = dpd && *dpd > 2.0;
  detail += "; max log10 t(V)/t(2V) " + (dpd ? fmt("%.3g", *dpd) : std::string("absent")) + " (> 2)";
  return {10, "Pickett fingerprints: snapback, CRS ON window with self-crossing, steep kinetics", snap && window && steep,
          detail};
}

inline CriterionResult c11_numerical_hygiene(Suite& s) {
  bool pass = true;
  std::string failures;
  double worst_kirchhoff = 0.0, worst_current = 0.0, worst_clamp = 0.0;
  std::size_t compared = 0;
  for (const std::string& name : s.names()) {
    try {
      const ExperimentResult& base = s.run(name);
      ExperimentConfig tight = base.config;
      tight.solver = tight.solver.tightened(10.0);
      const ExperimentResult fine = run_experiment(tight);
      const auto diffs = compare_metrics(base.metrics, fine.metrics, 1e-3);
      compared += base.metrics.size();
      for (const MetricDiff& d : diffs) {
        pass = false;
        failures += " " + name + ":" + d.name + " " + (d.a ? fmt("%.9g", *d.a) : std::string("absent")) + "->" +
                    (d.b ? fmt("%.9g", *d.b) : std::string("absent"));
      }
      for (const RateRun& run : base.runs) {
        worst_kirchhoff = std::max(worst_kirchhoff, run.constraints.kirchhoff);
        worst_current = std::max(worst_current, run.constraints.current);
        worst_clamp = std::max(worst_clamp, run.trace.meta.stats.max_clamp_ratio);
        if (!run.constraints.degenerate_ok) {
          pass = false;
          failures += " " + name + ": degenerate row conducts";
        }
      }
    } catch (const std::exception& e) {
      pass = false;
      failures += " " + name + ": " + e.what();
    }
  }
  const double ntol = SolverConfig{}.newton_tol;
  if (worst_kirchhoff > ntol || worst_current > ntol) pass = false;
  if (worst_clamp > 10.0) pass = false;
  std::string detail = std::to_string(s.names().size()) + " configs, " + std::to_string(compared) +
                       " metrics within 0.1% under 10x tighter tolerances; Kirchhoff " + fmt("%.2e", worst_kirchhoff) +
                       ", port current " + fmt("%.2e", worst_current) + " (<= newton_tol " + fmt("%.0e", ntol) +
                       "); max clamp " + fmt("%.3g", worst_clamp) + " x abs_tol (<= 10); window domain guard never tripped";
  if (!failures.empty()) detail += "; FAILED:" + failures;
  return {11, "numerical hygiene", pass, detail};
}

}  // namespace acceptance

/// Evaluate all criteria against the configs in config_dir.
inline std::vector<CriterionResult> run_acceptance(const std::filesystem::path& config_dir) {
  acceptance::Suite s(config_dir);
  using Fn = CriterionResult (*)(acceptance::Suite&);
  const Fn criteria[] = {acceptance::c1_linear_kinetics_law, acceptance::c2_kinetics_collapse,
                         acceptance::c3_power_law,           acceptance::c4_loop_symmetry,
                         acceptance::c5_sweep_rate_trend,    acceptance::c6_linear_crs_constancy,
                         acceptance::c7_joglekar_crs,        acceptance::c8_yakopcic_threshold,
                         acceptance::c9_laiho_floor,         acceptance::c10_pickett,
                         acceptance::c11_numerical_hygiene};
  std::vector<CriterionResult> out;
  int id = 1;
  for (Fn f : criteria) {
    try {
      out.push_back(f(s));
    } catch (const std::exception& e) {
      out.push_back({id, "criterion " + std::to_string(id), false, std::string("error: ") + e.what()});
    }
    ++id;
  }
  return out;
}

inline std::string format_criterion(const CriterionResult& c) {
  char head[32];
  std::snprintf(head, sizeof head, "[%s] %2d ", c.pass ? "PASS" : "FAIL", c.id);
  return std::string(head) + c.title + ": " + c.detail;
}

}  // namespace memsim
