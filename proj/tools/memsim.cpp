// memsim: batch front end for the memristive device simulator.
//
//   memsim sweep --model linear --window joglekar --rate 10 --amp 1
//   memsim crs --config my_crs.json --rate 1 --rate 100
//   memsim kinetics --model pickett --heights 0.5,0.7,1.0
//   memsim reproduce fig4b
//   memsim check
//   memsim list-models
//
// Exit status: 0 success, 1 invalid input or I/O failure, 2 numerical failure.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "memsim/acceptance.hpp"
#include "memsim/config.hpp"
#include "memsim/device.hpp"
#include "memsim/error.hpp"
#include "memsim/experiments.hpp"
#include "memsim/io.hpp"

namespace {

using memsim::json;

#ifndef MEMSIM_CONFIG_DIR
#define MEMSIM_CONFIG_DIR "configs"
#endif

std::filesystem::path config_dir() {
  if (const char* env = std::getenv("MEMSIM_CONFIG_DIR")) return env;
  if (std::filesystem::is_directory("configs")) return "configs";
  return MEMSIM_CONFIG_DIR;
}

std::filesystem::path default_out_dir() {
  if (const char* env = std::getenv("MEMSIM_OUT_DIR")) return env;
  return "out";
}

struct RunFlags {
  std::string config;
  std::string name;
  std::string model;
  std::string window;
  std::optional<int> p;
  std::vector<double> rates;
  std::optional<double> amp, amp_pos, amp_neg;
  std::optional<int> cycles;
  std::string start;
  std::optional<double> r_ext, x0a, x0b;
  std::vector<double> heights;
  std::optional<double> v_p1, t_end;
  std::string rule;
  std::optional<double> rel_tol, abs_tol;
  std::string out;
  std::string format;
  bool quiet = false;
};

void add_run_flags(CLI::App* sub, RunFlags& f, std::string_view kind) {
  sub->add_option("-c,--config", f.config, "experiment config file (JSON); flags override its keys")
      ->check(CLI::ExistingFile);
  sub->add_option("--name", f.name, "experiment name, used as the output file stem");
  sub->add_option("--model", f.model, "model id (see list-models); 'linear' takes --window");
  sub->add_option("--window", f.window, "window for linear models: benderli|joglekar|biolek|shin");
  sub->add_option("--p", f.p, "window exponent p");
  sub->add_option("--r-ext", f.r_ext, "external series resistance in ohm");
  sub->add_option("--rel-tol", f.rel_tol, "solver relative tolerance");
  sub->add_option("--abs-tol", f.abs_tol, "solver absolute tolerance");
  sub->add_option("-o,--out", f.out, "output directory (default: $MEMSIM_OUT_DIR or ./out)");
  sub->add_option("--format", f.format, "trace format")->check(CLI::IsMember({"csv", "json", "both"}));
  sub->add_flag("-q,--quiet", f.quiet, "do not print the metrics table");
  if (kind == "kinetics") {
    sub->add_option("--heights", f.heights, "pulse heights in V")->delimiter(',');
    sub->add_option("--v-p1", f.v_p1, "normalization anchor height in V");
    sub->add_option("--t-end", f.t_end, "simulated pulse length in s");
    sub->add_option("--rule", f.rule, "threshold rule")->check(CLI::IsMember({"fixed_half", "half_range"}));
    sub->add_option("--x0", f.x0a, "initial state");
    return;
  }
  sub->add_option("--rate", f.rates, "sweep rate in V/s (repeatable or comma separated)")->delimiter(',');
  sub->add_option("--amp", f.amp, "symmetric sweep amplitude in V");
  sub->add_option("--amp-pos", f.amp_pos, "positive sweep amplitude in V");
  sub->add_option("--amp-neg", f.amp_neg, "negative sweep amplitude in V (negative number)");
  sub->add_option("--cycles", f.cycles, "number of sweep cycles");
  sub->add_option("--start", f.start, "first half-wave polarity")
      ->check(CLI::IsMember({"set", "positive", "negative"}));
  if (kind == "crs") {
    sub->add_option("--x0a", f.x0a, "initial state of device A");
    sub->add_option("--x0b", f.x0b, "initial state of device B in its own frame");
  } else {
    sub->add_option("--x0", f.x0a, "initial state");
  }
}

// Builds the config JSON: file contents (if any), then flag overrides.
json compose_config(const RunFlags& f, std::string_view kind) {
  json j = f.config.empty() ? json::object() : memsim::read_json_file(f.config);
  if (!j.contains("kind")) j["kind"] = kind;
  if (j["kind"] != kind)
    throw memsim::ValidationError("config '" + f.config + "' has kind " + j["kind"].dump() + ", expected \"" +
                                  std::string(kind) + "\"");
  if (!f.name.empty()) j["name"] = f.name;
  if (!j.contains("name")) j["name"] = std::string(kind);
  if (!f.model.empty()) {
    j.erase("models");
    j.erase("params");
    if (f.model != "linear") j.erase("window");
    j["model"] = f.model;
  }
  if (!f.window.empty()) {
    if (j.contains("models")) throw memsim::ValidationError("--window cannot override a multi-model config");
    j["window"]["kind"] = f.window;
  }
  if (f.p) j["window"]["p"] = *f.p;
  if (f.r_ext) {
    j.erase("r_series_external");
    j["r_ext"] = *f.r_ext;
  }
  if (f.rel_tol) j["solver"]["rel_tol"] = *f.rel_tol;
  if (f.abs_tol) j["solver"]["abs_tol"] = *f.abs_tol;
  if (!f.out.empty()) j["output"]["dir"] = f.out;
  if (f.format == "csv" || f.format == "both") j["output"]["csv"] = true;
  if (f.format == "json" || f.format == "both") j["output"]["json"] = true;
  if (f.format == "json") j["output"]["csv"] = false;

  if (kind == "kinetics") {
    if (!f.heights.empty()) j["pulse"]["heights"] = f.heights;
    if (f.v_p1) j["pulse"]["v_p1"] = *f.v_p1;
    if (f.t_end) j["pulse"]["t_end"] = *f.t_end;
    if (!f.rule.empty()) j["pulse"]["threshold_rule"] = f.rule;
    if (f.x0a) j["params"]["x0"] = *f.x0a;
    return j;
  }
  if (!j.contains("sweep")) j["sweep"] = json::object();
  json& sw = j["sweep"];
  if (!f.rates.empty()) sw["rates"] = f.rates;
  if (f.amp) {
    sw.erase("amplitude_pos");
    sw.erase("amplitude_neg");
    sw["amplitude"] = *f.amp;
  }
  if (f.amp_pos || f.amp_neg) sw.erase("amplitude");
  if (f.amp_pos) sw["amplitude_pos"] = *f.amp_pos;
  if (f.amp_neg) sw["amplitude_neg"] = *f.amp_neg;
  if (f.cycles) sw["cycles"] = *f.cycles;
  if (!f.start.empty()) sw["start"] = f.start;
  if (f.x0a) j["x0a"] = *f.x0a;
  if (f.x0b) j["x0b"] = *f.x0b;
  return j;
}

void run_and_write(const memsim::ExperimentConfig& cfg, const std::string& out_flag, bool quiet) {
  const memsim::ExperimentResult res = memsim::run_experiment(cfg);
  std::filesystem::path dir = !out_flag.empty() ? std::filesystem::path(out_flag)
                              : !cfg.output.dir.empty() ? std::filesystem::path(cfg.output.dir)
                                                        : default_out_dir();
  const auto written = memsim::write_outputs(res, dir);
  if (!quiet) std::cout << memsim::metrics_table(res);
  for (const auto& p : written) std::cout << "wrote " << p.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"memsim: memristive device and CRS simulator"};
  app.require_subcommand(1);

  RunFlags sweep_f, crs_f, kin_f;
  CLI::App* sweep = app.add_subcommand("sweep", "triangular I-V sweep of a single device");
  add_run_flags(sweep, sweep_f, "sweep");
  CLI::App* crs = app.add_subcommand("crs", "triangular sweep of an anti-serial device pair");
  add_run_flags(crs, crs_f, "crs");
  CLI::App* kin = app.add_subcommand("kinetics", "SET time versus pulse height");
  add_run_flags(kin, kin_f, "kinetics");

  std::string check_dir;
  CLI::App* check = app.add_subcommand("check", "run the acceptance suite on the canned configs");
  check->add_option("--configs", check_dir, "config directory (default: $MEMSIM_CONFIG_DIR or the shipped configs)");

  app.add_subcommand("list-models", "print the model ids");

  std::string figure, repro_out;
  bool repro_quiet = false;
  CLI::App* repro = app.add_subcommand("reproduce", "run a canned figure config, e.g. fig4b");
  repro->add_option("figure", figure, "figure id")->required();
  repro->add_option("-o,--out", repro_out, "output directory (default: $MEMSIM_OUT_DIR or ./out)");
  repro->add_flag("-q,--quiet", repro_quiet, "do not print the metrics table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (app.got_subcommand("list-models")) {
      for (const auto& id : memsim::model_ids()) std::cout << id << "\n";
    } else if (app.got_subcommand(check)) {
      const auto results = memsim::run_acceptance(check_dir.empty() ? config_dir() : std::filesystem::path(check_dir));
      int failed = 0;
      for (const auto& r : results) {
        std::cout << memsim::format_criterion(r) << "\n";
        failed += r.pass ? 0 : 1;
      }
      std::cout << results.size() - failed << "/" << results.size() << " criteria passed\n";
      return failed == 0 ? 0 : 1;
    } else if (app.got_subcommand(repro)) {
      const auto path = config_dir() / (figure + ".json");
      if (!std::filesystem::exists(path)) throw memsim::ValidationError("no canned config for '" + figure + "'");
      run_and_write(memsim::load_config(path), repro_out, repro_quiet);
    } else {
      for (auto [sub, flags, kind] : {std::tuple{sweep, &sweep_f, "sweep"}, std::tuple{crs, &crs_f, "crs"},
                                      std::tuple{kin, &kin_f, "kinetics"}}) {
        if (!app.got_subcommand(sub)) continue;
        const memsim::ExperimentConfig cfg = memsim::parse_config(compose_config(*flags, kind));
        run_and_write(cfg, flags->out, flags->quiet);
      }
    }
  } catch (const memsim::NumericalError& e) {
    std::cerr << "memsim: numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const memsim::ValidationError& e) {
    std::cerr << "memsim: invalid input: " << e.what() << "\n";
    return 1;
  } catch (const memsim::IoError& e) {
    std::cerr << "memsim: " << e.what() << "\n";
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "memsim: invalid config: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
