#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "memsim/config.hpp"
#include "memsim/experiments.hpp"
#include "memsim/io.hpp"
#include "memsim/svg.hpp"

using namespace memsim;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("memsim_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Trace awkward_trace(int devices) {
  Trace tr;
  tr.meta.devices = devices;
  tr.meta.config_hash = "abc123";
  const double vals[] = {0.1, 1.0 / 3.0, 2.0 / 3.0, 1e-300, 5e-324, -0.0, 6.02214076e23, std::nextafter(1.0, 2.0)};
  for (int r = 0; r < 8; ++r) tr.push(r * 0.1, vals[r], vals[(r + 1) % 8], vals[(r + 2) % 8], vals[(r + 3) % 8],
                                      vals[(r + 4) % 8], vals[(r + 5) % 8]);
  return tr;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(MEMSIM_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("CSV header follows the column contract") {
  CHECK(trace_csv(awkward_trace(1)).rfind("t,v_applied,v_device_a,i,x_a\n", 0) == 0);
  CHECK(trace_csv(awkward_trace(2)).rfind("t,v_applied,v_device_a,v_device_b,i,x_a,x_b\n", 0) == 0);
}

TEST_CASE("CSV write-then-read reproduces every value bit-exactly") {
  const fs::path dir = scratch_dir("csv");
  for (int devices : {1, 2}) {
    const Trace tr = awkward_trace(devices);
    const fs::path file = dir / ("trace" + std::to_string(devices) + ".csv");
    write_trace(tr, file, "csv");
    const Trace back = read_trace_csv(file);
    REQUIRE(back.size() == tr.size());
    CHECK(back.devices() == devices);
    CHECK(back.meta.config_hash == "abc123");
    for (std::size_t r = 0; r < tr.size(); ++r) {
      CHECK(std::signbit(back.v_applied[r]) == std::signbit(tr.v_applied[r]));
      CHECK(trace_row(back, r) == trace_row(tr, r));
    }
  }
}

TEST_CASE("double formatting is shortest round-trip") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1e-300) == "1e-300");
  CHECK(parse_double(format_double(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(std::isnan(parse_double("nan")));
}

TEST_CASE("JSON trace mirrors the columns and carries metadata") {
  const Trace tr = awkward_trace(2);
  const json j = trace_json(tr);
  CHECK(j.at("columns").at("x_b").size() == tr.size());
  CHECK(j.at("metadata").at("config_hash") == "abc123");
}

TEST_CASE("trace writer surfaces I/O errors with the path") {
  const fs::path blocker = scratch_dir("blocker");
  fs::create_directories(blocker.parent_path());
  std::ofstream(blocker.string()) << "x";
  try {
    write_trace(awkward_trace(1), blocker / "sub" / "t.csv");
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find(blocker.string()) != std::string::npos);
  }
  fs::remove(blocker);
}

TEST_CASE("SVG output is deterministic and uses log axes for kinetics") {
  Plot p = make_plot(PlotKind::KineticsLogLog, "kinetics");
  p.series.push_back({"a", {0.5, 1.0, 2.0}, {10.0, 1.0, 0.1}, true});
  p.config_hash = "feed";
  const std::string s1 = render_svg(p);
  CHECK(s1 == render_svg(p));
  CHECK(s1.find("<polyline") != std::string::npos);
  CHECK(s1.find("config_hash=feed") != std::string::npos);
  CHECK(s1.find(">0.1<") != std::string::npos);  // decade tick labels
  CHECK(s1.find(">10<") != std::string::npos);
  const fs::path dir = scratch_dir("svg");
  write_svg(p, dir / "a.svg");
  write_svg(p, dir / "b.svg");
  CHECK(slurp(dir / "a.svg") == slurp(dir / "b.svg"));
}

TEST_CASE("SVG with no drawable data is an error and writes no file") {
  const fs::path dir = scratch_dir("svg_empty");
  Plot p = make_plot(PlotKind::IvLoop, "empty");
  CHECK_THROWS_AS(write_svg(p, dir / "empty.svg"), ValidationError);
  p.log_y = true;
  p.series.push_back({"nonpositive", {1.0, 2.0}, {0.0, -1.0}, false});
  CHECK_THROWS_AS(write_svg(p, dir / "empty.svg"), ValidationError);
  CHECK_FALSE(fs::exists(dir / "empty.svg"));
}

TEST_CASE("config parsing is strict") {
  const std::string base = R"({"name": "t", "kind": "sweep", "model": "laiho", "sweep": {"amplitude": 2, "rates": [1]}})";
  CHECK_NOTHROW(parse_config_text(base));

  json j = json::parse(base);
  j["colour"] = "red";
  CHECK_THROWS_AS(parse_config(j), ValidationError);

  j = json::parse(base);
  j["sweep"]["ratez"] = {1};
  CHECK_THROWS_AS(parse_config(j), ValidationError);

  j = json::parse(base);
  j["params"]["a1"] = 2e-8;
  CHECK(std::get<LaihoParams>(parse_config(j).models[0].device.model).a1 == 2e-8);
  j["params"]["k1"] = 1.0;  // belongs to the linear model
  CHECK_THROWS_AS(parse_config(j), ValidationError);

  j = json::parse(base);
  j["sweep"]["rates"] = {10, 1};
  CHECK_THROWS_AS(parse_config(j), ValidationError);

  j = json::parse(base);
  j["window"] = {{"kind", "joglekar"}};
  CHECK_THROWS_AS(parse_config(j), ValidationError);

  CHECK_THROWS_AS(parse_config_text("{not json"), ValidationError);
}

TEST_CASE("r_series_external is an alias of r_ext, not a second value") {
  json j = json::parse(R"({"name": "t", "kind": "sweep", "model": "laiho", "r_series_external": 100})");
  CHECK(parse_config(j).r_ext == 100.0);
  j["r_ext"] = 100;
  CHECK_THROWS_AS(parse_config(j), ValidationError);
}

TEST_CASE("CRS configs need both initial states within bounds") {
  json j = json::parse(R"({"name": "t", "kind": "crs", "model": "laiho", "x0a": 0.001})");
  CHECK_THROWS_AS(parse_config(j), ValidationError);
  j["x0b"] = 1.5;
  CHECK_THROWS_AS(parse_config(j), ValidationError);
  j["x0b"] = 1.0;
  CHECK_NOTHROW(parse_config(j));
}

TEST_CASE("config hash changes with content") {
  const auto a = parse_config_text(R"({"name": "t", "model": "laiho"})");
  const auto b = parse_config_text(R"({"name": "t", "model": "chang"})");
  CHECK(a.hash != b.hash);
  CHECK(a.hash == parse_config_text(R"({"model": "laiho", "name": "t"})").hash);
}

TEST_CASE("every shipped config parses") {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(MEMSIM_CONFIG_DIR)) {
    if (e.path().extension() != ".json") continue;
    INFO(e.path().string());
    CHECK_NOTHROW(load_config(e.path()));
    ++n;
  }
  CHECK(n >= 20);
}

TEST_CASE("experiment outputs embed the config hash") {
  const fs::path dir = scratch_dir("outputs");
  const auto cfg = parse_config_text(
      R"({"name": "t", "kind": "sweep", "model": "laiho", "sweep": {"amplitude": 2, "rates": [10]},
          "output": {"json": true}})");
  const auto written = write_outputs(run_experiment(cfg), dir);
  CHECK(written.size() >= 4);
  for (const auto& p : written) {
    INFO(p.string());
    CHECK(slurp(p).find(cfg.hash) != std::string::npos);
  }
}

TEST_CASE("CLI exit codes") {
  const fs::path out = scratch_dir("cli");
  CHECK(run_cli("list-models") == 0);
  CHECK(run_cli("sweep --model linear --window joglekar --rate 10 --amp 1 -q -o " + out.string()) == 0);
  CHECK(fs::exists(out / "sweep_r10.csv"));
  CHECK(run_cli("frobnicate") == 1);
  CHECK(run_cli("sweep --no-such-flag") == 1);
  CHECK(run_cli("sweep --model nope") == 1);
  CHECK(run_cli("reproduce fig99") == 1);
  // The bare Pickett device at 4 V is driven past its barrier model's validity edge.
  CHECK(run_cli("sweep --model pickett --rate 10 --amp 4 -q -o " + out.string()) == 2);
}
