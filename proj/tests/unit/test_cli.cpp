#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "doctest.h"
#include "hubnet/commands.hpp"
#include "hubnet/errors.hpp"

using namespace hubnet;
namespace fs = std::filesystem;

namespace {

json base_doc() {
  return json::parse(R"({
    "network": {
      "N": 400,
      "hub_service": {"family": "exponential", "params": {"rate": 1.0}},
      "p": [0.5, 0.5],
      "mu": [1.0, 0.25]
    },
    "times": [0.5, 1, 2]
  })");
}

std::string config_error_field(const json& doc) {
  try {
    parse_config(doc);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("hubnet_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct RunResult {
  int code;
  std::string err;
};

// Runs the installed CLI binary (path from the test environment).
RunResult run_cli(const std::string& args, const fs::path& dir) {
  const char* exe = std::getenv("HUBNET_CLI");
  REQUIRE(exe != nullptr);
  const fs::path err = dir / "stderr.txt";
  const std::string cmd = std::string(exe) + " " + args + " 2> " + err.string() + " > /dev/null";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(err)};
}

void write_json(const fs::path& p, const json& doc) { std::ofstream(p) << doc.dump(2); }

}  // namespace

TEST_CASE("defaults are filled in and survive a round trip") {
  const ExperimentConfig cfg = parse_config(base_doc());
  CHECK(cfg.sim.replications == 20);
  CHECK(cfg.sim.horizon == 2.0);
  CHECK(cfg.solver.tolerance == 1e-12);
  CHECK(cfg.bounds.variant == MomentVariant::Corrected);
  CHECK(cfg.grid.x_points == 4096);
  CHECK(cfg.validate.fluid_tolerance == 0.03);
  const json resolved = resolved_config(cfg);
  CHECK(resolved["network"]["bottleneck"] == 1);
  CHECK_FALSE(resolved["sim"].contains("workers"));
  CHECK_FALSE(resolved["output"].contains("dir"));
  // The resolved block is itself a valid configuration.
  const ExperimentConfig again = parse_config(resolved);
  CHECK(resolved_config(again) == resolved);
}

TEST_CASE("distribution specs round-trip") {
  for (const auto& d : {Distribution::exponential(2.0), Distribution::erlang(3, 1.5),
                        Distribution::hyperexp2(0.2, 0.5, 4.0), Distribution::deterministic(0.7),
                        Distribution::gamma(0.4, 2.0)}) {
    CHECK(distribution_from_json(distribution_to_json(d), "g") == d);
  }
}

TEST_CASE("invalid configurations name the offending field") {
  json d = base_doc();
  d["network"]["p"] = {0.5, 0.4};
  CHECK(config_error_field(d) == "network.p");

  d = base_doc();
  d["sim"] = {{"replications", 0}};
  CHECK(config_error_field(d) == "sim.replications");

  d = base_doc();
  d["network"]["hub_service"]["params"]["rate"] = -1;
  CHECK(config_error_field(d) == "network.hub_service.params");

  d = base_doc();
  d["network"]["hub_service"]["family"] = "weibull";
  CHECK(config_error_field(d) == "network.hub_service.family");

  d = base_doc();
  d["network"]["hub_service"]["params"]["shape"] = 2;
  CHECK(config_error_field(d) == "network.hub_service.params.shape");

  d = base_doc();
  d["bounds"] = {{"variant", "exact"}};
  CHECK(config_error_field(d) == "bounds.variant");

  d = base_doc();
  d["bounds"] = {{"epsilon_source", -0.1}};
  CHECK(config_error_field(d) == "bounds.epsilon_source");

  d = base_doc();
  d["times"] = {2, 1};
  CHECK(config_error_field(d) == "times");

  d = base_doc();
  d["sim"] = {{"horizon", 1.0}};
  CHECK(config_error_field(d) == "sim.horizon");

  d = base_doc();
  d["network"]["N"] = "many";
  CHECK(config_error_field(d) == "network.N");

  d = base_doc();
  d["colour"] = "blue";
  CHECK(config_error_field(d) == "colour");

  d = base_doc();
  d["validate"] = {{"reference", {{"mu", {1.0}}}}};
  CHECK(config_error_field(d) == "validate.reference.mu");

  d = base_doc();
  d["output"] = {{"formats", {"xml"}}};
  CHECK(config_error_field(d) == "output.formats");

  d = base_doc();
  d["network"].erase("mu");
  CHECK(config_error_field(d) == "network.mu");
}

TEST_CASE("solve: exponential rows have phi = rho") {
  const auto rows = solve_rows(parse_config(base_doc()));
  REQUIRE(rows.size() == 3);  // station 1 is the bottleneck
  for (const auto& r : rows) {
    CHECK(r.station == 0);
    CHECK(std::abs(r.root.root - r.rho) <= 1e-9);
  }
}

TEST_CASE("solve: Erlang-2 single station reproduces the cubic root") {
  json d = base_doc();
  d["network"]["hub_service"] = {{"family", "erlang"}, {"params", {{"k", 2}, {"rate", 2.0}}}};
  d["network"]["p"] = {1.0};
  d["network"]["mu"] = {2.0};
  d["network"]["allow_irregular"] = true;
  d["times"] = {0.0};
  const auto cfg = parse_config(d);
  CHECK(cfg.warnings.size() == 1);
  const auto rows = solve_rows(cfg);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].q_bar == 1.0);
  CHECK(rows[0].root.root == doctest::Approx(0.381966).epsilon(1e-6));
}

TEST_CASE("bounds: zero epsilon collapses the envelope; measured epsilon contains the root") {
  json d = base_doc();
  d["bounds"] = {{"epsilon_source", 0.0}};
  for (const auto& r : bounds_rows(parse_config(d))) {
    CHECK(r.report.f2_satisfied);
    CHECK(r.report.eps_lo == 0.0);
    CHECK(r.report.eps_hi == 0.0);
    CHECK_FALSE(r.report.f1_satisfied);
  }
  d = base_doc();
  d["network"]["hub_service"] = {{"family", "hyperexp2"},
                                 {"params", {{"weight", 0.5}, {"rate1", 0.8}, {"rate2", 1.3}}}};
  d["grid"] = {{"x_points", 1024}, {"y_points", 128}};
  double eps = -1.0;
  const auto rows = bounds_rows(parse_config(d), &eps);
  CHECK(eps > 0.0);
  for (const auto& r : rows) {
    CHECK(r.inside);
    CHECK(r.report.f1_satisfied);
  }
}

TEST_CASE("validate: desk configuration passes, wrong reference rate fails") {
  json d = base_doc();
  d["network"]["N"] = 1000;
  d["sim"] = {{"replications", 10}, {"base_seed", 3}};
  auto rep = run_validation(parse_config(d));
  CHECK(rep.passed());

  d["validate"] = {{"reference", {{"mu", {1.0, 0.1}}}}};
  rep = run_validation(parse_config(d));
  CHECK_FALSE(rep.passed());
  bool fluid_failed = false;
  for (const auto& c : rep.checks) fluid_failed |= (c.name == "fluid" && !c.passed);
  CHECK(fluid_failed);
}

TEST_CASE("CLI exit codes and messages") {
  const fs::path dir = scratch("exit");
  json d = base_doc();
  d["sim"] = {{"replications", 4}};
  write_json(dir / "ok.json", d);
  const std::string out = " --out " + (dir / "out").string();

  auto r = run_cli("solve --config " + (dir / "ok.json").string() + out, dir);
  CHECK(r.code == 0);
  CHECK(fs::exists(dir / "out" / "solve.csv"));
  CHECK(slurp(dir / "out" / "solve.csv").rfind("t,station,q_bar,rho,phi,iterations,residual\n", 0) == 0);

  for (const char* cmd : {"bounds", "fluid", "simulate", "metrics", "validate"}) {
    r = run_cli(std::string(cmd) + " --config " + (dir / "ok.json").string() + out, dir);
    INFO(cmd, ": ", r.err);
    CHECK(r.code == 0);
  }
  CHECK(fs::exists(dir / "out" / "fluid.csv"));
  CHECK(fs::exists(dir / "out" / "metrics.json"));

  json bad = d;
  bad["network"]["p"] = {0.7, 0.7};
  write_json(dir / "bad.json", bad);
  r = run_cli("solve --config " + (dir / "bad.json").string() + out, dir);
  CHECK(r.code == 2);
  CHECK(r.err.find("network.p") != std::string::npos);

  json zero = d;
  zero["sim"] = {{"replications", 0}};
  write_json(dir / "zero.json", zero);
  r = run_cli("validate --config " + (dir / "zero.json").string() + out, dir);
  CHECK(r.code == 2);
  CHECK(r.err.find("sim.replications") != std::string::npos);

  json wrong = d;
  wrong["validate"] = {{"reference", {{"mu", {1.0, 0.1}}}}};
  write_json(dir / "wrong.json", wrong);
  r = run_cli("validate --config " + (dir / "wrong.json").string() + out, dir);
  CHECK(r.code == 3);
  CHECK(r.err.find("tolerance breach: fluid") != std::string::npos);

  r = run_cli("solve --config " + (dir / "missing.json").string(), dir);
  CHECK(r.code == 2);
  r = run_cli("frobnicate", dir);
  CHECK(r.code == 2);
}

TEST_CASE("CLI output is byte-identical across reruns and worker counts") {
  const fs::path dir = scratch("determinism");
  json d = base_doc();
  d["sim"] = {{"replications", 12}, {"base_seed", 9}, {"event_log", true}};
  write_json(dir / "cfg.json", d);
  const std::string cfg = " --config " + (dir / "cfg.json").string();
  for (const char* cmd : {"validate", "simulate"}) {
    CHECK(run_cli(std::string(cmd) + cfg + " --workers 1 --out " + (dir / "w1").string(), dir).code == 0);
    CHECK(run_cli(std::string(cmd) + cfg + " --workers 4 --out " + (dir / "w4").string(), dir).code == 0);
    CHECK(run_cli(std::string(cmd) + cfg + " --workers 1 --out " + (dir / "w1b").string(), dir).code == 0);
  }
  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(dir / "w1")) {
    const auto name = entry.path().filename();
    CHECK(slurp(entry.path()) == slurp(dir / "w4" / name));
    CHECK(slurp(entry.path()) == slurp(dir / "w1b" / name));
    ++compared;
  }
  CHECK(compared >= 6);
  CHECK(fs::exists(dir / "w1" / "events.csv"));

  // A different seed changes the simulation output.
  CHECK(run_cli("simulate" + cfg + " --seed 10 --out " + (dir / "s10").string(), dir).code == 0);
  CHECK(slurp(dir / "s10" / "simulate.json") != slurp(dir / "w1" / "simulate.json"));
}

TEST_CASE("shipped example configurations parse") {
  const char* root = std::getenv("HUBNET_CONFIGS");
  REQUIRE(root != nullptr);
  std::size_t n = 0;
  for (const auto& entry : fs::directory_iterator(root)) {
    INFO(entry.path().string());
    CHECK_NOTHROW(load_config(entry.path().string()));
    ++n;
  }
  CHECK(n >= 3);
}

TEST_CASE("number formatting round-trips") {
  for (double v : {0.1, 1.0 / 3, 1e-300, 12345.678, 0.0}) {
    CHECK(std::stod(format_number(v)) == v);
  }
  CHECK(format_number(2.0) == "2");
  CHECK(format_number(NAN) == "nan");
}
