#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "lab/config.hpp"
#include "lab/errors.hpp"
#include "lab/io.hpp"

using namespace lab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) { return read_text_file(p.string()); }

fs::path temp_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("lab_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("parse_config_text: minimal config gets documented defaults") {
  const ProblemConfig cfg = parse_config_text("{}");
  CHECK(cfg.grid.nx == 33);
  CHECK(cfg.params.p == 2.0);
  CHECK(cfg.params.alpha == 0.5);
  CHECK(cfg.kernel.ridge == 0.5);
  CHECK(cfg.solver.tolerance == 1e-9);
  CHECK(cfg.hammerstein.tolerance == 1e-9);
  CHECK(cfg.study.slack == 0.05);
  CHECK(cfg.seed == 1);
  CHECK(!cfg.effective.empty());
}

TEST_CASE("parse_config_text: out-of-range p names the field and the range") {
  try {
    parse_config_text(R"({"params": {"p": 5.0}})");
    FAIL("expected ConfigError");
  } catch (const ConfigError& err) {
    REQUIRE(err.violations.size() == 1);
    CHECK(err.violations[0].find("params.p") != std::string::npos);
    CHECK(err.violations[0].find("[2, 4]") != std::string::npos);
  }
}

TEST_CASE("parse_config_text: duplicate keys are rejected") {
  try {
    parse_config_text(R"({"seed": 1, "seed": 2})");
    FAIL("expected ConfigError");
  } catch (const ConfigError& err) {
    CHECK(err.violations[0].find("duplicate key") != std::string::npos);
    CHECK(err.violations[0].find("seed") != std::string::npos);
  }
}

TEST_CASE("parse_config_text: unknown keys are rejected") {
  CHECK_THROWS_AS(parse_config_text(R"({"grids": {}})"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"solver": {"tol": 1e-9}})"), ConfigError);
}

TEST_CASE("parse_config_text: malformed JSON is its own error") {
  try {
    parse_config_text("{");
    FAIL("expected ConfigError");
  } catch (const ConfigError& err) {
    CHECK(err.violations[0].find("malformed JSON") != std::string::npos);
  }
}

TEST_CASE("parse_config_text: all violations are collected, not just the first") {
  try {
    parse_config_text(
        R"({"params": {"p": 5.0, "alpha": -1.0}, "kernel": {"ridge": -2.0}})");
    FAIL("expected ConfigError");
  } catch (const ConfigError& err) {
    CHECK(err.violations.size() >= 3);
  }
}

TEST_CASE("config hash: stable under key order, sensitive to values and seed") {
  const ProblemConfig a = parse_config_text(R"({"seed": 7, "grid": {"nx": 17, "ny": 17}})");
  const ProblemConfig b = parse_config_text(R"({"grid": {"ny": 17, "nx": 17}, "seed": 7})");
  CHECK(a.hash() == b.hash());
  ProblemConfig c = a;
  c.set_seed(8);
  CHECK(a.hash() != c.hash());
}

TEST_CASE("data expressions: constants, separable terms, files") {
  const GridSpec g{17, 17};
  {
    const ProblemConfig cfg = parse_config_text(R"({"data": {"f": 2.5}})");
    const NodeField f = evaluate(cfg.f, g);
    for (double v : f) CHECK(v == 2.5);
  }
  {
    const ProblemConfig cfg = parse_config_text(
        R"({"data": {"f": [{"coef": 2.0, "x": {"fn": "sin", "k": 1}, "y": {"fn": "poly", "k": 2}}]}})");
    const NodeField f = evaluate(cfg.f, g);
    const int i = 8, j = 4;
    const double expect =
        2.0 * std::sin(M_PI * g.x(i)) * g.y(j) * g.y(j);
    CHECK(f[g.node(i, j)] == doctest::Approx(expect).epsilon(1e-14));
  }
  {
    const fs::path dir = temp_dir("datafile");
    const fs::path bin = dir / "field.f64";
    std::vector<double> payload(g.nodes());
    for (int n = 0; n < g.nodes(); ++n) payload[n] = 0.25 * n;
    std::ofstream(bin, std::ios::binary)
        .write(reinterpret_cast<const char*>(payload.data()),
               payload.size() * sizeof(double));
    const ProblemConfig cfg = parse_config_text(
        std::string(R"({"data": {"g": {"file": ")") + bin.string() + R"("}}})");
    const NodeField gd = evaluate(cfg.g, g);
    CHECK(gd == payload);
    fs::remove_all(dir);
  }
}

TEST_CASE("dispatch: domain-distance writes the analytic values") {
  const fs::path dir = temp_dir("dd");
  const ProblemConfig cfg = parse_config_text(R"({
    "grid": {"nx": 129, "ny": 129},
    "domain": {"type": "disk", "center": [0.5, 0.5], "radius": 0.3},
    "domain_b": {"type": "disk", "center": [0.5, 0.5], "radius": 0.2}
  })");
  const int code = dispatch("domain-distance", cfg, dir.string());
  CHECK(code == 0);
  const std::string out = slurp(dir / "distances.json");
  CHECK(out.find("hc_distance") != std::string::npos);
  const double hc = std::stod(out.substr(out.find("hc_distance") + 13));
  CHECK(std::abs(hc - 0.1) <= 2.0 / 128.0);
  CHECK(fs::exists(dir / "manifest.json"));
  CHECK(fs::exists(dir / "mask_a.pgm"));
  fs::remove_all(dir);
}

TEST_CASE("dispatch: verify-class emits a report and exit 0 on a sound control") {
  const fs::path dir = temp_dir("vc");
  const ProblemConfig cfg = parse_config_text(R"({
    "grid": {"nx": 17, "ny": 17},
    "params": {"p": 3.0, "alpha": 0.5, "beta": 2.0},
    "control": {"n1": 2, "n2": 2, "init": 1.0},
    "seed": 42
  })");
  CHECK(dispatch("verify-class", cfg, dir.string()) == 0);
  const std::string rep = slurp(dir / "class_report.json");
  CHECK(rep.find("\"growth_ok\": true") != std::string::npos);
  CHECK(rep.find("\"monotone_ok\": true") != std::string::npos);
  CHECK(rep.find("\"coercive_ok\": true") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("dispatch: unknown command returns the usage exit code") {
  const ProblemConfig cfg = parse_config_text("{}");
  CHECK(dispatch("no-such-command", cfg, "/tmp/lab_test_nocmd") == 2);
}

TEST_CASE("dispatch: verify-class on an infeasible box fails with provenance") {
  const fs::path dir = temp_dir("vc_bad");
  // xi_upper below alpha empties every feasible interval.
  const ProblemConfig cfg = parse_config_text(R"({
    "grid": {"nx": 17, "ny": 17},
    "params": {"p": 2.0, "alpha": 0.5, "beta": 2.0, "xi_upper": 0.2},
    "control": {"n1": 2, "n2": 2}
  })");
  CHECK(dispatch("verify-class", cfg, dir.string()) == 1);
  const std::string err = slurp(dir / "error.json");
  CHECK(err.find("control_fields") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("dispatch: failures leave machine-readable error JSON with provenance") {
  const fs::path dir = temp_dir("err");
  // solve-state without a domain entry is a config-level failure.
  const ProblemConfig cfg = parse_config_text(R"({"grid": {"nx": 17, "ny": 17}})");
  CHECK(dispatch("solve-state", cfg, dir.string()) == 1);
  const std::string err = slurp(dir / "error.json");
  CHECK(err.find("\"module\"") != std::string::npos);
  CHECK(err.find("cli_config") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("dispatch: repeated runs are bit-identical on numerical payloads") {
  auto run_once = [](const std::string& tag) {
    const fs::path dir = temp_dir("det_" + tag);
    const ProblemConfig cfg = parse_config_text(R"({
      "grid": {"nx": 33, "ny": 33},
      "domain": {"type": "disk", "center": [0.5, 0.5], "radius": 0.35},
      "data": {"f": [{"coef": 1.0, "x": {"fn": "sin", "k": 1}, "y": {"fn": "sin", "k": 1}}],
                "g": 0.5},
      "control": {"n1": 2, "n2": 2, "init": 1.0},
      "seed": 11
    })");
    CHECK(dispatch("solve-state", cfg, dir.string()) == 0);
    CHECK(dispatch("solve-hammerstein", cfg, (dir / "h").string()) == 0);
    return dir;
  };
  const fs::path a = run_once("a");
  const fs::path b = run_once("b");
  for (const char* f : {"state.csv", "state.f64", "solver_stats.json"}) {
    CHECK(slurp(a / f) == slurp(b / f));
  }
  for (const char* f : {"z.csv", "z.f64", "hammerstein_stats.json"}) {
    CHECK(slurp(a / "h" / f) == slurp(b / "h" / f));
  }
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("dispatch: perturb-study writes csv, summary, plots; payload reproducible") {
  auto run_once = [](const std::string& tag) {
    const fs::path dir = temp_dir("study_" + tag);
    const ProblemConfig cfg = parse_config_text(R"({
      "grid": {"nx": 33, "ny": 33},
      "family": {"kind": "shrinking_hole", "eps": [0.16, 0.11, 0.08],
                  "geometry": {"cx": 0.5, "cy": 0.5, "r": 0.35}},
      "data": {"f": 1.0, "g": 1.0, "z_d": -1.0},
      "control": {"n1": 2, "n2": 2},
      "optimizer": {"max_iterations": 25},
      "study": {"value_gap_threshold": 0.2},
      "seed": 3
    })");
    REQUIRE(dispatch("perturb-study", cfg, dir.string()) == 0);
    return dir;
  };
  const fs::path a = run_once("a");
  CHECK(fs::exists(a / "study.csv"));
  CHECK(fs::exists(a / "study_summary.json"));
  CHECK(fs::exists(a / "value_gap.svg"));
  CHECK(fs::exists(a / "state_gap.svg"));
  CHECK(fs::exists(a / "hc_distance.svg"));
  CHECK(fs::exists(a / "timing.json"));
  CHECK(fs::exists(a / "mask_limit.pgm"));
  const fs::path b = run_once("b");
  CHECK(slurp(a / "study.csv") == slurp(b / "study.csv"));
  CHECK(slurp(a / "study_summary.json") == slurp(b / "study_summary.json"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("dispatch: optimize command round-trips its artifacts") {
  const fs::path dir = temp_dir("opt");
  const ProblemConfig cfg = parse_config_text(R"({
    "grid": {"nx": 17, "ny": 17},
    "domain": {"type": "disk", "center": [0.5, 0.5], "radius": 0.35},
    "data": {"f": 1.0, "g": 0.5, "z_d": 0.1},
    "control": {"n1": 2, "n2": 2},
    "optimizer": {"max_iterations": 15},
    "seed": 5
  })");
  CHECK(dispatch("optimize", cfg, dir.string()) == 0);
  CHECK(fs::exists(dir / "ocp_result.json"));
  CHECK(fs::exists(dir / "control.json"));
  CHECK(fs::exists(dir / "control.f64"));
  CHECK(fs::exists(dir / "iterates.csv"));
  // Binary layout: 4 doubles per cell.
  const auto bytes = fs::file_size(dir / "control.f64");
  CHECK(bytes == 16u * 16u * 4u * sizeof(double));
  const std::string iter = slurp(dir / "iterates.csv");
  CHECK(iter.rfind("iteration,value\n", 0) == 0);
  fs::remove_all(dir);
}
