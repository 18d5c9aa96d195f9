#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "blight/commands.hpp"
#include "blight/config.hpp"
#include "blight/errors.hpp"
#include "blight/output.hpp"

using namespace blight;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("blight_test_" + name);
  fs::remove_all(dir);
  return dir;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) h = (h ^ c) * 1099511628211ULL;
  return h;
}

RunConfig small_run(Experiment e) {
  RunConfig c;
  c.experiment = e;
  c.grid = Grid(1000.0, 500);
  c.integrator.t_end = 6.0;
  c.integrator.record_every = 0.5;
  c.snapshots = {4.0, 5.5};
  return c;
}

}  // namespace

TEST_CASE("config: defaults and overrides") {
  const RunConfig c = parse_config(
      "; comment\n[run]\nexperiment = wave\nseed = 7\n[model]\nD2 = 3.5\n[initial]\nN = 4\n"
      "[wave_ranges]\nr = 0.1, 0.2\n");
  CHECK(c.experiment == Experiment::wave);
  CHECK(c.seed == 7);
  CHECK(c.model.D2 == 3.5);
  CHECK(c.params().N == 4.0);
  REQUIRE(c.wave_ranges.size() == 1);
  CHECK(c.wave_ranges[0] == ParamRange{"r", 0.1, 0.2});
  CHECK(parse_config("").grid.n_cells == 10000);
}

TEST_CASE("config: rejects unknown and malformed entries") {
  CHECK_THROWS_AS(parse_config("[model]\nDD = 1\n"), DomainError);
  CHECK_THROWS_AS(parse_config("[extras]\nx = 1\n"), DomainError);
  CHECK_THROWS_AS(parse_config("[model]\nr = fast\n"), DomainError);
  CHECK_THROWS_AS(parse_config("[grid]\nn_cells = -4\n"), DomainError);
  CHECK_THROWS_AS(parse_config("[model]\nN = 3\n"), DomainError);
  CHECK_THROWS_AS(parse_config("[sobol_factors]\nr = 1\n"), DomainError);
  CHECK_THROWS_AS(parse_config("[integrator]\nmethod = euler\n"), DomainError);
  CHECK_THROWS_AS(parse_config("[run\n"), DomainError);
  CHECK_THROWS_AS(load_config("/nonexistent/blight.ini"), DomainError);
}

TEST_CASE("config: validation") {
  RunConfig c;
  CHECK_NOTHROW(c.validate());
  c.model.r = -1.0;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = RunConfig{};
  c.snapshots = {40.0};
  CHECK_THROWS_AS(c.validate(), DomainError);
  c.experiment = Experiment::sobol;  // snapshots only matter to simulate
  CHECK_NOTHROW(c.validate());
  c = RunConfig{};
  c.integrator.record_every = 0.01;
  CHECK_THROWS_AS(c.validate(), DomainError);
}

TEST_CASE("config: canonical text round-trips") {
  RunConfig c;
  c.model.alpha = 0.1 + 0.2;
  c.integrator.method = Method::sdirk3;
  c.sobol_factors = {{"mu", 0.05, 1.0}};
  const std::string text = write_config(c);
  CHECK(write_config(parse_config(text)) == text);
  CHECK(parse_config(text).model.alpha == c.model.alpha);
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1e6) == "1e+06");
}

TEST_CASE("config hash is FNV-1a of the canonical text") {
  const RunConfig c;
  char expected[17];
  std::snprintf(expected, sizeof expected, "%016llx", static_cast<unsigned long long>(fnv1a(write_config(c))));
  CHECK(config_hash(c) == expected);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
  RunConfig d = c;
  d.seed = 43;
  CHECK(config_hash(d) != config_hash(c));
}

TEST_CASE("check command") {
  const fs::path dir = scratch("check");
  RunConfig c;
  c.experiment = Experiment::check;
  c.n_flowers = 3.0;
  std::ostringstream out, err;
  CHECK(cmd_check(c, {dir.string(), 1, false}, out, err) == kExitOk);
  CHECK(out.str().find("all satisfied                no") != std::string::npos);
  CHECK(out.str().find("minimum wave speed [m/day]   20\n") != std::string::npos);
  CHECK(slurp(dir / "check.csv").find("c_min,20\n") != std::string::npos);

  c.model.n1 = 3.0;
  c.model.M1 = 0.5;
  c.model.alpha = 1e-3;
  std::ostringstream out2;
  CHECK(cmd_check(c, {dir.string(), 1, false}, out2, err) == kExitOk);
  CHECK(out2.str().find("all satisfied                yes") != std::string::npos);

  c.model.K = -1.0;
  std::ostringstream err2;
  CHECK(cmd_check(c, {dir.string(), 1, false}, out, err2) == kExitConfig);
  CHECK_FALSE(err2.str().empty());
}

TEST_CASE("simulate command writes snapshots and is reproducible") {
  const fs::path dir = scratch("simulate");
  const RunConfig c = small_run(Experiment::simulate);
  std::ostringstream out, err;
  REQUIRE(cmd_simulate(c, {dir.string(), 1, false}, out, err) == kExitOk);
  CHECK(fs::exists(dir / "snapshot_t4.svg"));
  CHECK(fs::exists(dir / "snapshot_t5.5.svg"));
  const std::string first = slurp(dir / "trajectory.csv");
  CHECK(first.rfind("# blight simulate\n# seed=42 config_hash=" + config_hash(c), 0) == 0);
  CHECK(first.find("t,x,B,O,S,I,R\n") != std::string::npos);
  REQUIRE(cmd_simulate(c, {dir.string(), 1, false}, out, err) == kExitOk);
  CHECK(slurp(dir / "trajectory.csv") == first);

  RunConfig off = c;
  off.snapshots = {4.25};
  CHECK(cmd_simulate(off, {dir.string(), 1, false}, out, err) == kExitConfig);
}

TEST_CASE("unwritable output directory exits with the config code") {
  const fs::path blocker = scratch("blocker");
  { std::ofstream(blocker) << "x"; }
  RunConfig c;
  c.experiment = Experiment::check;
  std::ostringstream out, err;
  CHECK(cmd_check(c, {(blocker / "sub").string(), 1, false}, out, err) == kExitConfig);
  fs::remove(blocker);
}

TEST_CASE("wave command: files, summary rows and reruns") {
  const fs::path dir = scratch("wave");
  RunConfig c = small_run(Experiment::wave);
  c.grid = Grid(1000.0, 1000);
  c.integrator.t_end = 30.0;
  c.wave_samples = 1;
  std::ostringstream out, err;
  REQUIRE(cmd_wave(c, {dir.string(), 1, false}, out, err) == kExitOk);
  const std::string samples = slurp(dir / "wave_samples.csv");
  const std::string summary = slurp(dir / "wave_summary.csv");
  CHECK(summary.find("pearson,") != std::string::npos);
  CHECK(summary.find("local_l2,") != std::string::npos);
  CHECK(summary.find("speed_difference,") != std::string::npos);
  REQUIRE(cmd_wave(c, {dir.string(), 2, false}, out, err) == kExitOk);
  CHECK(slurp(dir / "wave_samples.csv") == samples);
  CHECK(slurp(dir / "wave_summary.csv") == summary);
}

TEST_CASE("wave command: a failed sample is reported and exits 0") {
  const fs::path dir = scratch("wave_fail");
  RunConfig c = small_run(Experiment::wave);
  c.grid = Grid(1000.0, 200);
  c.integrator.t_end = 30.0;
  c.b_seed = 0.0;
  c.wave_samples = 1;
  std::ostringstream out, err;
  CHECK(cmd_wave(c, {dir.string(), 1, false}, out, err) == kExitOk);
  CHECK(err.str().find("warning: sample 0 failed") != std::string::npos);
  CHECK(slurp(dir / "wave_samples.csv").find(",failed,") != std::string::npos);
}

TEST_CASE("sobol command: one row per factor, byte-identical reruns") {
  const fs::path dir = scratch("sobol");
  RunConfig c = small_run(Experiment::sobol);
  c.integrator.t_end = 4.0;
  c.t_q = 4.0;
  c.sobol_n_base = 4;
  c.bootstrap = 20;
  std::ostringstream out, err;
  REQUIRE(cmd_sobol(c, {dir.string(), 1, false}, out, err) == kExitOk);
  const std::string csv = slurp(dir / "sobol_indices.csv");
  CHECK(csv.find("# 24 model runs;") != std::string::npos);
  int rows = 0;
  std::istringstream lines(csv);
  for (std::string line; std::getline(lines, line);) {
    if (!line.empty() && line[0] != '#' && line.rfind("factor,", 0) != 0) ++rows;
  }
  CHECK(rows == 4);
  REQUIRE(cmd_sobol(c, {dir.string(), 2, false}, out, err) == kExitOk);
  CHECK(slurp(dir / "sobol_indices.csv") == csv);
  CHECK(fs::exists(dir / "sobol_indices.svg"));
}

TEST_CASE("sobol command: aborted runs exit 3") {
  const fs::path dir = scratch("sobol_abort");
  RunConfig c = small_run(Experiment::sobol);
  c.grid = Grid(1000.0, 1000);
  c.integrator.method = Method::rk4;
  c.t_q = 1.0;
  c.sobol_n_base = 2;
  std::ostringstream out, err;
  CHECK(cmd_sobol(c, {dir.string(), 1, false}, out, err) == kExitAborted);
  CHECK(err.str().find("A row 0") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "sobol_indices.csv"));
}

TEST_CASE("sobol CSV header records the design size") {
  SobolResult r;
  r.n_base = 300;
  r.k = 4;
  r.factors = {"D2", "mu", "N", "r"};
  for (auto* v : {&r.first_order, &r.total_order, &r.first_se, &r.total_se, &r.first_lo, &r.first_hi,
                  &r.total_lo, &r.total_hi, &r.gap_se}) {
    v->assign(4, 0.0);
  }
  std::ostringstream s;
  write_sobol_csv(s, r, {"sobol", 1, "0"});
  CHECK(s.str().find("# 1800 model runs;") != std::string::npos);
}
