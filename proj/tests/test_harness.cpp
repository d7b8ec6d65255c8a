#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "zest/config.hpp"
#include "zest/errors.hpp"
#include "zest/harness.hpp"

using namespace zest;

namespace {

void strip_elapsed(nlohmann::json& j) {
  if (j.is_object()) {
    j.erase("elapsed_seconds");
    for (auto& [k, v] : j.items()) strip_elapsed(v);
  } else if (j.is_array()) {
    for (auto& v : j) strip_elapsed(v);
  }
}

}  // namespace

TEST_CASE("config parsing and schema validation") {
  ConfigFile f = ConfigFile::parse_string(
      "# comment\n[run]\nmethod = rds\nparticles = 32\nseed = 9\n"
      "epsilon_list = 0.05, 0.1\n[rds]\ntotal_time = 4.5\n");
  CHECK(f.get_string("run.method", "") == "rds");
  CHECK(f.get_int("run.particles", 0) == 32);
  CHECK(f.get_u64("run.seed", 0) == 9);
  CHECK(f.get_double("rds.total_time", 0.0) == doctest::Approx(4.5));
  CHECK(f.get_double_list("run.epsilon_list", {}).size() == 2);
  CHECK(f.get_int("run.rounds", 7) == 7);  // default passes through

  CHECK_THROWS_AS(ConfigFile::parse_string("[run]\nbogus_key = 1\n"),
                  ConfigError);
  CHECK_THROWS_AS(ConfigFile::parse_string("[bogus_section]\nx = 1\n"),
                  ConfigError);
  CHECK_THROWS_AS(ConfigFile::parse_string("method = rds\n"), ConfigError);
  CHECK_THROWS_AS(ConfigFile::parse_string("[run]\nparticles = abc\n")
                      .get_int("run.particles", 0),
                  ConfigError);
}

TEST_CASE("run config resolution and target registry") {
  ConfigFile f = ConfigFile::parse_string(
      "[run]\nmethod = sndmc\ntarget = mog1d(3.5)\nparticles = 8\n");
  RunConfig cfg = resolve_run_config(f);
  CHECK(cfg.method == "sndmc");
  Target t = build_target(cfg);
  CHECK(t.name == "mog1d");
  CHECK(t.beta == doctest::Approx(0.5 * 3.5 * 3.5));

  ConfigFile bad_method =
      ConfigFile::parse_string("[run]\nmethod = magic\n");
  CHECK_THROWS_AS(resolve_run_config(bad_method), ConfigError);

  ConfigFile bad_target =
      ConfigFile::parse_string("[run]\ntarget = nonexistent\n");
  RunConfig cfg2 = resolve_run_config(bad_target);
  CHECK_THROWS_AS(build_target(cfg2), ConfigError);

  for (const char* name : {"gaussian", "gmm2d_paper", "mueller_brown"}) {
    RunConfig c;
    c.target_name = name;
    CHECK(build_target(c).dim >= 1);
  }
}

TEST_CASE("estimate runs are reproducible under a fixed seed") {
  ConfigFile f = ConfigFile::parse_string(
      "[run]\nmethod = rds-exact\ntarget = gaussian\nparticles = 64\n"
      "rounds = 2\nseed = 21\n[target]\ndim = 2\n[rds]\nsteps = 10\n");
  RunConfig cfg = resolve_run_config(f);
  nlohmann::json a = run_estimate(cfg);
  nlohmann::json b = run_estimate(cfg);
  cfg.workers = 4;
  nlohmann::json c = run_estimate(cfg);
  strip_elapsed(a);
  strip_elapsed(b);
  strip_elapsed(c);
  CHECK(a == b);
  CHECK(a == c);
  CHECK(a.contains("z_ratio_mean"));
  CHECK(a["per_round"].size() == 2);
}

TEST_CASE("per-particle streams do not collide at benchmark scale") {
  std::set<std::uint64_t> fingerprints;
  const std::uint64_t base = 1234567;
  std::uint64_t expected = 0;
  for (int r = 0; r < 64; ++r) {
    const std::uint64_t rs = seed_for(base, std::uint64_t(r), 0);
    for (int p = 0; p < 1024; ++p) {
      fingerprints.insert(seed_for(rs, 1, std::uint64_t(p)));
      ++expected;
    }
  }
  CHECK(fingerprints.size() == expected);
}

TEST_CASE("benchmark tables and CSV schema") {
  CHECK(default_benchmark_methods("gm2d").size() == 6);
  CHECK(default_benchmark_methods("mueller").size() == 5);
  CHECK_THROWS_AS(default_benchmark_methods("nope"), ConfigError);

  RunConfig ti_cfg = benchmark_config("gm2d", "desk", "ti", 1, 0);
  CHECK(ti_cfg.rounds == 16);
  CHECK(ti_cfg.particles == 256);
  CHECK(ti_cfg.ais.ti.lambda0 == doctest::Approx(100.0));
  RunConfig paper = benchmark_config("gm2d", "paper", "ais", 1, 0);
  CHECK(paper.rounds == 1024);
  CHECK(paper.ais.steps == 60000);
  CHECK_THROWS_AS(benchmark_config("gm2d", "huge", "ti", 1, 0), ConfigError);

  std::vector<BenchmarkRow> rows(2);
  rows[0].method = "ti";
  rows[0].target = "gmm2d_paper";
  rows[0].z_ratio_mean = 0.123456789;
  rows[0].z_ratio_std = 0.01;
  rows[0].mmd_mean = 2.5;
  rows[0].mmd_std = 0.1;
  rows[0].w2_mean = 10.0;
  rows[0].w2_std = 0.2;
  rows[0].oracle_calls_per_sample = 12500;
  rows[0].seconds = 3.25;
  rows[1].method = "rds-exact";
  rows[1].target = "mueller_brown";
  rows[1].status = "error:no mixture";
  rows[1].seconds = 0.5;
  std::ostringstream out;
  write_benchmark_csv(rows, out);
  std::istringstream in(out.str());
  std::string header, line1, line2;
  std::getline(in, header);
  std::getline(in, line1);
  std::getline(in, line2);
  CHECK(header ==
        "method,target,z_ratio_mean,z_ratio_std,mmd_mean,mmd_std,w2_mean,"
        "w2_std,oracle_calls_per_sample,seconds,status");
  CHECK(line1 ==
        "ti,gmm2d_paper,0.123457,0.01,2.5,0.1,10,0.2,12500,3.25,ok");
  CHECK(line2 == "rds-exact,mueller_brown,,,,,,,,0.5,error:no mixture");
}

TEST_CASE("round dispatch covers every method") {
  RunConfig cfg;
  cfg.target_name = "gaussian";
  cfg.target_dim = 1;
  cfg.particles = 16;
  cfg.seed = 2;
  cfg.rds.steps = 25;
  cfg.ais.steps = 20;
  cfg.ais.ti.particles = 32;
  cfg.ais.ti.lmc_steps = 40;
  cfg.je.n_steps = 40;
  cfg.je.total_time = 2.0;
  cfg.je.ti.particles = 32;
  cfg.je.ti.lmc_steps = 40;
  cfg.score.budget = 16;
  cfg.score.lmc_steps = 4;
  Target t = build_target(cfg);
  for (const char* method :
       {"ti", "ais", "je", "rds-exact", "rdmc", "zodmc", "sndmc"}) {
    OracleCounter counter;
    cfg.method = method;
    RoundResult rr = run_round(t, counter, cfg, 0);
    CHECK(rr.round_mean_z > 0.0);
    CHECK(rr.samples.points.rows() > 0);
    CHECK(rr.samples.estimator != "");
  }
}

TEST_CASE("validate registry rejects unknown checks") {
  std::ostringstream sink;
  CHECK_THROWS_AS(run_validate("bogus", 1, 1, sink), ConfigError);
  CHECK(validate_check_names().size() >= 5);
}

TEST_CASE("equilibrium-chain benchmark run misses the far modes") {
  // mode-collapsed direction: the estimate lands clearly below the truth
  RunConfig cfg = benchmark_config("mueller", "desk", "ti", 5, 0);
  cfg.particles = 128;
  Target t = build_target(cfg);
  OracleCounter counter;
  RoundResult rr = run_round(t, counter, cfg, 0);
  const double ratio = rr.round_mean_z / 22340.9983;
  CHECK(ratio < 0.9);
  CHECK(ratio > 0.2);
}
