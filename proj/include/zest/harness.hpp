#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "zest/config.hpp"
#include "zest/estimators.hpp"
#include "zest/metrics.hpp"
#include "zest/targets.hpp"

#include <json.hpp>

namespace zest {

struct RunConfig {
  std::string method = "rds";
  std::string target_name = "gaussian";
  int particles = 256;
  int rounds = 1;
  std::uint64_t seed = 1;
  int workers = 0;
  std::string out_path;
  std::vector<double> epsilon_list = {0.05, 0.1, 0.2};

  double target_m = 4.0;
  int target_dim = 2;
  double target_cov_scale = 1.0;
  std::vector<double> target_mean;
  bool target_recenter = false;
  double target_beta_override = 0.0;

  AisConfig ais;
  JeConfig je;
  RdsConfig rds;
  ScoreParams score;
  std::vector<double> mmd_sigmas;  // empty = default list
};

RunConfig resolve_run_config(const ConfigFile& file);
Target build_target(const RunConfig& cfg);

struct RoundResult {
  EstimateReport report;
  SampleSet samples;
  double round_mean_z = 0.0;
};

// One round of the configured method; round index feeds the seed derivation.
RoundResult run_round(const Target& target, OracleCounter& counter,
                      const RunConfig& cfg, int round);

// Full multi-round estimate with JSON output (per the `estimate` command).
nlohmann::json run_estimate(const RunConfig& cfg);

struct BenchmarkRow {
  std::string method;
  std::string target;
  double z_ratio_mean = 0.0;
  double z_ratio_std = 0.0;
  std::optional<double> mmd_mean, mmd_std, w2_mean, w2_std;
  double oracle_calls_per_sample = 0.0;
  double seconds = 0.0;
  std::string status = "ok";
};

std::vector<std::string> default_benchmark_methods(const std::string& suite);
RunConfig benchmark_config(const std::string& suite, const std::string& scale,
                           const std::string& method, std::uint64_t seed,
                           int workers);
std::vector<BenchmarkRow> run_benchmark(const std::string& suite,
                                        const std::string& scale,
                                        const std::vector<std::string>& methods,
                                        std::uint64_t seed, int workers,
                                        std::ostream& log);
void write_benchmark_csv(const std::vector<BenchmarkRow>& rows,
                         std::ostream& out);

// Named end-to-end checks; prints measured vs expected, returns overall pass.
bool run_validate(const std::string& check, std::uint64_t seed, int workers,
                  std::ostream& out);
const std::vector<std::string>& validate_check_names();

}  // namespace zest
