#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "zest/curves.hpp"
#include "zest/scores.hpp"
#include "zest/targets.hpp"

#include <json.hpp>

namespace zest {

struct EstimateReport {
  std::string method;
  std::vector<double> z_hat_samples;  // one per surviving particle
  std::optional<double> log_z0_hat;
  std::vector<double> work_samples;
  std::uint64_t grad_calls = 0;
  std::uint64_t value_calls = 0;
  std::uint64_t seed = 0;
  double elapsed_seconds = 0.0;
  int n_failures = 0;
  std::map<std::string, int> failure_reasons;
  std::map<std::string, std::string> config_echo;

  nlohmann::json to_json() const;
  double mean_z() const;
};

// Equilibrium chain over lambda levels. `regularization` is the quadratic
// coefficient added to V: the annealing start uses lambda(0)/2, the
// standalone estimator of Z uses 0.
struct TiConfig {
  double lambda0 = 100.0;
  double decay = 0.0;        // 0: 1.45/(1 + 1/sqrt(d)), clamped below 1
  double lambda_min = 0.0;   // 0: 1/(2 sqrt(d))
  int particles = 32;
  int lmc_steps = 300;
  double lmc_step_scale = 0.2;
  double smoothness_override = 0.0;  // 0: finite-difference estimate at 0
};

struct TiResult {
  double log_z0 = 0.0;
  EstimateReport report;
  Eigen::MatrixXd final_samples;  // particles at the last level
};

TiResult estimate_ti(const Target& target, OracleCounter& counter,
                     const TiConfig& cfg, double regularization,
                     std::uint64_t seed, int workers = 0);

struct AisConfig {
  double lambda0 = 0.0;  // 0: 2 * target beta
  double r = 1.0;
  int steps = 2000;        // M
  double step_time = 0.01; // T_l when total_time is not set
  double total_time = 0.0;
  int init_lmc_steps = 200;
  TiConfig ti;
  bool draw_final_sample = true;
};

EstimateReport estimate_ais(const Target& target, OracleCounter& counter,
                            const AisConfig& cfg, int n_particles,
                            std::uint64_t seed, int workers = 0,
                            SampleSet* samples_out = nullptr);

enum class JeCurve { kGeometric, kGaussianPull };

struct JeConfig {
  JeCurve curve = JeCurve::kGeometric;
  double lambda0 = 0.0;  // geometric only; 0: 2 * target beta
  double r = 1.0;
  double total_time = 50.0;
  int n_steps = 5000;
  // moving-trap validation curve N(theta L, 1/K)
  double pull_length = 1.0;
  double pull_stiffness = 1.0;
  int init_lmc_steps = 200;
  TiConfig ti;
};

EstimateReport estimate_je(const Target& target, OracleCounter& counter,
                           const JeConfig& cfg, int n_particles,
                           std::uint64_t seed, int workers = 0,
                           SampleSet* samples_out = nullptr);

struct RdsConfig {
  double total_time = 5.0;
  double delta = 0.005;
  int steps = 50;  // N; 0 collapses to plain importance sampling from N(0,I)
  // Initial draw X_0 ~ N(0, init_scale^2 I) with the matching log-density in
  // the work functional. The estimate stays unbiased for any positive value;
  // values below 1 thin the start-up tail that drives rejection-sampling cost.
  double init_scale = 1.0;
};

EstimateReport estimate_rds(const Target& target, OracleCounter& counter,
                            const RdsConfig& cfg,
                            const ScoreEstimator& score, int n_particles,
                            std::uint64_t seed, int workers = 0,
                            SampleSet* samples_out = nullptr);

// Lower median (deterministic order statistic).
double median_trick(std::vector<double> z_hats);
// Copies needed to boost a 3/4-success estimate to confidence 1 - zeta.
int n_for_confidence(double zeta);
double free_energy(double z_hat);

}  // namespace zest
