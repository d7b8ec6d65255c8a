#pragma once

#include <Eigen/Core>
#include <string>

#include "zest/kernels.hpp"
#include "zest/targets.hpp"

namespace zest {

enum class ScoreKind { kExactMog, kRdmc, kRsdmc, kZodmc, kSndmc };

ScoreKind parse_score_kind(const std::string& name);
std::string score_kind_name(ScoreKind kind);

struct ScoreParams {
  ScoreKind kind = ScoreKind::kExactMog;
  int budget = 64;        // posterior samples / xi draws per query
  int lmc_steps = 16;     // inner chain length (rdmc, rsdmc)
  double lmc_step = 0.01;
  int depth = 2;          // rsdmc recursion depth
  int aux_steps = 4;      // rsdmc auxiliary reverse-path steps
  int polish_steps = 10;  // rsdmc exact-posterior polish chain
  long max_tries = 2'000'000;  // zodmc rejection budget
  RejectionProposal proposal = RejectionProposal::kAuto;
};

// Score of the closed-form noised mixture; ground-truth baseline.
Eigen::VectorXd score_exact_mog(const Target& mog_target, double t,
                                const Eigen::VectorXd& x);

// Posterior-mean (Tweedie) estimate with LMC posterior sampling initialized
// by self-normalized importance sampling from the Gaussian factor.
Eigen::VectorXd score_rdmc(const Target& target, OracleCounter& counter,
                           double t, const Eigen::VectorXd& x,
                           const ScoreParams& params, RngStream& rng);

// Recursive variant: posterior samples come from an auxiliary reverse
// diffusion started at x whose scores are depth-(k-1) estimates.
Eigen::VectorXd score_rsdmc(const Target& target, OracleCounter& counter,
                            double t, const Eigen::VectorXd& x, int depth,
                            const ScoreParams& params, RngStream& rng);

// Tweedie over exact rejection-sampled posterior draws; V evaluations only.
Eigen::VectorXd score_zodmc(const Target& target, OracleCounter& counter,
                            double t, const Eigen::VectorXd& x,
                            const ScoreParams& params, RngStream& rng);

// Self-normalized ratio estimator; V evaluations only.
Eigen::VectorXd score_sndmc(const Target& target, OracleCounter& counter,
                            double t, const Eigen::VectorXd& x,
                            const ScoreParams& params, RngStream& rng);

// Strategy object plugged into the reverse-diffusion estimator. Stateless
// apart from the shared atomic counter; safe to call concurrently with
// per-worker streams.
class ScoreEstimator {
 public:
  ScoreEstimator(const Target& target, OracleCounter& counter,
                 ScoreParams params);

  Eigen::VectorXd operator()(double t, const Eigen::VectorXd& x,
                             RngStream& rng) const;

  const ScoreParams& params() const { return params_; }
  std::string name() const { return score_kind_name(params_.kind); }

 private:
  const Target* target_;
  OracleCounter* counter_;
  ScoreParams params_;
};

}  // namespace zest
