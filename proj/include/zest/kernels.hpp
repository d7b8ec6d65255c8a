#pragma once

#include <Eigen/Core>
#include <functional>
#include <optional>

#include "zest/curves.hpp"
#include "zest/rng.hpp"
#include "zest/targets.hpp"

namespace zest {

// States past this radius are treated as diverged rather than left to NaN.
inline constexpr double kDivergenceRadius = 1e8;

struct KernelStepOutput {
  Eigen::VectorXd x_next;
  // xi_2 of the correlated pair: drawn jointly with the driving noise and
  // needed by the reverse-diffusion work update.
  std::optional<Eigen::VectorXd> path_noise;
  // the score used for the move (reverse-diffusion step only)
  std::optional<Eigen::VectorXd> score;
  long oracle_calls_used = 0;
};

using GradFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
// score_fn(time, x) evaluates the score of the time-`time` noised marginal
using ScoreFn = std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>;

// Unadjusted Langevin update x - h grad + sqrt(2h) xi.
Eigen::VectorXd lmc_step(const GradFn& grad_fn, const Eigen::VectorXd& x,
                         double h, RngStream& rng);

// Exponential-integrator coefficients for one annealed segment:
//   x' = decay * x - grad_weight * grad V(x) + noise * xi
struct AlmcCoefficients {
  double decay = 1.0;
  double grad_weight = 0.0;
  double noise = 0.0;
};

// Integral of lambda along segment l up to local time t (closed form).
double almc_lambda_integral(const AnnealingSchedule& schedule, int l, double t);
AlmcCoefficients almc_coefficients(const AnnealingSchedule& schedule, int l);

KernelStepOutput almc_step(const Target& target, OracleCounter& counter,
                           const AnnealingSchedule& schedule, int l,
                           const Eigen::VectorXd& x, RngStream& rng);

// Exact transition of dY = -Y dt + sqrt(2) dB from t0 to t1.
Eigen::VectorXd ou_forward_step(const Eigen::VectorXd& x, double t0, double t1,
                                RngStream& rng);

// Correlation between the reverse-step driving noise and the underlying
// Brownian increment over a step of length h.
double rds_noise_correlation(double h);

// One reverse-diffusion step from t_k to t_k1 (times measured along the
// reversed clock; the score is evaluated at noising time T - t_k).
KernelStepOutput rds_step(const ScoreFn& score_fn, const Eigen::VectorXd& x,
                          double t_k, double t_k1, double total_time,
                          RngStream& rng);

enum class RejectionProposal {
  kAuto,      // Gaussian factor, switching to the exact target sampler when
              // the factor is much wider than the target's spread
  kGaussian,  // always propose from N(e^t x, (e^{2t}-1) I)
  kTarget,    // always propose from the target (requires exact sampler)
};

struct RejectionResult {
  Eigen::VectorXd sample;
  long proposals = 0;  // V evaluations when proposing from the Gaussian factor
};

// Exact draw from the conditional law of Y_0 given Y_t = x under the
// noising process, by rejection. With the Gaussian proposal the acceptance
// probability is exp(-(V(x0) - v_lower_bound)); with the target proposal the
// Gaussian factor itself is the (bounded) acceptance weight.
RejectionResult rejection_sample_posterior(
    const Target& target, OracleCounter& counter, double t,
    const Eigen::VectorXd& x, double v_lower_bound, RngStream& rng,
    long max_tries, RejectionProposal mode = RejectionProposal::kAuto);

// Fallback envelope when a target carries no precomputed potential floor:
// descend from `start` and subtract a margin of the observed range. A valid
// global bound is the caller's responsibility; built-in targets precompute
// one. Descent gradients are tallied on the counter.
double gd_potential_lower_bound(const Target& target, OracleCounter& counter,
                                const Eigen::VectorXd& start, int steps = 50);

}  // namespace zest
