#include "zest/kernels.hpp"

#include <cmath>

#include "zest/errors.hpp"
#include "zest/numeric.hpp"

namespace zest {

namespace {

void check_state(const Eigen::VectorXd& x, const char* who) {
  if (!x.allFinite() || x.norm() > kDivergenceRadius)
    throw DivergenceError(std::string(who) + ": state diverged");
}

}  // namespace

Eigen::VectorXd lmc_step(const GradFn& grad_fn, const Eigen::VectorXd& x,
                         double h, RngStream& rng) {
  if (!(h > 0.0)) throw InvalidParameter("lmc_step: h must be positive");
  Eigen::VectorXd next =
      x - h * grad_fn(x) + std::sqrt(2.0 * h) * rng.normal_vector(x.size());
  check_state(next, "lmc_step");
  return next;
}

double almc_lambda_integral(const AnnealingSchedule& schedule, int l,
                            double t) {
  const double theta0 = schedule.theta[l - 1];
  const double theta1 = schedule.theta[l];
  const double seg = schedule.segment_time(l);
  const double dtheta = theta1 - theta0;
  const double two_beta = 2.0 * schedule.beta;
  if (dtheta <= 0.0 || seg <= 0.0)
    throw InvalidParameter("almc_lambda_integral: empty segment");
  const double r = schedule.r;
  const double u0 = 1.0 - theta0;
  const double ut = 1.0 - theta0 - (t / seg) * dtheta;
  if (dtheta < 1e-14) return two_beta * std::pow(u0, r) * t;
  return two_beta * seg / (dtheta * (r + 1.0)) *
         (std::pow(u0, r + 1.0) - std::pow(ut, r + 1.0));
}

namespace {

// integral of exp(-mult (Lambda(T) - Lambda(t))) dt over [0, T], with panels
// refined toward t = T where the integrand concentrates when lambda T >> 1.
double weighted_segment_integral(const std::function<double(double)>& big_lambda,
                                 double seg, double mult, int points) {
  const double tail_rate = mult * big_lambda(seg);
  int splits = 0;
  if (tail_rate > 1.0)
    splits = std::min(60, static_cast<int>(std::ceil(std::log2(tail_rate))) + 2);
  auto f = [&](double t) {
    return std::exp(-mult * (big_lambda(seg) - big_lambda(t)));
  };
  double total = 0.0;
  double left = 0.0;
  for (int k = 0; k < splits; ++k) {
    const double right = seg * (1.0 - std::pow(0.5, k + 1));
    total += gl_integrate(f, left, right, points);
    left = right;
  }
  total += gl_integrate(f, left, seg, points);
  return total;
}

}  // namespace

AlmcCoefficients almc_coefficients(const AnnealingSchedule& schedule, int l) {
  if (l < 1 || l > schedule.steps)
    throw InvalidParameter("almc_coefficients: step index out of range");
  const double seg = schedule.segment_time(l);
  const double lam0 = lambda_at(schedule, schedule.theta[l - 1]);
  const double lam1 = lambda_at(schedule, schedule.theta[l]);

  AlmcCoefficients c;
  if (std::abs(lam0 - lam1) <= 1e-14 * std::max(1.0, lam0)) {
    // constant schedule: exact expressions
    const double z = lam0 * seg;
    c.decay = std::exp(-z);
    c.grad_weight = seg * phi1(z);
    c.noise = std::sqrt(2.0 * seg * phi1(2.0 * z));
    return c;
  }
  auto big_lambda = [&](double t) { return almc_lambda_integral(schedule, l, t); };
  c.decay = std::exp(-big_lambda(seg));
  const double i1 = weighted_segment_integral(big_lambda, seg, 1.0, 32);
  const double i2 = weighted_segment_integral(big_lambda, seg, 2.0, 32);
  const double i1_check = weighted_segment_integral(big_lambda, seg, 1.0, 16);
  const double i2_check = weighted_segment_integral(big_lambda, seg, 2.0, 16);
  if (std::abs(i1 - i1_check) > 1e-9 * std::max(i1, 1e-30) ||
      std::abs(i2 - i2_check) > 1e-9 * std::max(i2, 1e-30))
    throw AccuracyError("almc_coefficients: quadrature failed to converge");
  c.grad_weight = i1;
  c.noise = std::sqrt(2.0 * i2);
  return c;
}

KernelStepOutput almc_step(const Target& target, OracleCounter& counter,
                           const AnnealingSchedule& schedule, int l,
                           const Eigen::VectorXd& x, RngStream& rng) {
  if (!x.allFinite()) throw DomainError("almc_step: non-finite state");
  const AlmcCoefficients c = almc_coefficients(schedule, l);
  KernelStepOutput out;
  Eigen::VectorXd g = grad_counted(target, counter, x);
  out.oracle_calls_used = 1;
  out.x_next =
      c.decay * x - c.grad_weight * g + c.noise * rng.normal_vector(x.size());
  check_state(out.x_next, "almc_step");
  return out;
}

Eigen::VectorXd ou_forward_step(const Eigen::VectorXd& x, double t0, double t1,
                                RngStream& rng) {
  if (t0 < 0.0 || t1 < t0)
    throw InvalidParameter("ou_forward_step: need 0 <= t0 <= t1");
  if (t1 == t0) return x;
  const double dt = t1 - t0;
  const double decay = std::exp(-dt);
  const double sd = std::sqrt(-std::expm1(-2.0 * dt));
  return decay * x + sd * rng.normal_vector(x.size());
}

double rds_noise_correlation(double h) {
  if (!(h > 0.0))
    throw InvalidParameter("rds_noise_correlation: h must be positive");
  const double rho =
      std::sqrt(2.0) * std::expm1(h) / std::sqrt(std::expm1(2.0 * h) * h);
  return std::min(rho, 1.0);
}

KernelStepOutput rds_step(const ScoreFn& score_fn, const Eigen::VectorXd& x,
                          double t_k, double t_k1, double total_time,
                          RngStream& rng) {
  if (!(t_k >= 0.0 && t_k1 > t_k))
    throw InvalidParameter("rds_step: need 0 <= t_k < t_k1");
  const double h = t_k1 - t_k;
  Eigen::VectorXd s = score_fn(total_time - t_k, x);
  if (!s.allFinite()) throw ScoreEstimationError("rds_step: non-finite score");

  const double eh = std::exp(h);
  const double noise_sd = std::sqrt(std::expm1(2.0 * h));
  const double rho = rds_noise_correlation(h);

  Eigen::VectorXd xi1 = rng.normal_vector(x.size());
  Eigen::VectorXd xi2 =
      rho * xi1 + std::sqrt(std::max(0.0, 1.0 - rho * rho)) *
                      rng.normal_vector(x.size());

  KernelStepOutput out;
  out.x_next = eh * x + 2.0 * (eh - 1.0) * s + noise_sd * xi1;
  check_state(out.x_next, "rds_step");
  out.path_noise = std::move(xi2);
  out.score = std::move(s);
  out.oracle_calls_used = 1;
  return out;
}

RejectionResult rejection_sample_posterior(const Target& target,
                                           OracleCounter& counter, double t,
                                           const Eigen::VectorXd& x,
                                           double v_lower_bound,
                                           RngStream& rng, long max_tries,
                                           RejectionProposal mode) {
  if (!(t > 0.0))
    throw InvalidParameter("rejection_sample_posterior: t must be positive");
  const double s2 = std::expm1(2.0 * t);  // e^{2t} - 1
  const Eigen::VectorXd center = std::exp(t) * x;

  bool use_target = mode == RejectionProposal::kTarget;
  if (mode == RejectionProposal::kAuto && target.has_sampler()) {
    const double spread = target.second_moment_m2.value_or(double(target.dim));
    use_target = s2 > 0.25 * spread;
  }
  if (use_target && !target.has_sampler())
    throw UnsupportedTargetError(
        "rejection_sample_posterior: target proposal needs an exact sampler");

  RejectionResult res;
  if (use_target) {
    for (long tries = 0; tries < max_tries; ++tries) {
      ++res.proposals;
      Eigen::VectorXd x0 = target.sampler(rng, 1).row(0);
      const double log_acc = -(x0 - center).squaredNorm() / (2.0 * s2);
      if (std::log(rng.uniform()) < log_acc) {
        res.sample = std::move(x0);
        return res;
      }
    }
  } else {
    const double sd = std::sqrt(s2);
    for (long tries = 0; tries < max_tries; ++tries) {
      ++res.proposals;
      Eigen::VectorXd x0 = center + sd * rng.normal_vector(x.size());
      const double v = value_counted(target, counter, x0);
      if (std::log(rng.uniform()) < -(v - v_lower_bound)) {
        res.sample = std::move(x0);
        return res;
      }
    }
  }
  throw RejectionBudgetError(
      "rejection_sample_posterior: exceeded max_tries (envelope too loose or "
      "t too small)");
}

double gd_potential_lower_bound(const Target& target, OracleCounter& counter,
                                const Eigen::VectorXd& start, int steps) {
  Eigen::VectorXd x = start;
  double lo = value_counted(target, counter, x);
  double hi = lo;
  const double step = 0.5 / std::max(local_smoothness(target, start), 1.0);
  for (int i = 0; i < steps; ++i) {
    x -= step * grad_counted(target, counter, x);
    if (!x.allFinite()) break;
    const double v = value_counted(target, counter, x);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return lo - 0.1 * (hi - lo);
}

}  // namespace zest
