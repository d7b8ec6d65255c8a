#include "zest/scores.hpp"

#include <cmath>

#include "zest/curves.hpp"
#include "zest/errors.hpp"
#include "zest/numeric.hpp"

namespace zest {

ScoreKind parse_score_kind(const std::string& name) {
  if (name == "exact" || name == "exact_mog") return ScoreKind::kExactMog;
  if (name == "rdmc") return ScoreKind::kRdmc;
  if (name == "rsdmc") return ScoreKind::kRsdmc;
  if (name == "zodmc") return ScoreKind::kZodmc;
  if (name == "sndmc") return ScoreKind::kSndmc;
  throw ConfigError("unknown score kind '" + name + "'");
}

std::string score_kind_name(ScoreKind kind) {
  switch (kind) {
    case ScoreKind::kExactMog: return "exact";
    case ScoreKind::kRdmc: return "rdmc";
    case ScoreKind::kRsdmc: return "rsdmc";
    case ScoreKind::kZodmc: return "zodmc";
    case ScoreKind::kSndmc: return "sndmc";
  }
  return "?";
}

Eigen::VectorXd score_exact_mog(const Target& mog_target, double t,
                                const Eigen::VectorXd& x) {
  if (!mog_target.mixture)
    throw UnsupportedTargetError("score_exact_mog: target is not a mixture");
  if (t == 0.0) return mog_target.mixture->score(x);
  GaussianMixture mt = ou_marginal_mog(*mog_target.mixture, t);
  return mt.score(x);
}

namespace {

struct PosteriorGeometry {
  double s2;               // e^{2t} - 1, variance of the Gaussian factor
  double sigma2;           // 1 - e^{-2t}, Tweedie denominator
  double decay;            // e^{-t}
  Eigen::VectorXd center;  // e^t x
};

PosteriorGeometry posterior_geometry(double t, const Eigen::VectorXd& x) {
  if (!(t > 0.0)) throw InvalidParameter("score estimate: t must be positive");
  PosteriorGeometry g;
  g.s2 = std::expm1(2.0 * t);
  g.sigma2 = -std::expm1(-2.0 * t);
  g.decay = std::exp(-t);
  g.center = std::exp(t) * x;
  return g;
}

Eigen::VectorXd tweedie_mean(const std::vector<Eigen::VectorXd>& draws,
                             const PosteriorGeometry& g,
                             const Eigen::VectorXd& x) {
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(x.size());
  for (const auto& x0 : draws) acc += g.decay * x0 - x;
  return acc / (double(draws.size()) * g.sigma2);
}

// Self-normalized importance resampling from the Gaussian factor; falls back
// to the max-weight particle when the batch degenerates.
std::vector<Eigen::VectorXd> importance_init(const Target& target,
                                             OracleCounter& counter,
                                             const PosteriorGeometry& g,
                                             int budget, RngStream& rng) {
  const double sd = std::sqrt(g.s2);
  std::vector<Eigen::VectorXd> proposals(budget);
  std::vector<double> logw(budget);
  for (int i = 0; i < budget; ++i) {
    proposals[i] = g.center + sd * rng.normal_vector(g.center.size());
    logw[i] = -value_counted(target, counter, proposals[i]);
  }
  const double lw_max = *std::max_element(logw.begin(), logw.end());
  std::vector<double> w(budget);
  double total = 0.0;
  for (int i = 0; i < budget; ++i) {
    w[i] = std::isfinite(logw[i]) ? std::exp(logw[i] - lw_max) : 0.0;
    total += w[i];
  }
  std::vector<Eigen::VectorXd> out(budget);
  if (!(total > 0.0) || !std::isfinite(total)) {
    const int best =
        int(std::max_element(logw.begin(), logw.end()) - logw.begin());
    for (int i = 0; i < budget; ++i) out[i] = proposals[best];
    return out;
  }
  for (int i = 0; i < budget; ++i) out[i] = proposals[rng.categorical(w)];
  return out;
}

GradFn posterior_grad(const Target& target, OracleCounter& counter,
                      const PosteriorGeometry& g) {
  return [&target, &counter, g](const Eigen::VectorXd& y) {
    Eigen::VectorXd gr = grad_counted(target, counter, y);
    gr.noalias() += (y - g.center) / g.s2;
    return gr;
  };
}

}  // namespace

Eigen::VectorXd score_rdmc(const Target& target, OracleCounter& counter,
                           double t, const Eigen::VectorXd& x,
                           const ScoreParams& params, RngStream& rng) {
  const PosteriorGeometry g = posterior_geometry(t, x);
  std::vector<Eigen::VectorXd> particles =
      importance_init(target, counter, g, params.budget, rng);
  GradFn grad = posterior_grad(target, counter, g);
  try {
    for (int step = 0; step < params.lmc_steps; ++step)
      for (auto& p : particles) p = lmc_step(grad, p, params.lmc_step, rng);
  } catch (const DivergenceError& e) {
    throw ScoreEstimationError(std::string("rdmc: ") + e.what());
  }
  return tweedie_mean(particles, g, x);
}

Eigen::VectorXd score_rsdmc(const Target& target, OracleCounter& counter,
                            double t, const Eigen::VectorXd& x, int depth,
                            const ScoreParams& params, RngStream& rng) {
  if (depth < 1) throw InvalidParameter("rsdmc: depth must be >= 1");
  if (depth == 1) return score_rdmc(target, counter, t, x, params, rng);

  const PosteriorGeometry g = posterior_geometry(t, x);
  // Posterior draws via the reverse diffusion started at x: its transition
  // from noising time t down to 0 is exactly the conditional law of Y_0.
  const int n_aux = std::max(1, params.aux_steps);
  std::vector<Eigen::VectorXd> draws(params.budget);
  for (int i = 0; i < params.budget; ++i) {
    Eigen::VectorXd y = x;
    for (int j = 0; j < n_aux; ++j) {
      const double a = t * double(n_aux - j) / n_aux;
      const double b = t * double(n_aux - j - 1) / n_aux;
      const double h = a - b;
      Eigen::VectorXd s = score_rsdmc(target, counter, a, y, depth - 1, params, rng);
      const double eh = std::exp(h);
      y = eh * y + 2.0 * (eh - 1.0) * s +
          std::sqrt(std::expm1(2.0 * h)) * rng.normal_vector(x.size());
      if (!y.allFinite() || y.norm() > kDivergenceRadius)
        throw ScoreEstimationError("rsdmc: auxiliary path diverged");
    }
    draws[i] = std::move(y);
  }
  // polish against the exact posterior potential
  if (params.polish_steps > 0) {
    GradFn grad = posterior_grad(target, counter, g);
    try {
      for (int step = 0; step < params.polish_steps; ++step)
        for (auto& p : draws) p = lmc_step(grad, p, params.lmc_step, rng);
    } catch (const DivergenceError& e) {
      throw ScoreEstimationError(std::string("rsdmc: ") + e.what());
    }
  }
  return tweedie_mean(draws, g, x);
}

Eigen::VectorXd score_zodmc(const Target& target, OracleCounter& counter,
                            double t, const Eigen::VectorXd& x,
                            const ScoreParams& params, RngStream& rng) {
  const PosteriorGeometry g = posterior_geometry(t, x);
  double v_floor;
  if (target.potential_lower_bound) {
    v_floor = *target.potential_lower_bound;
  } else {
    v_floor = gd_potential_lower_bound(target, counter, g.center);
  }
  std::vector<Eigen::VectorXd> draws(params.budget);
  for (int i = 0; i < params.budget; ++i)
    draws[i] = rejection_sample_posterior(target, counter, t, x, v_floor, rng,
                                          params.max_tries, params.proposal)
                   .sample;
  return tweedie_mean(draws, g, x);
}

Eigen::VectorXd score_sndmc(const Target& target, OracleCounter& counter,
                            double t, const Eigen::VectorXd& x,
                            const ScoreParams& params, RngStream& rng) {
  const PosteriorGeometry g = posterior_geometry(t, x);
  const double sd = std::sqrt(g.sigma2);
  const double et = std::exp(t);
  const int d = int(x.size());

  std::vector<Eigen::VectorXd> xi(params.budget);
  std::vector<double> v(params.budget);
  double v_min = std::numeric_limits<double>::infinity();
  for (int i = 0; i < params.budget; ++i) {
    xi[i] = sd * rng.normal_vector(d);
    v[i] = value_counted(target, counter, et * (x - xi[i]));
    if (v[i] < v_min) v_min = v[i];
  }
  // shift by the batch minimum; the ratio is invariant to it
  Eigen::VectorXd num = Eigen::VectorXd::Zero(d);
  double den = 0.0;
  for (int i = 0; i < params.budget; ++i) {
    const double w = std::exp(-(v[i] - v_min));
    if (!std::isfinite(w)) continue;
    num += w * xi[i];
    den += w;
  }
  if (!(den > 0.0) || !std::isfinite(den))
    throw DegenerateWeightsError("sndmc: all weights vanished");
  return -num / (den * g.sigma2);
}

ScoreEstimator::ScoreEstimator(const Target& target, OracleCounter& counter,
                               ScoreParams params)
    : target_(&target), counter_(&counter), params_(params) {
  if (params_.budget < 1)
    throw InvalidParameter("score estimator: budget must be >= 1");
  if (params_.kind == ScoreKind::kRsdmc && params_.depth < 1)
    throw InvalidParameter("score estimator: rsdmc depth must be >= 1");
  if (params_.kind == ScoreKind::kExactMog && !target.mixture)
    throw UnsupportedTargetError(
        "score estimator: exact scores need a mixture target");
}

Eigen::VectorXd ScoreEstimator::operator()(double t, const Eigen::VectorXd& x,
                                           RngStream& rng) const {
  switch (params_.kind) {
    case ScoreKind::kExactMog:
      return score_exact_mog(*target_, t, x);
    case ScoreKind::kRdmc:
      return score_rdmc(*target_, *counter_, t, x, params_, rng);
    case ScoreKind::kRsdmc:
      return score_rsdmc(*target_, *counter_, t, x, params_.depth, params_, rng);
    case ScoreKind::kZodmc:
      return score_zodmc(*target_, *counter_, t, x, params_, rng);
    case ScoreKind::kSndmc:
      return score_sndmc(*target_, *counter_, t, x, params_, rng);
  }
  throw InvalidParameter("score estimator: unknown kind");
}

}  // namespace zest
