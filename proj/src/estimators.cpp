#include "zest/estimators.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "zest/errors.hpp"
#include "zest/kernels.hpp"
#include "zest/numeric.hpp"
#include "zest/parallel.hpp"

namespace zest {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct CounterSnapshot {
  std::uint64_t grads, values;
  explicit CounterSnapshot(const OracleCounter& c)
      : grads(c.grad_calls()), values(c.value_calls()) {}
  void finish(const OracleCounter& c, EstimateReport& r) const {
    r.grad_calls = c.grad_calls() - grads;
    r.value_calls = c.value_calls() - values;
  }
};

// Per-particle outcome slot; reduced serially in index order.
struct ParticleSlot {
  double z = 0.0;
  double work = 0.0;
  Eigen::VectorXd final_state;
  bool failed = false;
  std::string failure;
};

void reduce_particles(const std::vector<ParticleSlot>& slots,
                      EstimateReport& report, SampleSet* samples_out,
                      int dim) {
  int ok = 0;
  for (const auto& s : slots) {
    ok += s.failed ? 0 : 1;
    if (s.failed) ++report.failure_reasons[s.failure];
  }
  report.n_failures = int(slots.size()) - ok;
  if (report.n_failures > 0 &&
      report.n_failures * 100 > int(slots.size())) {
    std::string detail;
    for (const auto& [reason, count] : report.failure_reasons)
      detail += " " + reason + " x" + std::to_string(count);
    throw RunFailure("more than 1% of particles failed:" + detail);
  }
  report.z_hat_samples.reserve(ok);
  report.work_samples.reserve(ok);
  if (samples_out) {
    samples_out->points.resize(ok, dim);
    samples_out->estimator = report.method;
    samples_out->seed = report.seed;
  }
  int row = 0;
  for (const auto& s : slots) {
    if (s.failed) continue;
    report.z_hat_samples.push_back(s.z);
    report.work_samples.push_back(s.work);
    if (samples_out) samples_out->points.row(row++) = s.final_state;
  }
}

bool particle_ok(double z, const Eigen::VectorXd& x) {
  return std::isfinite(z) && z > 0.0 && x.allFinite();
}

std::vector<double> ti_level_chain(const TiConfig& cfg, int dim) {
  const double lam_min =
      cfg.lambda_min > 0.0 ? cfg.lambda_min : 0.5 / std::sqrt(double(dim));
  double decay = cfg.decay;
  if (decay == 0.0)
    decay = std::min(0.95, 1.45 / (1.0 + 1.0 / std::sqrt(double(dim))));
  if (!(decay > 0.0 && decay < 1.0))
    throw InvalidParameter("ti: decay factor must lie in (0, 1)");
  if (!(cfg.lambda0 > lam_min))
    throw InvalidParameter("ti: lambda0 must exceed lambda_min");
  std::vector<double> lam{cfg.lambda0};
  while (lam.back() > lam_min) lam.push_back(lam.back() * decay);
  lam.push_back(0.0);
  return lam;
}

}  // namespace

nlohmann::json EstimateReport::to_json() const {
  nlohmann::json j;
  j["method"] = method;
  j["z_hat_samples"] = z_hat_samples;
  if (log_z0_hat) j["log_z0_hat"] = *log_z0_hat;
  j["work_samples"] = work_samples;
  j["grad_calls"] = grad_calls;
  j["value_calls"] = value_calls;
  j["seed"] = seed;
  j["elapsed_seconds"] = elapsed_seconds;
  j["n_failures"] = n_failures;
  if (!failure_reasons.empty()) j["failure_reasons"] = failure_reasons;
  j["config"] = config_echo;
  return j;
}

double EstimateReport::mean_z() const {
  if (z_hat_samples.empty()) return 0.0;
  double s = 0.0;
  for (double z : z_hat_samples) s += z;
  return s / double(z_hat_samples.size());
}

TiResult estimate_ti(const Target& target, OracleCounter& counter,
                     const TiConfig& cfg, double regularization,
                     std::uint64_t seed, int workers) {
  const auto t0 = Clock::now();
  CounterSnapshot snap(counter);
  if (cfg.particles < 1) throw InvalidParameter("ti: need at least 1 particle");
  const int d = target.dim;
  const double reg = regularization;

  auto grad_u = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd g = grad_counted(target, counter, x);
    if (reg != 0.0) g.noalias() += 2.0 * reg * x;
    return g;
  };
  auto value_u = [&](const Eigen::VectorXd& x) {
    return target.potential(x) + reg * x.squaredNorm();
  };

  const std::vector<double> lam = ti_level_chain(cfg, d);
  const int transitions = int(lam.size()) - 1;

  // quadratic anchor at lambda0, sized by the curvature near the origin;
  // the probe is setup work and stays off the sampling-oracle tally
  double smooth = cfg.smoothness_override;
  if (smooth <= 0.0) {
    Target u_probe = target;
    u_probe.grad = [&target, reg](const Eigen::VectorXd& x) {
      Eigen::VectorXd g = target.grad(x);
      if (reg != 0.0) g.noalias() += 2.0 * reg * x;
      return g;
    };
    smooth = local_smoothness(u_probe, Eigen::VectorXd::Zero(d));
  }
  const Eigen::VectorXd origin = Eigen::VectorXd::Zero(d);
  const Eigen::VectorXd g0 = grad_counted(target, counter, origin);
  double log_z = -value_u(origin) +
                 g0.squaredNorm() / (2.0 * (smooth + cfg.lambda0)) +
                 0.5 * d * std::log(2.0 * M_PI / (smooth + cfg.lambda0));

  std::vector<RngStream> streams;
  streams.reserve(cfg.particles);
  std::vector<Eigen::VectorXd> particles(cfg.particles);
  const double init_sd = 1.0 / std::sqrt(smooth + cfg.lambda0);
  for (int p = 0; p < cfg.particles; ++p) {
    streams.emplace_back(seed_for(seed, 0, p));
    particles[p] = init_sd * streams[p].normal_vector(d);
  }

  std::vector<double> g_values(cfg.particles);
  for (int k = 0; k <= transitions; ++k) {
    const double lam_k = lam[k];
    const double step = cfg.lmc_step_scale / (smooth + lam_k);
    parallel_for(cfg.particles, workers, [&](std::int64_t p) {
      GradFn grad = [&](const Eigen::VectorXd& x) {
        Eigen::VectorXd g = grad_u(x);
        g.noalias() += lam_k * x;
        return g;
      };
      for (int s = 0; s < cfg.lmc_steps; ++s)
        particles[p] = lmc_step(grad, particles[p], step, streams[p]);
      if (k < transitions) {
        const double dl = lam[k] - lam[k + 1];
        g_values[p] = std::exp(0.5 * dl * particles[p].squaredNorm());
      }
    });
    if (k < transitions) {
      double mean_g = 0.0;
      for (double g : g_values) mean_g += g;
      mean_g /= cfg.particles;
      if (!(mean_g > 0.0) || !std::isfinite(mean_g))
        throw DivergenceError("ti: level ratio degenerated");
      log_z += std::log(mean_g);
    }
  }

  TiResult result;
  result.log_z0 = log_z;
  result.final_samples.resize(cfg.particles, d);
  for (int p = 0; p < cfg.particles; ++p)
    result.final_samples.row(p) = particles[p];
  result.report.method = "ti";
  result.report.seed = seed;
  result.report.log_z0_hat = log_z;
  result.report.z_hat_samples = {std::exp(log_z)};
  result.report.config_echo = {
      {"lambda0", std::to_string(cfg.lambda0)},
      {"levels", std::to_string(lam.size())},
      {"particles", std::to_string(cfg.particles)},
      {"lmc_steps", std::to_string(cfg.lmc_steps)},
      {"regularization", std::to_string(reg)}};
  snap.finish(counter, result.report);
  result.report.elapsed_seconds = seconds_since(t0);
  return result;
}

EstimateReport estimate_ais(const Target& target, OracleCounter& counter,
                            const AisConfig& cfg, int n_particles,
                            std::uint64_t seed, int workers,
                            SampleSet* samples_out) {
  const auto t0 = Clock::now();
  CounterSnapshot snap(counter);
  if (n_particles < 1) throw InvalidParameter("ais: need particles >= 1");
  const double lambda0 = cfg.lambda0 > 0.0 ? cfg.lambda0 : 2.0 * target.beta;
  const double total_time =
      cfg.total_time > 0.0 ? cfg.total_time : cfg.steps * cfg.step_time;
  const AnnealingSchedule schedule =
      AnnealingSchedule::uniform(cfg.r, lambda0, cfg.steps, total_time);
  const int M = schedule.steps;

  TiConfig ti_cfg = cfg.ti;
  if (ti_cfg.particles <= 0) ti_cfg.particles = n_particles;
  TiResult ti = estimate_ti(target, counter, ti_cfg, 0.5 * lambda0,
                            seed_for(seed, 0, 0x7469), workers);
  const double log_z0 = ti.log_z0;
  const double origin_smoothness =
      local_smoothness(target, Eigen::VectorXd::Zero(target.dim));

  // per-segment update coefficients and work weights, shared by particles
  std::vector<AlmcCoefficients> coef(M + 1);
  for (int l = 1; l <= M; ++l) coef[l] = almc_coefficients(schedule, l);
  std::vector<double> lam(M + 1);
  for (int l = 0; l <= M; ++l) lam[l] = lambda_at(schedule, schedule.theta[l]);

  // the schedule's own step rule, capped where the target curvature dominates
  const double init_step =
      std::min(1.0 / (2.0 * lambda0), 0.5 / std::max(origin_smoothness, 1e-12));
  const int d = target.dim;
  std::vector<ParticleSlot> slots(n_particles);
  parallel_for(n_particles, workers, [&](std::int64_t p) {
    RngStream rng(seed_for(seed, 1, p));
    ParticleSlot& slot = slots[p];
    try {
      GradFn grad0 = [&](const Eigen::VectorXd& y) {
        Eigen::VectorXd g = grad_counted(target, counter, y);
        g.noalias() += lambda0 * y;
        return g;
      };
      Eigen::VectorXd x = Eigen::VectorXd::Zero(d);
      for (int s = 0; s < cfg.init_lmc_steps; ++s)
        x = lmc_step(grad0, x, init_step, rng);

      double work = -0.5 * (lam[0] - lam[1]) * x.squaredNorm();
      for (int l = 1; l <= M - 1; ++l) {
        Eigen::VectorXd g = grad_counted(target, counter, x);
        x = coef[l].decay * x - coef[l].grad_weight * g +
            coef[l].noise * rng.normal_vector(d);
        if (!x.allFinite() || x.norm() > kDivergenceRadius)
          throw DivergenceError("ais: trajectory diverged");
        work -= 0.5 * (lam[l] - lam[l + 1]) * x.squaredNorm();
      }
      if (cfg.draw_final_sample && M >= 1) {
        Eigen::VectorXd g = grad_counted(target, counter, x);
        x = coef[M].decay * x - coef[M].grad_weight * g +
            coef[M].noise * rng.normal_vector(d);
        if (!x.allFinite() || x.norm() > kDivergenceRadius)
          throw DivergenceError("ais: trajectory diverged");
      }
      slot.work = work;
      slot.z = std::exp(log_z0 - work);
      slot.final_state = x;
      slot.failed = !particle_ok(slot.z, x);
    } catch (const DivergenceError& e) {
      slot.failed = true;
      slot.failure = e.what();
    }
  });

  EstimateReport report;
  report.method = "ais";
  report.seed = seed;
  report.log_z0_hat = log_z0;
  report.config_echo = {{"lambda0", std::to_string(lambda0)},
                        {"r", std::to_string(cfg.r)},
                        {"steps", std::to_string(M)},
                        {"total_time", std::to_string(total_time)},
                        {"particles", std::to_string(n_particles)}};
  reduce_particles(slots, report, samples_out, d);
  snap.finish(counter, report);
  report.elapsed_seconds = seconds_since(t0);
  return report;
}

EstimateReport estimate_je(const Target& target, OracleCounter& counter,
                           const JeConfig& cfg, int n_particles,
                           std::uint64_t seed, int workers,
                           SampleSet* samples_out) {
  const auto t0 = Clock::now();
  CounterSnapshot snap(counter);
  if (n_particles < 1) throw InvalidParameter("je: need particles >= 1");
  if (cfg.n_steps < 1) throw InvalidParameter("je: need n_steps >= 1");
  const double T = cfg.total_time;
  const double h = T / cfg.n_steps;
  const int d = target.dim;

  double log_z0 = 0.0;
  if (cfg.curve == JeCurve::kGeometric) {
    const double lambda0 = cfg.lambda0 > 0.0 ? cfg.lambda0 : 2.0 * target.beta;
    TiConfig ti_cfg = cfg.ti;
    if (ti_cfg.particles <= 0) ti_cfg.particles = n_particles;
    log_z0 = estimate_ti(target, counter, ti_cfg, 0.5 * lambda0,
                         seed_for(seed, 0, 0x7469), workers)
                 .log_z0;
  } else {
    // the moving trap N(theta L, 1/K) keeps Z_theta constant
    log_z0 = 0.5 * std::log(2.0 * M_PI / cfg.pull_stiffness);
  }

  std::vector<ParticleSlot> slots(n_particles);
  if (cfg.curve == JeCurve::kGeometric) {
    const double lambda0 = cfg.lambda0 > 0.0 ? cfg.lambda0 : 2.0 * target.beta;
    const double init_step = std::min(
        1.0 / (2.0 * lambda0),
        0.5 / std::max(local_smoothness(target, Eigen::VectorXd::Zero(d)),
                       1e-12));
    parallel_for(n_particles, workers, [&](std::int64_t p) {
      RngStream rng(seed_for(seed, 1, p));
      ParticleSlot& slot = slots[p];
      try {
        GradFn grad0 = [&](const Eigen::VectorXd& y) {
          Eigen::VectorXd g = grad_counted(target, counter, y);
          g.noalias() += lambda0 * y;
          return g;
        };
        Eigen::VectorXd x = Eigen::VectorXd::Zero(d);
        for (int s = 0; s < cfg.init_lmc_steps; ++s)
          x = lmc_step(grad0, x, init_step, rng);

        double work = 0.0;
        for (int k = 0; k < cfg.n_steps; ++k) {
          const double theta = (k * h) / T;
          const double lam = lambda0 * std::pow(1.0 - theta, cfg.r);
          const double dlam = -lambda0 * cfg.r * std::pow(1.0 - theta, cfg.r - 1.0);
          work += (h / T) * 0.5 * dlam * x.squaredNorm();
          Eigen::VectorXd g = grad_counted(target, counter, x);
          x -= h * (g + lam * x);
          x += std::sqrt(2.0 * h) * rng.normal_vector(d);
          if (!x.allFinite() || x.norm() > kDivergenceRadius)
            throw DivergenceError("je: trajectory diverged");
        }
        slot.work = work;
        slot.z = std::exp(log_z0 - work);
        slot.final_state = x;
        slot.failed = !particle_ok(slot.z, x);
      } catch (const DivergenceError& e) {
        slot.failed = true;
        slot.failure = e.what();
      }
    });
  } else {
    const double K = cfg.pull_stiffness;
    const double L = cfg.pull_length;
    const double decay = std::exp(-K * h);
    const double noise_sd = std::sqrt(-std::expm1(-2.0 * K * h) / K);
    parallel_for(n_particles, workers, [&](std::int64_t p) {
      RngStream rng(seed_for(seed, 1, p));
      ParticleSlot& slot = slots[p];
      Eigen::VectorXd x(1);
      x[0] = rng.normal() / std::sqrt(K);
      double work = 0.0;
      for (int k = 0; k < cfg.n_steps; ++k) {
        const double tk = k * h, tk1 = (k + 1) * h;
        const double theta = tk / T;
        // d/dtheta of K (x - theta L)^2 / 2
        work += (h / T) * (-K * L * (x[0] - theta * L));
        // exact transition of the trap-following OU step
        const double mean_add =
            (L / T) * ((tk1 - 1.0 / K) - decay * (tk - 1.0 / K));
        x[0] = decay * x[0] + mean_add + noise_sd * rng.normal();
      }
      slot.work = work;
      slot.z = std::exp(log_z0 - work);
      slot.final_state = x;
      slot.failed = !particle_ok(slot.z, x);
    });
  }

  EstimateReport report;
  report.method = "je";
  report.seed = seed;
  report.log_z0_hat = log_z0;
  report.config_echo = {
      {"curve", cfg.curve == JeCurve::kGeometric ? "geometric" : "gaussian_pull"},
      {"total_time", std::to_string(T)},
      {"n_steps", std::to_string(cfg.n_steps)},
      {"particles", std::to_string(n_particles)}};
  reduce_particles(slots, report, samples_out,
                   cfg.curve == JeCurve::kGeometric ? d : 1);
  snap.finish(counter, report);
  report.elapsed_seconds = seconds_since(t0);
  return report;
}

EstimateReport estimate_rds(const Target& target, OracleCounter& counter,
                            const RdsConfig& cfg,
                            const ScoreEstimator& score, int n_particles,
                            std::uint64_t seed, int workers,
                            SampleSet* samples_out) {
  const auto t0 = Clock::now();
  CounterSnapshot snap(counter);
  if (n_particles < 1) throw InvalidParameter("rds: need particles >= 1");
  if (cfg.delta < 0.0) throw InvalidParameter("rds: delta must be >= 0");
  const double horizon = cfg.total_time - cfg.delta;
  if (horizon < 0.0)
    throw InvalidParameter("rds: total_time must be >= delta");
  if (cfg.steps == 0 && horizon > 0.0)
    throw InvalidParameter("rds: steps == 0 requires total_time == delta");
  const int d = target.dim;
  const int N = cfg.steps;
  const double s0 = cfg.init_scale;
  if (!(s0 > 0.0)) throw InvalidParameter("rds: init_scale must be positive");

  std::vector<ParticleSlot> slots(n_particles);
  parallel_for(n_particles, workers, [&](std::int64_t p) {
    RngStream rng(seed_for(seed, 1, p));
    ParticleSlot& slot = slots[p];
    try {
      Eigen::VectorXd x = s0 * rng.normal_vector(d);
      double work = -0.5 * x.squaredNorm() / (s0 * s0) -
                    0.5 * d * (kLog2Pi + 2.0 * std::log(s0));
      ScoreFn score_fn = [&](double time, const Eigen::VectorXd& y) {
        return score(time, y, rng);
      };
      for (int k = 0; k < N; ++k) {
        const double tk = horizon * double(k) / N;
        const double tk1 = horizon * double(k + 1) / N;
        KernelStepOutput out =
            rds_step(score_fn, x, tk, tk1, cfg.total_time, rng);
        const double hk = tk1 - tk;
        work += hk * out.score->squaredNorm() +
                std::sqrt(2.0 * hk) * out.score->dot(*out.path_noise);
        x = std::move(out.x_next);
      }
      work += value_counted(target, counter, x) - horizon * d;
      slot.work = work;
      // a huge positive work is a legitimate (vanishing) estimate, not a
      // failure; keep it strictly positive for downstream ratio arithmetic
      slot.z = std::max(std::exp(-work), std::numeric_limits<double>::min());
      slot.final_state = x;
      slot.failed = !particle_ok(slot.z, x);
      if (slot.failed) slot.failure = "non-finite estimate";
    } catch (const DivergenceError& e) {
      slot.failed = true;
      slot.failure = e.what();
    } catch (const ScoreEstimationError& e) {
      slot.failed = true;
      slot.failure = e.what();
    } catch (const RejectionBudgetError& e) {
      slot.failed = true;
      slot.failure = e.what();
    } catch (const DegenerateWeightsError& e) {
      slot.failed = true;
      slot.failure = e.what();
    }
  });

  EstimateReport report;
  report.method = std::string("rds-") + score.name();
  report.seed = seed;
  report.config_echo = {{"total_time", std::to_string(cfg.total_time)},
                        {"delta", std::to_string(cfg.delta)},
                        {"steps", std::to_string(N)},
                        {"init_scale", std::to_string(s0)},
                        {"score", score.name()},
                        {"budget", std::to_string(score.params().budget)},
                        {"particles", std::to_string(n_particles)}};
  reduce_particles(slots, report, samples_out, d);
  snap.finish(counter, report);
  report.elapsed_seconds = seconds_since(t0);
  return report;
}

double median_trick(std::vector<double> z_hats) {
  if (z_hats.empty()) throw InvalidParameter("median_trick: empty input");
  std::sort(z_hats.begin(), z_hats.end());
  return z_hats[(z_hats.size() - 1) / 2];  // lower median
}

int n_for_confidence(double zeta) {
  if (!(zeta > 0.0 && zeta < 0.25))
    throw InvalidParameter("n_for_confidence: zeta must lie in (0, 1/4)");
  return int(std::ceil(72.0 * std::log(1.0 / zeta)));
}

double free_energy(double z_hat) {
  if (!(z_hat > 0.0) || !std::isfinite(z_hat))
    throw DomainError("free_energy: z_hat must be positive and finite");
  return -std::log(z_hat);
}

}  // namespace zest
