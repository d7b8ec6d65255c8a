#include "zest/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <set>

#include "zest/curves.hpp"
#include "zest/errors.hpp"
#include "zest/kernels.hpp"
#include "zest/numeric.hpp"
#include "zest/parallel.hpp"

namespace zest {

namespace {

std::string format_g6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

bool is_rds_method(const std::string& m) {
  return m == "rds" || m == "rds-exact" || m == "rdmc" || m == "rsdmc" ||
         m == "zodmc" || m == "sndmc";
}

ScoreKind method_score_kind(const std::string& m, const ScoreParams& fallback) {
  if (m == "rds") return fallback.kind;
  if (m == "rds-exact") return ScoreKind::kExactMog;
  return parse_score_kind(m);
}

}  // namespace

RunConfig resolve_run_config(const ConfigFile& f) {
  RunConfig c;
  c.method = f.get_string("run.method", c.method);
  if (c.method != "ti" && c.method != "ais" && c.method != "je" &&
      !is_rds_method(c.method))
    throw ConfigError("unknown method '" + c.method + "'");
  c.target_name = f.get_string("run.target", c.target_name);
  c.particles = f.get_int("run.particles", c.particles);
  c.rounds = f.get_int("run.rounds", c.rounds);
  c.seed = f.get_u64("run.seed", c.seed);
  c.workers = f.get_int("run.workers", c.workers);
  c.out_path = f.get_string("run.out", c.out_path);
  c.epsilon_list = f.get_double_list("run.epsilon_list", c.epsilon_list);

  c.target_m = f.get_double("target.m", c.target_m);
  c.target_dim = f.get_int("target.dim", c.target_dim);
  c.target_cov_scale = f.get_double("target.cov_scale", c.target_cov_scale);
  c.target_mean = f.get_double_list("target.mean", c.target_mean);
  c.target_recenter = f.get_bool("target.recenter", c.target_recenter);
  c.target_beta_override =
      f.get_double("target.beta_override", c.target_beta_override);

  c.ais.lambda0 = f.get_double("schedule.lambda0", c.ais.lambda0);
  c.ais.r = f.get_double("schedule.r", c.ais.r);
  c.ais.steps = f.get_int("schedule.steps", c.ais.steps);
  c.ais.step_time = f.get_double("schedule.step_time", c.ais.step_time);
  c.ais.total_time = f.get_double("schedule.total_time", c.ais.total_time);
  c.ais.init_lmc_steps =
      f.get_int("schedule.init_lmc_steps", c.ais.init_lmc_steps);

  TiConfig& ti = c.ais.ti;
  ti.lambda0 = f.get_double("ti.lambda0", ti.lambda0);
  ti.decay = f.get_double("ti.decay", ti.decay);
  ti.lambda_min = f.get_double("ti.lambda_min", ti.lambda_min);
  ti.particles = f.get_int("ti.particles", 0);
  ti.lmc_steps = f.get_int("ti.lmc_steps", ti.lmc_steps);
  ti.lmc_step_scale = f.get_double("ti.lmc_step_scale", ti.lmc_step_scale);
  ti.smoothness_override = f.get_double("ti.smoothness", 0.0);

  const std::string curve = f.get_string("je.curve", "geometric");
  if (curve == "geometric")
    c.je.curve = JeCurve::kGeometric;
  else if (curve == "gaussian_pull")
    c.je.curve = JeCurve::kGaussianPull;
  else
    throw ConfigError("unknown je.curve '" + curve + "'");
  c.je.lambda0 = c.ais.lambda0;
  c.je.r = c.ais.r;
  c.je.total_time = f.get_double("je.total_time", c.je.total_time);
  c.je.n_steps = f.get_int("je.n_steps", c.je.n_steps);
  c.je.pull_length = f.get_double("je.pull_length", c.je.pull_length);
  c.je.pull_stiffness = f.get_double("je.pull_stiffness", c.je.pull_stiffness);
  c.je.init_lmc_steps = c.ais.init_lmc_steps;
  c.je.ti = ti;

  c.rds.total_time = f.get_double("rds.total_time", c.rds.total_time);
  c.rds.delta = f.get_double("rds.delta", c.rds.delta);
  c.rds.steps = f.get_int("rds.steps", c.rds.steps);
  c.rds.init_scale = f.get_double("rds.init_scale", c.rds.init_scale);

  c.score.kind = parse_score_kind(f.get_string("score.kind", "exact"));
  c.score.budget = f.get_int("score.budget", c.score.budget);
  c.score.lmc_steps = f.get_int("score.lmc_steps", c.score.lmc_steps);
  c.score.lmc_step = f.get_double("score.lmc_step", c.score.lmc_step);
  c.score.depth = f.get_int("score.depth", c.score.depth);
  c.score.aux_steps = f.get_int("score.aux_steps", c.score.aux_steps);
  c.score.polish_steps = f.get_int("score.polish_steps", c.score.polish_steps);
  c.score.max_tries = f.get_int("score.max_tries", int(c.score.max_tries));
  const std::string prop = f.get_string("score.proposal", "auto");
  if (prop == "auto")
    c.score.proposal = RejectionProposal::kAuto;
  else if (prop == "gaussian")
    c.score.proposal = RejectionProposal::kGaussian;
  else if (prop == "target")
    c.score.proposal = RejectionProposal::kTarget;
  else
    throw ConfigError("unknown score.proposal '" + prop + "'");

  c.mmd_sigmas = f.get_double_list("mmd.sigmas", c.mmd_sigmas);
  return c;
}

Target build_target(const RunConfig& cfg) {
  std::string name = cfg.target_name;
  double m = cfg.target_m;
  // mog1d(m) form
  const auto paren = name.find('(');
  if (paren != std::string::npos && name.back() == ')') {
    m = std::stod(name.substr(paren + 1, name.size() - paren - 2));
    name = name.substr(0, paren);
  }
  Target t;
  if (name == "gaussian") {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(cfg.target_dim);
    for (std::size_t i = 0;
         i < cfg.target_mean.size() && i < std::size_t(cfg.target_dim); ++i)
      mean[Eigen::Index(i)] = cfg.target_mean[i];
    t = make_gaussian(cfg.target_dim, mean, cfg.target_cov_scale);
  } else if (name == "gmm2d_paper") {
    t = make_gm2d_benchmark();
  } else if (name == "mueller_brown") {
    t = make_mueller_brown();
  } else if (name == "mog1d") {
    t = make_mog1d(m);
  } else {
    throw ConfigError("unknown target '" + cfg.target_name + "'");
  }
  if (cfg.target_recenter) t = recentered(t);
  if (cfg.target_beta_override > 0.0) t.beta = cfg.target_beta_override;
  return t;
}

RoundResult run_round(const Target& target, OracleCounter& counter,
                      const RunConfig& cfg, int round) {
  RoundResult rr;
  const std::uint64_t round_seed = seed_for(cfg.seed, std::uint64_t(round), 0);
  if (cfg.method == "ti") {
    TiConfig ti = cfg.ais.ti;
    if (ti.particles <= 0) ti.particles = cfg.particles;
    TiResult res =
        estimate_ti(target, counter, ti, 0.0, round_seed, cfg.workers);
    rr.report = res.report;
    rr.samples.points = res.final_samples;
    rr.samples.estimator = "ti";
    rr.samples.seed = round_seed;
  } else if (cfg.method == "ais") {
    rr.report = estimate_ais(target, counter, cfg.ais, cfg.particles,
                             round_seed, cfg.workers, &rr.samples);
  } else if (cfg.method == "je") {
    rr.report = estimate_je(target, counter, cfg.je, cfg.particles, round_seed,
                            cfg.workers, &rr.samples);
  } else if (is_rds_method(cfg.method)) {
    ScoreParams sp = cfg.score;
    sp.kind = method_score_kind(cfg.method, cfg.score);
    ScoreEstimator score(target, counter, sp);
    rr.report = estimate_rds(target, counter, cfg.rds, score, cfg.particles,
                             round_seed, cfg.workers, &rr.samples);
  } else {
    throw ConfigError("unknown method '" + cfg.method + "'");
  }
  rr.samples.round = round;
  rr.round_mean_z = rr.report.mean_z();
  return rr;
}

nlohmann::json run_estimate(const RunConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  Target target = build_target(cfg);
  OracleCounter counter;

  // stream fingerprints must stay distinct across the whole run
  std::set<std::uint64_t> fingerprints;
  std::uint64_t expected = 0;
  for (int r = 0; r < cfg.rounds; ++r) {
    const std::uint64_t rs = seed_for(cfg.seed, std::uint64_t(r), 0);
    for (int p = 0; p < cfg.particles; ++p) {
      fingerprints.insert(seed_for(rs, 1, std::uint64_t(p)));
      ++expected;
    }
  }
  if (fingerprints.size() != expected)
    throw RunFailure("per-particle seed streams collided");

  nlohmann::json out;
  out["method"] = cfg.method;
  out["target"] = target.name;
  out["seed"] = cfg.seed;
  out["rounds"] = cfg.rounds;
  out["particles"] = cfg.particles;
  out["config"] = {
      {"target", cfg.target_name},
      {"epsilon_list", cfg.epsilon_list},
      {"schedule",
       {{"lambda0", cfg.ais.lambda0},
        {"r", cfg.ais.r},
        {"steps", cfg.ais.steps},
        {"step_time", cfg.ais.step_time},
        {"total_time", cfg.ais.total_time},
        {"init_lmc_steps", cfg.ais.init_lmc_steps}}},
      {"ti",
       {{"lambda0", cfg.ais.ti.lambda0},
        {"decay", cfg.ais.ti.decay},
        {"particles", cfg.ais.ti.particles},
        {"lmc_steps", cfg.ais.ti.lmc_steps},
        {"lmc_step_scale", cfg.ais.ti.lmc_step_scale}}},
      {"je",
       {{"curve", cfg.je.curve == JeCurve::kGeometric ? "geometric"
                                                      : "gaussian_pull"},
        {"total_time", cfg.je.total_time},
        {"n_steps", cfg.je.n_steps},
        {"pull_length", cfg.je.pull_length},
        {"pull_stiffness", cfg.je.pull_stiffness}}},
      {"rds",
       {{"total_time", cfg.rds.total_time},
        {"delta", cfg.rds.delta},
        {"steps", cfg.rds.steps},
        {"init_scale", cfg.rds.init_scale}}},
      {"score",
       {{"kind", score_kind_name(cfg.score.kind)},
        {"budget", cfg.score.budget},
        {"lmc_steps", cfg.score.lmc_steps},
        {"lmc_step", cfg.score.lmc_step},
        {"depth", cfg.score.depth},
        {"max_tries", cfg.score.max_tries}}}};
  std::vector<double> round_means;
  std::vector<double> all_z;
  nlohmann::json per_round = nlohmann::json::array();
  for (int r = 0; r < cfg.rounds; ++r) {
    RoundResult rr = run_round(target, counter, cfg, r);
    round_means.push_back(rr.round_mean_z);
    for (double z : rr.report.z_hat_samples) all_z.push_back(z);
    per_round.push_back(rr.report.to_json());
  }
  out["round_mean_z"] = round_means;
  out["per_round"] = per_round;
  out["grad_calls"] = counter.grad_calls();
  out["value_calls"] = counter.value_calls();
  if (target.known_log_z) {
    const double z_true = std::exp(*target.known_log_z);
    RelativeErrorStats st =
        relative_error_stats(round_means, z_true, cfg.epsilon_list);
    out["z_ratio_mean"] = st.mean_ratio;
    out["z_ratio_std"] = st.std_ratio;
    nlohmann::json cov = nlohmann::json::array();
    for (std::size_t i = 0; i < cfg.epsilon_list.size(); ++i)
      cov.push_back({{"epsilon", cfg.epsilon_list[i]},
                     {"coverage", st.coverage[i]}});
    out["coverage"] = cov;
  }
  out["elapsed_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return out;
}

std::vector<std::string> default_benchmark_methods(const std::string& suite) {
  if (suite == "gm2d")
    return {"ti", "ais", "rds-exact", "rdmc", "zodmc", "sndmc"};
  if (suite == "mueller") return {"ti", "ais", "rdmc", "zodmc", "sndmc"};
  throw ConfigError("unknown benchmark suite '" + suite + "'");
}

RunConfig benchmark_config(const std::string& suite, const std::string& scale,
                           const std::string& method, std::uint64_t seed,
                           int workers) {
  if (scale != "desk" && scale != "paper")
    throw ConfigError("unknown scale '" + scale + "'");
  const bool desk = scale == "desk";
  RunConfig c;
  c.method = method;
  c.seed = seed;
  c.workers = workers;
  c.rounds = desk ? 16 : 1024;
  c.particles = desk ? 256 : 1024;
  if (suite == "gm2d")
    c.target_name = "gmm2d_paper";
  else if (suite == "mueller")
    c.target_name = "mueller_brown";
  else
    throw ConfigError("unknown benchmark suite '" + suite + "'");

  // shared reverse-diffusion settings
  c.rds = {5.0, 0.005, 50};
  c.score.budget = 64;
  c.ais.ti.particles = 0;  // follow the run particle count

  if (method == "ti") {
    c.ais.ti.lambda0 = 100.0;
    c.ais.ti.lmc_steps = desk ? 450 : 1500;
    c.ais.ti.lmc_step_scale = desk ? 0.1 : 0.05;
  } else if (method == "ais") {
    c.ais.lambda0 = 100.0;
    c.ais.r = 1.0;
    c.ais.steps = desk ? 15000 : 60000;
    c.ais.step_time = 0.01;
    c.ais.ti.lambda0 = 100.0;
    c.ais.ti.lmc_steps = desk ? 450 : 1500;
    c.ais.ti.lmc_step_scale = desk ? 0.1 : 0.05;
  } else if (method == "rds-exact") {
    // exact mixture scores; mixture targets only
  } else if (method == "rdmc") {
    c.score.budget = desk ? 32 : 64;
    c.score.lmc_steps = desk ? 8 : 16;
    c.score.lmc_step = 0.01;
  } else if (method == "rsdmc") {
    c.score.depth = 2;
    c.score.budget = desk ? 4 : 16;
    c.score.lmc_steps = desk ? 6 : 10;
    c.score.lmc_step = 0.01;
    c.score.aux_steps = desk ? 3 : 4;
    c.score.polish_steps = desk ? 6 : 10;
  } else if (method == "zodmc") {
    c.score.budget = desk ? 32 : 1024;
    c.score.max_tries = 50'000'000;
    if (desk) {
      c.rds.init_scale = 0.8;  // thins the heavy start-up rejection tail
      c.rds.steps = 40;
      if (suite == "mueller") c.rds.total_time = 2.5;
    }
  } else if (method == "sndmc") {
    c.score.budget = 1024;
    if (suite == "mueller" && desk) c.rds.total_time = 2.5;
  } else {
    throw ConfigError("unknown benchmark method '" + method + "'");
  }
  return c;
}

std::vector<BenchmarkRow> run_benchmark(const std::string& suite,
                                        const std::string& scale,
                                        const std::vector<std::string>& methods,
                                        std::uint64_t seed, int workers,
                                        std::ostream& log) {
  std::vector<BenchmarkRow> rows;
  for (const std::string& method : methods) {
    BenchmarkRow row;
    row.method = method;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      RunConfig cfg = benchmark_config(suite, scale, method, seed, workers);
      Target target = build_target(cfg);
      row.target = target.name;
      if (!target.known_log_z)
        throw ConfigError("benchmark target must have a known log Z");
      const double z_true = std::exp(*target.known_log_z);
      OracleCounter counter;
      std::vector<double> z_ratios, mmds, w2s;
      const std::vector<double> sigmas = default_mmd_sigmas();
      for (int r = 0; r < cfg.rounds; ++r) {
        RoundResult rr = run_round(target, counter, cfg, r);
        z_ratios.push_back(rr.round_mean_z / z_true);
        if (target.has_sampler() && rr.samples.points.rows() > 0) {
          RngStream truth_rng(seed_for(cfg.seed, std::uint64_t(r), 0x74727574));
          Eigen::MatrixXd truth =
              target.sampler(truth_rng, int(rr.samples.points.rows()));
          mmds.push_back(mmd(rr.samples.points, truth, sigmas));
          w2s.push_back(w2_empirical(rr.samples.points, truth));
        }
      }
      WorkStats zs = work_stats(z_ratios);
      row.z_ratio_mean = zs.mean;
      row.z_ratio_std = zs.variance ? std::sqrt(*zs.variance) : 0.0;
      if (!mmds.empty()) {
        WorkStats ms = work_stats(mmds), ws = work_stats(w2s);
        row.mmd_mean = ms.mean;
        row.mmd_std = ms.variance ? std::sqrt(*ms.variance) : 0.0;
        row.w2_mean = ws.mean;
        row.w2_std = ws.variance ? std::sqrt(*ws.variance) : 0.0;
      }
      row.oracle_calls_per_sample =
          double(counter.grad_calls() + counter.value_calls()) /
          (double(cfg.rounds) * double(cfg.particles));
    } catch (const std::exception& e) {
      std::string msg = e.what();
      for (char& ch : msg)
        if (ch == ',' || ch == '\n') ch = ';';
      row.status = "error:" + msg;
    }
    row.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    log << "  " << method << ": " << row.status
        << (row.status == "ok"
                ? " z_ratio_mean=" + format_g6(row.z_ratio_mean)
                : "")
        << " (" << format_g6(row.seconds) << "s)\n";
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_benchmark_csv(const std::vector<BenchmarkRow>& rows,
                         std::ostream& out) {
  out << "method,target,z_ratio_mean,z_ratio_std,mmd_mean,mmd_std,w2_mean,"
         "w2_std,oracle_calls_per_sample,seconds,status\n";
  for (const auto& r : rows) {
    out << r.method << ',' << r.target << ',';
    if (r.status == "ok")
      out << format_g6(r.z_ratio_mean) << ',' << format_g6(r.z_ratio_std);
    else
      out << ',';
    out << ',';
    auto opt = [&](const std::optional<double>& v) {
      if (v) out << format_g6(*v);
    };
    opt(r.mmd_mean);
    out << ',';
    opt(r.mmd_std);
    out << ',';
    opt(r.w2_mean);
    out << ',';
    opt(r.w2_std);
    out << ',';
    if (r.status == "ok") out << format_g6(r.oracle_calls_per_sample);
    out << ',' << format_g6(r.seconds) << ',' << r.status << '\n';
  }
}

namespace {

bool print_check(std::ostream& out, const std::string& name, double measured,
                 double lo, double hi) {
  const bool ok = measured >= lo && measured <= hi;
  out << "  [" << (ok ? "PASS" : "FAIL") << "] " << name
      << ": measured=" << format_g6(measured) << " expected in ["
      << format_g6(lo) << ", " << format_g6(hi) << "]\n";
  return ok;
}

bool validate_mazonka(std::uint64_t seed, int workers, std::ostream& out) {
  JeConfig cfg;
  cfg.curve = JeCurve::kGaussianPull;
  cfg.pull_length = 1.0;
  cfg.pull_stiffness = 1.0;
  cfg.total_time = 4.0;
  cfg.n_steps = 4000;
  Target carrier = make_gaussian(1, Eigen::VectorXd::Zero(1), 1.0);
  OracleCounter counter;
  EstimateReport rep =
      estimate_je(carrier, counter, cfg, 100000, seed, workers);
  WorkStats ws = work_stats(rep.work_samples);
  const double bt = (1.0 / 4.0) * (1.0 - (1.0 - std::exp(-4.0)) / 4.0);
  bool ok = print_check(out, "mean(W)/B_T", ws.mean / bt, 0.95, 1.05);
  ok &= print_check(out, "var(W)/(2 B_T)", *ws.variance / (2.0 * bt), 0.93,
                    1.07);
  return ok;
}

bool validate_ou_action(std::ostream& out) {
  bool ok = true;
  {
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(2);
    Target std2 = make_gaussian_mixture(
        {1.0}, {mu}, {Eigen::MatrixXd::Identity(2, 2)});
    OuActionResult res = ou_action_and_bound(std2, 12.0, 121);
    out << "  standard normal: action=" << format_g6(res.action)
        << " bound=" << format_g6(res.bound) << "\n";
    ok &= print_check(out, "N(0,I) action", res.action, 0.0, 1e-6);
    ok &= res.action <= res.bound;
  }
  {
    Target gm = make_gm2d_benchmark();
    OuActionResult res = ou_action_and_bound(gm, 12.0, 121);
    out << "  gm2d: action=" << format_g6(res.action)
        << " bound=" << format_g6(res.bound)
        << (res.accuracy_warning ? " (accuracy warning)" : "") << "\n";
    ok &= print_check(out, "gm2d action <= d*beta+m^2", res.action,
                      -std::numeric_limits<double>::infinity(), res.bound);
  }
  {
    Target mog = make_mog1d(4.0);
    OuActionResult res = ou_action_and_bound(mog, 14.0, 141);
    out << "  mog1d(4): action=" << format_g6(res.action)
        << " bound=" << format_g6(res.bound) << "\n";
    ok &= print_check(out, "mog1d(4) action <= beta+m^2", res.action,
                      -std::numeric_limits<double>::infinity(), res.bound);
  }
  return ok;
}

bool validate_kernel_stats(std::uint64_t seed, std::ostream& out) {
  bool ok = true;
  // (a) constant-lambda coefficients against the closed form
  {
    const double c = 3.0, seg = 0.25;
    AnnealingSchedule s;
    s.r = 1.0;
    s.beta = c / 2.0;
    s.steps = 1;
    s.theta = {0.0, 1e-15};  // lambda is constant to machine precision
    s.total_time = seg / 1e-15;
    AlmcCoefficients got = almc_coefficients(s, 1);
    const double z = c * seg;
    const double decay = std::exp(-z);
    const double gw = (1.0 - std::exp(-z)) / c;
    const double ns = std::sqrt((1.0 - std::exp(-2.0 * z)) / c);
    const double err = std::max({std::abs(got.decay - decay),
                                 std::abs(got.grad_weight - gw),
                                 std::abs(got.noise - ns)});
    ok &= print_check(out, "almc constant-lambda coefficient error", err, 0.0,
                      1e-10);
  }
  // (b) general-path coefficients against brute-force Riemann reference
  {
    AnnealingSchedule s = AnnealingSchedule::uniform(1.0, 100.0, 200, 2.0);
    const int l = 3;
    AlmcCoefficients got = almc_coefficients(s, l);
    const double seg = s.segment_time(l);
    auto big = [&](double t) { return almc_lambda_integral(s, l, t); };
    const int n = 1 << 21;
    double i1 = 0.0, i2 = 0.0;
    const double h = seg / n;
    for (int i = 0; i < n; ++i) {
      const double t = (i + 0.5) * h;
      const double w = big(seg) - big(t);
      i1 += std::exp(-w);
      i2 += std::exp(-2.0 * w);
    }
    i1 *= h;
    i2 *= h;
    const double err = std::max(std::abs(got.grad_weight - i1),
                                std::abs(got.noise - std::sqrt(2.0 * i2)));
    ok &= print_check(out, "almc quadrature vs brute-force reference", err,
                      0.0, 1e-9);
  }
  // (c) reverse-step noise statistics
  {
    const double h = 0.1;
    const double rho = rds_noise_correlation(h);
    RngStream rng(seed_for(seed, 7, 7));
    const int n = 100000;
    ScoreFn zero = [](double, const Eigen::VectorXd& x) {
      return Eigen::VectorXd::Zero(x.size()).eval();
    };
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(1);
    double s1 = 0, s2 = 0, s11 = 0, s22 = 0, s12 = 0;
    const double noise_sd = std::sqrt(std::expm1(2.0 * h));
    for (int i = 0; i < n; ++i) {
      KernelStepOutput o = rds_step(zero, x0, 0.0, h, 5.0, rng);
      const double xi1 = o.x_next[0] / noise_sd;
      const double xi2 = (*o.path_noise)[0];
      s1 += xi1;
      s2 += xi2;
      s11 += xi1 * xi1;
      s22 += xi2 * xi2;
      s12 += xi1 * xi2;
    }
    const double m1 = s1 / n, m2 = s2 / n;
    const double v1 = s11 / n - m1 * m1, v2 = s22 / n - m2 * m2;
    const double corr = (s12 / n - m1 * m2) / std::sqrt(v1 * v2);
    const double corr_se = (1.0 - rho * rho) / std::sqrt(double(n));
    ok &= print_check(out, "rds noise corr (4 SE band)", corr,
                      rho - 4 * corr_se, rho + 4 * corr_se);
    const double var_se = std::expm1(2.0 * h) * std::sqrt(2.0 / n);
    ok &= print_check(out, "rds driving-noise variance (4 SE band)",
                      v1 * std::expm1(2.0 * h), std::expm1(2.0 * h) - 4 * var_se,
                      std::expm1(2.0 * h) + 4 * var_se);
  }
  // (d) rejection posterior exactness (one-sample KS at 1%)
  {
    Target g = make_gaussian(1, Eigen::VectorXd::Zero(1), 1.0);
    OracleCounter counter;
    RngStream rng(seed_for(seed, 9, 9));
    const double t = 0.7;
    Eigen::VectorXd x(1);
    x << 0.9;
    const int n = 20000;
    std::vector<double> draws(n);
    for (int i = 0; i < n; ++i)
      draws[i] = rejection_sample_posterior(g, counter, t, x, 0.0, rng,
                                            1000000,
                                            RejectionProposal::kGaussian)
                     .sample[0];
    std::sort(draws.begin(), draws.end());
    const double mean = std::exp(-t) * x[0];
    const double sd = std::sqrt(-std::expm1(-2.0 * t));
    double ks = 0.0;
    for (int i = 0; i < n; ++i) {
      const double f = normal_cdf((draws[i] - mean) / sd);
      ks = std::max(ks, std::abs(f - double(i + 1) / n));
      ks = std::max(ks, std::abs(f - double(i) / n));
    }
    ok &= print_check(out, "rejection posterior KS sqrt(n) statistic",
                      ks * std::sqrt(double(n)), 0.0, 1.62762);
  }
  return ok;
}

bool validate_action_growth(std::ostream& out) {
  bool ok = true;
  std::vector<double> actions;
  std::vector<double> w1s;
  for (double m : {2.0, 4.0, 6.0, 8.0}) {
    Curve1D curve = mog_tilt_curve(m);
    ActionReport rep = action_1d(curve, 0.9, 0.99, 31, false);
    actions.push_back(rep.action);
    MetricDerivEval w1 = w1_metric_derivative_1d(curve, 0.95);
    w1s.push_back(w1.value);
    out << "  m=" << m << ": action=" << format_g6(rep.action)
        << " w1_deriv(0.95)=" << format_g6(w1.value) << "\n";
  }
  for (std::size_t i = 0; i + 1 < actions.size(); ++i)
    ok &= print_check(out, "action strictly increasing",
                      actions[i + 1] - actions[i], 1e-12,
                      std::numeric_limits<double>::infinity());
  ok &= print_check(out, "action(6)/action(4)", actions[2] / actions[1],
                    std::exp(0.5), std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < w1s.size(); ++i)
    ok &= print_check(out, "w1 metric derivative at s=0.95 (m=" +
                               std::to_string(int(2 * (i + 1))) + ")",
                      w1s[i], 0.0, 10.0);
  return ok;
}

bool validate_median(std::uint64_t seed, std::ostream& out) {
  const int n_copies = n_for_confidence(0.05);
  out << "  n_for_confidence(0.05) = " << n_copies << "\n";
  RngStream rng(seed_for(seed, 11, 11));
  const double eps = 0.1;
  int successes = 0;
  const int trials = 2000;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> z(n_copies);
    for (int i = 0; i < n_copies; ++i)
      z[i] = rng.uniform() < 0.75 ? 1.0 : 3.0;  // one-sided failures
    successes += std::abs(median_trick(z) - 1.0) <= eps ? 1 : 0;
  }
  return print_check(out, "median-trick success rate",
                     double(successes) / trials, 0.95, 1.0);
}

bool validate_mueller_z(std::ostream& out) {
  Target mb = make_mueller_brown();
  const double log_z = log_z_by_quadrature_2d(mb);
  out << "  quadrature log Z = " << format_g6(log_z)
      << " stored = " << format_g6(*mb.known_log_z) << "\n";
  return print_check(out, "mueller-brown log Z (quadrature vs stored)",
                     log_z - *mb.known_log_z, -1e-4, 1e-4);
}

}  // namespace

const std::vector<std::string>& validate_check_names() {
  static const std::vector<std::string> names = {
      "mazonka", "ou-action", "kernel-stats", "action-growth", "median",
      "mueller-z"};
  return names;
}

bool run_validate(const std::string& check, std::uint64_t seed, int workers,
                  std::ostream& out) {
  out << "validate: " << check << "\n";
  if (check == "mazonka") return validate_mazonka(seed, workers, out);
  if (check == "ou-action") return validate_ou_action(out);
  if (check == "kernel-stats") return validate_kernel_stats(seed, out);
  if (check == "action-growth") return validate_action_growth(out);
  if (check == "median") return validate_median(seed, out);
  if (check == "mueller-z") return validate_mueller_z(out);
  throw ConfigError("unknown validate check '" + check + "'");
}

}  // namespace zest
