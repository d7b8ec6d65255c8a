#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "zest/curves.hpp"
#include "zest/errors.hpp"
#include "zest/harness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidationFailed = 1;
constexpr int kExitConfigError = 2;
constexpr int kExitRuntimeError = 3;

int cmd_estimate(const std::string& config_path, std::uint64_t seed_override,
                 bool has_seed, const std::string& out_override) {
  zest::ConfigFile file = zest::ConfigFile::parse_file(config_path);
  zest::RunConfig cfg = zest::resolve_run_config(file);
  if (has_seed) cfg.seed = seed_override;
  if (!out_override.empty()) cfg.out_path = out_override;
  nlohmann::json report = zest::run_estimate(cfg);
  if (cfg.out_path.empty()) {
    std::cout << report.dump(2) << "\n";
  } else {
    std::ofstream out(cfg.out_path);
    if (!out) throw zest::ConfigError("cannot write '" + cfg.out_path + "'");
    out << report.dump(2) << "\n";
    std::cerr << "report written to " << cfg.out_path << "\n";
  }
  return kExitOk;
}

int cmd_benchmark(const std::string& suite, const std::string& scale,
                  std::vector<std::string> methods, std::uint64_t seed,
                  int workers, const std::string& out_path) {
  if (methods.empty()) methods = zest::default_benchmark_methods(suite);
  std::cerr << "benchmark suite=" << suite << " scale=" << scale << "\n";
  auto rows =
      zest::run_benchmark(suite, scale, methods, seed, workers, std::cerr);
  if (out_path.empty()) {
    zest::write_benchmark_csv(rows, std::cout);
  } else {
    std::ofstream out(out_path);
    if (!out) throw zest::ConfigError("cannot write '" + out_path + "'");
    zest::write_benchmark_csv(rows, out);
    std::cerr << "csv written to " << out_path << "\n";
  }
  return kExitOk;
}

int cmd_action(double m, double r, double s_lo, double s_hi, int n_s,
               const std::string& out_path) {
  zest::Curve1D curve = zest::mog_tilt_curve(m, s_lo, s_hi);
  zest::ActionReport rep = zest::action_1d(curve, s_lo, s_hi, n_s, true);
  (void)r;  // the s-parameterization is schedule-free; r only maps s to theta
  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) throw zest::ConfigError("cannot write '" + out_path + "'");
    out = &file;
  }
  (*out) << "s,w2_deriv_sq,w1_deriv\n";
  char buf[128];
  for (std::size_t i = 0; i < rep.s.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.6g,%.6g,%.6g\n", rep.s[i],
                  rep.w2_deriv_sq[i], rep.w1_deriv[i]);
    (*out) << buf;
  }
  std::snprintf(buf, sizeof(buf), "action,%.6g,\n", rep.action);
  (*out) << buf;
  if (rep.accuracy_warning)
    std::cerr << "warning: quadrature self-check disagreed by more than 10%\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"zest: annealing-based normalizing-constant estimation"};
  app.require_subcommand(1);

  auto* est = app.add_subcommand("estimate", "run one estimator from a config");
  std::string config_path, out_path;
  std::uint64_t seed = 0;
  est->add_option("--config", config_path, "config file")->required();
  auto* seed_opt = est->add_option("--seed", seed, "override run.seed");
  est->add_option("--out", out_path, "output JSON path (default stdout)");

  auto* bench = app.add_subcommand("benchmark", "multi-method benchmark suite");
  std::string suite = "gm2d", scale = "desk", bench_out;
  std::vector<std::string> methods;
  std::uint64_t bench_seed = 1;
  int workers = 0;
  bench->add_option("--suite", suite, "gm2d|mueller")->required();
  bench->add_option("--scale", scale, "desk|paper");
  bench->add_option("--methods", methods,
                    "subset of ti,ais,rds-exact,rdmc,rsdmc,zodmc,sndmc")
      ->delimiter(',');
  bench->add_option("--seed", bench_seed, "base seed");
  bench->add_option("--workers", workers, "worker threads (0 = auto)");
  bench->add_option("--out", bench_out, "CSV path (default stdout)");

  auto* act = app.add_subcommand("action", "1-D curve diagnostics CSV");
  std::string act_target = "mog1d", act_out;
  double act_m = 4.0, act_r = 1.0, s_lo = 0.9, s_hi = 0.99;
  int n_s = 31;
  act->add_option("--target", act_target, "mog1d");
  act->add_option("--m", act_m, "mode separation")->required();
  act->add_option("--r", act_r, "schedule exponent (s-to-theta map only)");
  act->add_option("--s-lo", s_lo, "lower s");
  act->add_option("--s-hi", s_hi, "upper s");
  act->add_option("--n-s", n_s, "s grid points");
  act->add_option("--out", act_out, "CSV path (default stdout)");

  auto* val = app.add_subcommand("validate", "named acceptance checks");
  std::string check;
  std::uint64_t val_seed = 1;
  int val_workers = 0;
  val->add_option("--check", check, "mazonka|ou-action|kernel-stats|action-growth|median|mueller-z")
      ->required();
  val->add_option("--seed", val_seed, "base seed");
  val->add_option("--workers", val_workers, "worker threads (0 = auto)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (est->parsed())
      return cmd_estimate(config_path, seed, seed_opt->count() > 0, out_path);
    if (bench->parsed())
      return cmd_benchmark(suite, scale, methods, bench_seed, workers,
                           bench_out);
    if (act->parsed()) {
      if (act_target != "mog1d")
        throw zest::ConfigError("action: only the mog1d curve is registered");
      return cmd_action(act_m, act_r, s_lo, s_hi, n_s, act_out);
    }
    if (val->parsed()) {
      const bool ok = zest::run_validate(check, val_seed, val_workers, std::cout);
      std::cout << (ok ? "PASS" : "FAIL") << ": " << check << "\n";
      return ok ? kExitOk : kExitValidationFailed;
    }
  } catch (const zest::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const zest::InvalidParameter& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return kExitRuntimeError;
  }
  return kExitOk;
}
