#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "zest/rng.hpp"

namespace zest {

// Batch of points with provenance.
struct SampleSet {
  Eigen::MatrixXd points;  // n x d
  std::string estimator;
  int round = 0;
  std::uint64_t seed = 0;
};

// Shared, thread-safe tally of oracle usage. `grad_calls` counts gradient
// evaluations, `value_calls` counts plain potential evaluations; the two are
// reported separately because zeroth-order methods never touch the gradient.
class OracleCounter {
 public:
  void add_grad(std::uint64_t n = 1) {
    grad_.fetch_add(n, std::memory_order_relaxed);
  }
  void add_value(std::uint64_t n = 1) {
    value_.fetch_add(n, std::memory_order_relaxed);
  }
  std::uint64_t grad_calls() const {
    return grad_.load(std::memory_order_relaxed);
  }
  std::uint64_t value_calls() const {
    return value_.load(std::memory_order_relaxed);
  }
  std::uint64_t calls() const { return grad_calls(); }

 private:
  std::atomic<std::uint64_t> grad_{0};
  std::atomic<std::uint64_t> value_{0};
};

struct GaussianMixture {
  std::vector<double> weights;
  std::vector<Eigen::VectorXd> means;
  std::vector<Eigen::MatrixXd> covs;

  // caches built by finalize()
  std::vector<Eigen::MatrixXd> precisions;
  std::vector<Eigen::MatrixXd> chols;
  std::vector<double> log_norms;  // log w_i - (d/2)log 2pi - (1/2)log det

  int dim() const { return means.empty() ? 0 : int(means[0].size()); }
  int components() const { return int(weights.size()); }
  void finalize();  // validates and fills the caches

  double log_density(const Eigen::VectorXd& x) const;
  Eigen::VectorXd score(const Eigen::VectorXd& x) const;  // grad log density
  Eigen::VectorXd sample(RngStream& rng) const;
  double second_moment() const;   // E ||x||^2
  double conservative_beta() const;
};

struct Target {
  int dim = 0;
  double beta = 0.0;  // Lipschitz constant of grad
  std::function<double(const Eigen::VectorXd&)> potential;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> grad;
  std::optional<double> known_log_z;
  std::optional<double> second_moment_m2;      // E_pi ||x||^2
  std::optional<double> potential_lower_bound; // <= inf V
  std::function<Eigen::MatrixXd(RngStream&, int)> sampler;  // may be empty
  std::shared_ptr<const GaussianMixture> mixture;           // set for mixtures
  std::string name;

  bool has_sampler() const { return static_cast<bool>(sampler); }
  SampleSet draw_exact(RngStream& rng, int n) const;
};

Target make_gaussian(int dim, const Eigen::VectorXd& mean, double cov_scale);
Target make_gaussian_mixture(const std::vector<double>& weights,
                             const std::vector<Eigen::VectorXd>& means,
                             const std::vector<Eigen::MatrixXd>& covs);
// 1/2 N(0,1) + 1/2 N(m,1); beta follows the m^2/2 convention for this family.
Target make_mog1d(double m);
Target make_mueller_brown();
// The 4-component 2-D mixture used by the gm2d benchmark suite.
Target make_gm2d_benchmark();

Eigen::VectorXd grad_counted(const Target& target, OracleCounter& counter,
                             const Eigen::VectorXd& x);
double value_counted(const Target& target, OracleCounter& counter,
                     const Eigen::VectorXd& x);

// Gradient descent to a stationary point, then translate so it sits at 0.
Target recentered(const Target& target, int steps = 400, double step = 0.0);

// Spectral norm of the finite-difference Hessian at x. Used to size LMC steps
// and the quadratic anchor when the global beta is a loose bound.
double local_smoothness(const Target& target, const Eigen::VectorXd& x,
                        double fd_step = 1e-4);

// High-resolution quadrature of log Z for the 2-D built-ins (verify-z mode).
double log_z_by_quadrature_2d(const Target& target, double pad = 20.0,
                              int grid = 1200);

}  // namespace zest
