#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

namespace zest {

// Biased V-statistic MMD (diagonal terms included) under the multiscale RBF
// kernel k(x,y) = (1/K) sum_i exp(-|x-y|^2 / (2 sigma_i^2)), square-rooted
// with negatives clamped at zero.
double mmd(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
           const std::vector<double>& sigmas);

// Bandwidths 2^{e/2} for e in {-4,-2,...,14}; the exponent reading of the
// published list, which keeps every sigma positive. Fully overridable.
std::vector<double> default_mmd_sigmas();

// Exact minimum of sum c[i][perm(i)] over permutations (dense square LAP,
// shortest-augmenting-path with dual potentials).
double assignment_cost(const Eigen::MatrixXd& cost);

// sqrt of the exact optimal transport cost between uniform empirical
// measures with squared-Euclidean ground cost. Square case by assignment,
// unequal sizes by successive-shortest-path min-cost flow.
double w2_empirical(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y);

struct RelativeErrorStats {
  double mean_ratio = 0.0;
  double std_ratio = 0.0;                  // unbiased sample std
  std::vector<double> coverage;            // P(|z/Z - 1| <= eps) per epsilon
};

RelativeErrorStats relative_error_stats(const std::vector<double>& z_hats,
                                        double z_true,
                                        const std::vector<double>& epsilons);

struct WorkStats {
  double mean = 0.0;
  std::optional<double> variance;  // absent with fewer than 2 samples
};

WorkStats work_stats(const std::vector<double>& works);

}  // namespace zest
