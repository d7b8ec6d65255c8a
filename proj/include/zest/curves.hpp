#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

#include "zest/targets.hpp"

namespace zest {

// Geometric annealing schedule lambda(theta) = 2 beta (1-theta)^r on a grid
// of time points theta_0 = 0 < ... < theta_M = 1 with total duration T.
struct AnnealingSchedule {
  double r = 1.0;
  double beta = 1.0;  // lambda(0) = 2 beta
  int steps = 1;      // M
  std::vector<double> theta;
  double total_time = 0.0;

  static AnnealingSchedule uniform(double r, double lambda0, int steps,
                                   double total_time);
  double lambda0() const { return 2.0 * beta; }
  double segment_time(int l) const {  // T_l, 1 <= l <= M
    return total_time * (theta[l] - theta[l - 1]);
  }
};

double lambda_at(const AnnealingSchedule& schedule, double theta);

// grad of the annealed potential V + lam |x|^2 / 2; exactly one oracle call.
Eigen::VectorXd annealed_grad(const Target& target, OracleCounter& counter,
                              double lam, const Eigen::VectorXd& x);

// One-parameter family of 1-D distributions given by density and cdf maps.
struct Curve1D {
  std::function<double(double s, double x)> density;
  std::function<double(double s, double x)> cdf;
  double s_lo = 0.0;
  double s_hi = 1.0;
  double x_lo = -10.0;
  double x_hi = 10.0;
  int x_points = 20001;

  // grid check of f >= 0 and F monotone with limits 0 and 1
  bool validate(double tol = 1e-6) const;
};

// The tilted two-mode family pi(x) exp(-(1/s - 1) x^2 / 2) for
// pi = (1/2)N(0,1) + (1/2)N(m,1), in its s-parameterization s = 1/(lambda+1).
Curve1D mog_tilt_curve(double m, double s_lo = 0.9, double s_hi = 0.99);

// Mapping between theta and s for the schedule lambda(theta) = m^2 (1-theta)^r.
double theta_to_s(double m, double r, double theta);
double s_to_theta(double m, double r, double s);
double ds_dtheta(double m, double r, double theta);

struct MetricDerivEval {
  double value = 0.0;
  bool accuracy_warning = false;
};

// |curve'|_s^2 = int (d_s F_s)^2 / f_s dx, with d_s by central differences.
MetricDerivEval metric_derivative_sq_1d(const Curve1D& curve, double s);
// int |d_s F_s| dx, the W1 speed.
MetricDerivEval w1_metric_derivative_1d(const Curve1D& curve, double s);

struct ActionReport {
  std::vector<double> s;
  std::vector<double> w2_deriv_sq;
  std::vector<double> w1_deriv;  // filled when with_w1
  double action = 0.0;
  bool accuracy_warning = false;
};

ActionReport action_1d(const Curve1D& curve, double s_lo, double s_hi, int n_s,
                       bool with_w1 = false);

// Law of e^{-t} Y_0 + sqrt(1-e^{-2t}) xi for Y_0 from the mixture.
GaussianMixture ou_marginal_mog(const GaussianMixture& mix, double t);
// As above but starting from any mixture target.
GaussianMixture ou_marginal_mog(const Target& target, double t);

struct OuActionResult {
  double action = 0.0;
  double bound = 0.0;  // d beta + m^2
  bool accuracy_warning = false;
};

// Numeric action of the noising path: integral over t of the Fisher
// divergence of the time-t mixture from N(0, I), by quadrature with exact
// mixture scores. Supports 1-D and 2-D mixtures.
OuActionResult ou_action_and_bound(const Target& mog_target, double t_max = 12.0,
                                   int n_t = 121);

}  // namespace zest
