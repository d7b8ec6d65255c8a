#include "zest/curves.hpp"

#include <cmath>

#include "zest/errors.hpp"
#include "zest/numeric.hpp"

namespace zest {

AnnealingSchedule AnnealingSchedule::uniform(double r, double lambda0,
                                             int steps, double total_time) {
  if (r < 1.0) throw InvalidParameter("schedule: r must be >= 1");
  if (lambda0 < 0.0) throw InvalidParameter("schedule: lambda0 must be >= 0");
  if (steps < 1) throw InvalidParameter("schedule: steps must be >= 1");
  if (total_time <= 0.0)
    throw InvalidParameter("schedule: total_time must be positive");
  AnnealingSchedule s;
  s.r = r;
  s.beta = 0.5 * lambda0;
  s.steps = steps;
  s.total_time = total_time;
  s.theta.resize(steps + 1);
  for (int l = 0; l <= steps; ++l)
    s.theta[l] = static_cast<double>(l) / steps;
  s.theta.back() = 1.0;
  return s;
}

double lambda_at(const AnnealingSchedule& schedule, double theta) {
  if (theta < 0.0 || theta > 1.0)
    throw DomainError("lambda_at: theta outside [0, 1]");
  return 2.0 * schedule.beta * std::pow(1.0 - theta, schedule.r);
}

Eigen::VectorXd annealed_grad(const Target& target, OracleCounter& counter,
                              double lam, const Eigen::VectorXd& x) {
  if (lam < 0.0) throw InvalidParameter("annealed_grad: lambda must be >= 0");
  Eigen::VectorXd g = grad_counted(target, counter, x);
  g.noalias() += lam * x;
  return g;
}

bool Curve1D::validate(double tol) const {
  const int n = std::min(x_points, 4001);
  const double h = (x_hi - x_lo) / (n - 1);
  for (double s : {s_lo, 0.5 * (s_lo + s_hi), s_hi}) {
    double prev = cdf(s, x_lo);
    if (prev < -tol) return false;
    for (int i = 1; i < n; ++i) {
      const double x = x_lo + i * h;
      if (density(s, x) < -tol) return false;
      const double f = cdf(s, x);
      if (f < prev - tol) return false;
      prev = f;
    }
    if (std::abs(cdf(s, x_lo)) > tol || std::abs(cdf(s, x_hi) - 1.0) > tol)
      return false;
  }
  return true;
}

Curve1D mog_tilt_curve(double m, double s_lo, double s_hi) {
  Curve1D c;
  c.s_lo = s_lo;
  c.s_hi = s_hi;
  c.x_lo = std::min(0.0, m) - 12.0;
  c.x_hi = std::max(0.0, m) + 12.0;
  c.x_points = 20001;
  auto w = [m](double s) {
    return 1.0 / (1.0 + std::exp(-(1.0 - s) * m * m / 2.0));
  };
  c.density = [m, w](double s, double x) {
    const double rs = std::sqrt(s);
    const double ws = w(s);
    return ws * normal_pdf(x / rs) / rs +
           (1.0 - ws) * normal_pdf((x - s * m) / rs) / rs;
  };
  c.cdf = [m, w](double s, double x) {
    const double rs = std::sqrt(s);
    const double ws = w(s);
    return ws * normal_cdf(x / rs) + (1.0 - ws) * normal_cdf((x - s * m) / rs);
  };
  return c;
}

double theta_to_s(double m, double r, double theta) {
  return 1.0 / (1.0 + m * m * std::pow(1.0 - theta, r));
}

double s_to_theta(double m, double r, double s) {
  return 1.0 - std::pow((1.0 / s - 1.0) / (m * m), 1.0 / r);
}

double ds_dtheta(double m, double r, double theta) {
  const double u = 1.0 - theta;
  const double denom = 1.0 + m * m * std::pow(u, r);
  return m * m * r * std::pow(u, r - 1.0) / (denom * denom);
}

namespace {

constexpr double kDensityFloor = 1e-300;

// Both derivative functionals share the same quadrature machinery; eval on
// the full grid and on every other point, flag when the two disagree.
template <typename Integrand>
MetricDerivEval grid_quadrature(const Curve1D& curve, double s,
                                Integrand integrand) {
  const double hs = 1e-4 * (curve.s_hi - curve.s_lo);
  const int n = curve.x_points | 1;  // odd so the coarse grid shares endpoints
  const double dx = (curve.x_hi - curve.x_lo) / (n - 1);
  double fine = 0.0, coarse = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = curve.x_lo + i * dx;
    const double f = curve.density(s, x);
    if (f < kDensityFloor) continue;  // window clipping
    const double dF =
        (curve.cdf(s + hs, x) - curve.cdf(s - hs, x)) / (2.0 * hs);
    const double g = integrand(dF, f);
    const double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
    fine += w * g;
    if (i % 2 == 0) {
      const double wc = (i == 0 || i == n - 1) ? 0.5 : 1.0;
      coarse += wc * g;
    }
  }
  fine *= dx;
  coarse *= 2.0 * dx;
  MetricDerivEval out;
  out.value = fine;
  const double scale = std::max(std::abs(fine), 1e-12);
  out.accuracy_warning = std::abs(fine - coarse) > 0.10 * scale;
  return out;
}

}  // namespace

MetricDerivEval metric_derivative_sq_1d(const Curve1D& curve, double s) {
  return grid_quadrature(curve, s,
                         [](double dF, double f) { return dF * dF / f; });
}

MetricDerivEval w1_metric_derivative_1d(const Curve1D& curve, double s) {
  return grid_quadrature(curve, s,
                         [](double dF, double) { return std::abs(dF); });
}

ActionReport action_1d(const Curve1D& curve, double s_lo, double s_hi, int n_s,
                       bool with_w1) {
  if (!(s_lo < s_hi)) throw InvalidParameter("action_1d: need s_lo < s_hi");
  if (n_s < 2) throw InvalidParameter("action_1d: need at least 2 s points");
  ActionReport report;
  report.s.resize(n_s);
  report.w2_deriv_sq.resize(n_s);
  if (with_w1) report.w1_deriv.resize(n_s);
  const double ds = (s_hi - s_lo) / (n_s - 1);
  for (int i = 0; i < n_s; ++i) {
    const double s = s_lo + i * ds;
    report.s[i] = s;
    MetricDerivEval ev = metric_derivative_sq_1d(curve, s);
    report.w2_deriv_sq[i] = ev.value;
    report.accuracy_warning |= ev.accuracy_warning;
    if (with_w1) {
      MetricDerivEval w1 = w1_metric_derivative_1d(curve, s);
      report.w1_deriv[i] = w1.value;
      report.accuracy_warning |= w1.accuracy_warning;
    }
  }
  double action = 0.0;
  for (int i = 0; i + 1 < n_s; ++i)
    action += 0.5 * (report.w2_deriv_sq[i] + report.w2_deriv_sq[i + 1]) * ds;
  report.action = action;
  return report;
}

GaussianMixture ou_marginal_mog(const GaussianMixture& mix, double t) {
  if (t < 0.0) throw InvalidParameter("ou_marginal_mog: t must be >= 0");
  GaussianMixture out;
  out.weights = mix.weights;
  const double et = std::exp(-t), e2t = std::exp(-2.0 * t);
  const int d = mix.dim();
  for (std::size_t i = 0; i < mix.means.size(); ++i) {
    out.means.push_back(et * mix.means[i]);
    out.covs.push_back(e2t * mix.covs[i] +
                       (1.0 - e2t) * Eigen::MatrixXd::Identity(d, d));
  }
  out.finalize();
  return out;
}

GaussianMixture ou_marginal_mog(const Target& target, double t) {
  if (!target.mixture)
    throw UnsupportedTargetError("ou_marginal_mog: target is not a mixture");
  return ou_marginal_mog(*target.mixture, t);
}

namespace {

// Flat per-component parameters so the quadrature loop stays allocation-free.
struct MixComp2 {
  double mx, my;        // mean
  double pxx, pxy, pyy; // precision entries
  double norm;          // weight / (2 pi sqrt(det))
};

// Fisher divergence of the time-t mixture from N(0, I) by tensor quadrature.
double fisher_to_standard_normal(const GaussianMixture& mix, int grid,
                                 double pad) {
  const int d = mix.dim();
  double lo[2] = {0, 0}, hi[2] = {0, 0};
  for (int k = 0; k < d; ++k) {
    lo[k] = mix.means[0][k];
    hi[k] = mix.means[0][k];
    for (const auto& mu : mix.means) {
      lo[k] = std::min(lo[k], mu[k]);
      hi[k] = std::max(hi[k], mu[k]);
    }
    lo[k] -= pad;
    hi[k] += pad;
  }
  const std::size_t nc = mix.weights.size();
  if (d == 1) {
    std::vector<double> mu(nc), prec(nc), norm(nc);
    for (std::size_t c = 0; c < nc; ++c) {
      mu[c] = mix.means[c][0];
      prec[c] = mix.precisions[c](0, 0);
      norm[c] = std::exp(mix.log_norms[c]);
    }
    return trapezoid(
        [&](double x) {
          double p = 0.0, gsum = 0.0;
          for (std::size_t c = 0; c < nc; ++c) {
            const double dx = x - mu[c];
            const double dens = norm[c] * std::exp(-0.5 * prec[c] * dx * dx);
            p += dens;
            gsum -= dens * prec[c] * dx;
          }
          if (p < 1e-280) return 0.0;
          const double s = gsum / p + x;
          return p * s * s;
        },
        lo[0], hi[0], grid);
  }
  std::vector<MixComp2> comp(nc);
  for (std::size_t c = 0; c < nc; ++c) {
    comp[c].mx = mix.means[c][0];
    comp[c].my = mix.means[c][1];
    comp[c].pxx = mix.precisions[c](0, 0);
    comp[c].pxy = mix.precisions[c](0, 1);
    comp[c].pyy = mix.precisions[c](1, 1);
    comp[c].norm = std::exp(mix.log_norms[c]);
  }
  return trapezoid_2d(
      [&](double x, double y) {
        double p = 0.0, gx = 0.0, gy = 0.0;
        for (const MixComp2& c : comp) {
          const double dx = x - c.mx, dy = y - c.my;
          const double q =
              c.pxx * dx * dx + 2.0 * c.pxy * dx * dy + c.pyy * dy * dy;
          if (q > 1200.0) continue;
          const double dens = c.norm * std::exp(-0.5 * q);
          p += dens;
          gx -= dens * (c.pxx * dx + c.pxy * dy);
          gy -= dens * (c.pxy * dx + c.pyy * dy);
        }
        if (p < 1e-280) return 0.0;
        const double sx = gx / p + x, sy = gy / p + y;
        return p * (sx * sx + sy * sy);
      },
      lo[0], hi[0], lo[1], hi[1], grid);
}

}  // namespace

OuActionResult ou_action_and_bound(const Target& mog_target, double t_max,
                                   int n_t) {
  if (!mog_target.mixture)
    throw UnsupportedTargetError("ou_action_and_bound: target is not a mixture");
  if (mog_target.dim > 2)
    throw UnsupportedTargetError("ou_action_and_bound: only 1-D/2-D supported");
  const GaussianMixture& base = *mog_target.mixture;
  const int grid = mog_target.dim == 1 ? 20001 : 241;

  OuActionResult out;
  std::vector<double> f(n_t);
  const double dt = t_max / (n_t - 1);
  for (int i = 0; i < n_t; ++i) {
    GaussianMixture mt = ou_marginal_mog(base, i * dt);
    f[i] = fisher_to_standard_normal(mt, grid, 10.0);
  }
  double action = 0.0;
  for (int i = 0; i + 1 < n_t; ++i) action += 0.5 * (f[i] + f[i + 1]) * dt;
  out.action = action;
  const double m2 = mog_target.second_moment_m2.value_or(base.second_moment());
  out.bound = mog_target.dim * mog_target.beta + m2;
  out.accuracy_warning = f.back() >= 1e-6;
  return out;
}

}  // namespace zest
