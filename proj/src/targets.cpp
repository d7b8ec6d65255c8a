#include "zest/targets.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "zest/errors.hpp"
#include "zest/numeric.hpp"

namespace zest {

void GaussianMixture::finalize() {
  const std::size_t k = weights.size();
  if (k == 0 || means.size() != k || covs.size() != k)
    throw InvalidParameter("mixture: weights/means/covs size mismatch");
  double total = 0.0;
  for (double w : weights) {
    if (w <= 0.0) throw InvalidParameter("mixture: weights must be positive");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw InvalidParameter("mixture: weights must sum to 1");
  const int d = int(means[0].size());
  precisions.resize(k);
  chols.resize(k);
  log_norms.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    if (means[i].size() != d || covs[i].rows() != d || covs[i].cols() != d)
      throw InvalidParameter("mixture: inconsistent dimensions");
    if (!covs[i].isApprox(covs[i].transpose(), 1e-10))
      throw InvalidParameter("mixture: covariance not symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(covs[i]);
    if (llt.info() != Eigen::Success)
      throw InvalidParameter("mixture: covariance not positive-definite");
    chols[i] = llt.matrixL();
    precisions[i] = llt.solve(Eigen::MatrixXd::Identity(d, d));
    double log_det = 0.0;
    for (int j = 0; j < d; ++j) log_det += 2.0 * std::log(chols[i](j, j));
    log_norms[i] =
        std::log(weights[i]) - 0.5 * d * kLog2Pi - 0.5 * log_det;
  }
}

double GaussianMixture::log_density(const Eigen::VectorXd& x) const {
  std::vector<double> terms(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    Eigen::VectorXd dx = x - means[i];
    terms[i] = log_norms[i] - 0.5 * dx.dot(precisions[i] * dx);
  }
  return log_sum_exp(terms);
}

Eigen::VectorXd GaussianMixture::score(const Eigen::VectorXd& x) const {
  std::vector<double> logs(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    Eigen::VectorXd dx = x - means[i];
    logs[i] = log_norms[i] - 0.5 * dx.dot(precisions[i] * dx);
  }
  const double lse = log_sum_exp(logs);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double r = std::exp(logs[i] - lse);
    g.noalias() -= r * (precisions[i] * (x - means[i]));
  }
  return g;
}

Eigen::VectorXd GaussianMixture::sample(RngStream& rng) const {
  const int i = rng.categorical(weights);
  return means[i] + chols[i] * rng.normal_vector(dim());
}

double GaussianMixture::second_moment() const {
  double m2 = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i)
    m2 += weights[i] * (covs[i].trace() + means[i].squaredNorm());
  return m2;
}

double GaussianMixture::conservative_beta() const {
  double lam_max = 0.0;
  for (const auto& p : precisions) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p);
    lam_max = std::max(lam_max, es.eigenvalues().maxCoeff());
  }
  double sep = 0.0;
  for (std::size_t i = 0; i < means.size(); ++i)
    for (std::size_t j = i + 1; j < means.size(); ++j)
      sep = std::max(sep, (means[i] - means[j]).norm());
  return lam_max + sep * sep * lam_max * lam_max;
}

SampleSet Target::draw_exact(RngStream& rng, int n) const {
  if (!sampler) throw UnsupportedTargetError(name + ": no exact sampler");
  SampleSet set;
  set.points = sampler(rng, n);
  set.estimator = "exact";
  set.seed = rng.seed();
  return set;
}

namespace {

// Minimizer of V found by gradient descent from several start points; the
// returned value sits `margin` below the best observed V so the rejection
// envelope stays valid.
double descend_floor(const Target& t, const std::vector<Eigen::VectorXd>& starts,
                     int steps, double step, double margin) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : starts) {
    Eigen::VectorXd x = s;
    best = std::min(best, t.potential(x));
    for (int i = 0; i < steps; ++i) {
      x -= step * t.grad(x);
      if (!x.allFinite()) break;
      best = std::min(best, t.potential(x));
    }
  }
  return best - margin;
}

Target from_mixture(std::shared_ptr<GaussianMixture> mix, std::string name) {
  Target t;
  t.dim = mix->dim();
  t.name = std::move(name);
  t.mixture = mix;
  t.potential = [mix](const Eigen::VectorXd& x) { return -mix->log_density(x); };
  t.grad = [mix](const Eigen::VectorXd& x) {
    return (-mix->score(x)).eval();
  };
  t.known_log_z = 0.0;  // components are normalized
  t.second_moment_m2 = mix->second_moment();
  t.beta = mix->conservative_beta();
  t.sampler = [mix](RngStream& rng, int n) {
    Eigen::MatrixXd pts(n, mix->dim());
    for (int i = 0; i < n; ++i) pts.row(i) = mix->sample(rng);
    return pts;
  };
  std::vector<Eigen::VectorXd> starts = mix->means;
  t.potential_lower_bound = descend_floor(t, starts, 200, 0.02, 0.25);
  return t;
}

}  // namespace

Target make_gaussian(int dim, const Eigen::VectorXd& mean, double cov_scale) {
  if (dim < 1) throw InvalidParameter("make_gaussian: dim must be >= 1");
  if (!(cov_scale > 0.0))
    throw InvalidParameter("make_gaussian: cov_scale must be positive");
  if (mean.size() != dim)
    throw InvalidParameter("make_gaussian: mean has wrong dimension");
  Target t;
  t.dim = dim;
  t.name = "gaussian";
  t.beta = 1.0 / cov_scale;
  Eigen::VectorXd mu = mean;
  t.potential = [mu, cov_scale](const Eigen::VectorXd& x) {
    return (x - mu).squaredNorm() / (2.0 * cov_scale);
  };
  t.grad = [mu, cov_scale](const Eigen::VectorXd& x) {
    return ((x - mu) / cov_scale).eval();
  };
  t.known_log_z = 0.5 * dim * std::log(2.0 * M_PI * cov_scale);
  t.second_moment_m2 = dim * cov_scale + mu.squaredNorm();
  t.potential_lower_bound = 0.0;
  // normalized view of the same law; scores are normalization-free
  auto mix = std::make_shared<GaussianMixture>();
  mix->weights = {1.0};
  mix->means = {mu};
  mix->covs = {cov_scale * Eigen::MatrixXd::Identity(dim, dim)};
  mix->finalize();
  t.mixture = mix;
  const double sd = std::sqrt(cov_scale);
  t.sampler = [mu, sd, dim](RngStream& rng, int n) {
    Eigen::MatrixXd pts(n, dim);
    for (int i = 0; i < n; ++i)
      pts.row(i) = mu + sd * rng.normal_vector(dim);
    return pts;
  };
  return t;
}

Target make_gaussian_mixture(const std::vector<double>& weights,
                             const std::vector<Eigen::VectorXd>& means,
                             const std::vector<Eigen::MatrixXd>& covs) {
  auto mix = std::make_shared<GaussianMixture>();
  mix->weights = weights;
  mix->means = means;
  mix->covs = covs;
  mix->finalize();
  return from_mixture(std::move(mix), "gaussian_mixture");
}

Target make_mog1d(double m) {
  Eigen::VectorXd m0(1), m1(1);
  m0 << 0.0;
  m1 << m;
  Eigen::MatrixXd unit = Eigen::MatrixXd::Identity(1, 1);
  Target t = make_gaussian_mixture({0.5, 0.5}, {m0, m1}, {unit, unit});
  t.name = "mog1d";
  t.beta = 0.5 * m * m;  // smoothness convention for this two-mode family
  return t;
}

Target make_gm2d_benchmark() {
  auto vec = [](double a, double b) {
    Eigen::VectorXd v(2);
    v << a, b;
    return v;
  };
  auto cov = [](double a, double b, double c) {
    Eigen::MatrixXd m(2, 2);
    m << a, b, b, c;
    return m;
  };
  Target t = make_gaussian_mixture(
      {0.1, 0.2, 0.3, 0.4},
      {vec(0, 0), vec(0, 11), vec(9, 9), vec(11, 0)},
      {cov(1, 0.5, 1), cov(0.3, -0.2, 0.3), cov(1, 0.3, 1), cov(1.2, -1, 1.2)});
  t.name = "gmm2d_paper";
  return t;
}

namespace mueller {

constexpr double kA[4] = {-200.0, -100.0, -170.0, 15.0};
constexpr double ka[4] = {-1.0, -1.0, -6.5, 0.7};
constexpr double kb[4] = {0.0, 0.0, 11.0, 0.6};
constexpr double kc[4] = {-10.0, -10.0, -6.5, 0.7};
constexpr double kX[4] = {1.0, 0.0, -0.5, -1.0};
constexpr double kY[4] = {0.0, 0.5, 1.5, 1.0};
constexpr double kZ = 22340.9983;

inline void rescale(double x1, double x2, double& u, double& v) {
  u = 0.2 * (x1 - 3.5);
  v = 0.2 * (x2 + 6.5);
}

double potential(const Eigen::VectorXd& x) {
  double u, v;
  rescale(x[0], x[1], u, v);
  double vq = 35.0136 * (u + 0.033923) * (u + 0.033923) +
              59.8399 * (v - 0.465694) * (v - 0.465694);
  double vm = 0.0;
  for (int i = 0; i < 4; ++i) {
    const double du = u - kX[i], dv = v - kY[i];
    // cap the exponent: beyond it the density is flush zero anyway, and an
    // overflow to inf would poison downstream weight arithmetic
    const double q =
        std::min(700.0, ka[i] * du * du + kb[i] * du * dv + kc[i] * dv * dv);
    vm += kA[i] * std::exp(q);
  }
  return 0.1 * (vq + vm);
}

Eigen::VectorXd gradient(const Eigen::VectorXd& x) {
  double u, v;
  rescale(x[0], x[1], u, v);
  double gu = 2.0 * 35.0136 * (u + 0.033923);
  double gv = 2.0 * 59.8399 * (v - 0.465694);
  for (int i = 0; i < 4; ++i) {
    const double du = u - kX[i], dv = v - kY[i];
    const double q =
        std::min(700.0, ka[i] * du * du + kb[i] * du * dv + kc[i] * dv * dv);
    const double e = kA[i] * std::exp(q);
    gu += e * (2.0 * ka[i] * du + kb[i] * dv);
    gv += e * (kb[i] * du + 2.0 * kc[i] * dv);
  }
  Eigen::VectorXd g(2);
  // chain rule through the 0.2 rescaling
  g << 0.1 * 0.2 * gu, 0.1 * 0.2 * gv;
  return g;
}

struct Moments {
  double beta;
  double m2;
  double v_floor;
};

Moments compute_moments(const Target& t) {
  Moments m{};
  // Hessian spectral norm sampled over the core box (finite differences).
  double beta = 0.0;
  for (int i = 0; i <= 24; ++i) {
    for (int j = 0; j <= 24; ++j) {
      Eigen::VectorXd x(2);
      x << -6.0 + i * (16.0 - (-6.0)) / 24.0,
          -14.0 + j * (5.0 - (-14.0)) / 24.0;
      beta = std::max(beta, local_smoothness(t, x));
    }
  }
  m.beta = 1.25 * beta;
  // E ||x||^2 by quadrature over a box that captures all the mass.
  const double ax = -17.0, bx = 23.0, ay = -27.0, by = 13.0;
  auto dens = [&](double x1, double x2) {
    Eigen::VectorXd x(2);
    x << x1, x2;
    return std::exp(-t.potential(x));
  };
  const int n = 500;
  double z = trapezoid_2d(dens, ax, bx, ay, by, n);
  double s = trapezoid_2d(
      [&](double x1, double x2) { return (x1 * x1 + x2 * x2) * dens(x1, x2); },
      ax, bx, ay, by, n);
  m.m2 = s / z;
  std::vector<Eigen::VectorXd> starts;
  for (int i = 0; i < 4; ++i) {
    Eigen::VectorXd x(2);
    x << 5.0 * kX[i] + 3.5, 5.0 * kY[i] - 6.5;
    starts.push_back(x);
  }
  Eigen::VectorXd quad_center(2);
  quad_center << 3.5 - 5.0 * 0.033923, -6.5 + 5.0 * 0.465694;
  starts.push_back(quad_center);
  m.v_floor = descend_floor(t, starts, 400, 0.02, 0.25);
  return m;
}

}  // namespace mueller

Target make_mueller_brown() {
  Target t;
  t.dim = 2;
  t.name = "mueller_brown";
  t.potential = mueller::potential;
  t.grad = mueller::gradient;
  t.known_log_z = std::log(mueller::kZ);
  static const mueller::Moments moments = [] {
    Target probe;
    probe.dim = 2;
    probe.potential = mueller::potential;
    probe.grad = mueller::gradient;
    return mueller::compute_moments(probe);
  }();
  t.beta = moments.beta;
  t.second_moment_m2 = moments.m2;
  t.potential_lower_bound = moments.v_floor;
  return t;
}

Eigen::VectorXd grad_counted(const Target& target, OracleCounter& counter,
                             const Eigen::VectorXd& x) {
  if (!x.allFinite()) throw DomainError("grad_counted: non-finite point");
  counter.add_grad();
  return target.grad(x);
}

double value_counted(const Target& target, OracleCounter& counter,
                     const Eigen::VectorXd& x) {
  if (!x.allFinite()) throw DomainError("value_counted: non-finite point");
  counter.add_value();
  return target.potential(x);
}

Target recentered(const Target& target, int steps, double step) {
  if (step <= 0.0) step = 0.5 / std::max(target.beta, 1.0);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(target.dim);
  for (int i = 0; i < steps; ++i) {
    Eigen::VectorXd g = target.grad(x);
    x -= step * g;
    if (!x.allFinite()) throw DivergenceError("recenter: descent diverged");
  }
  Target shifted = target;
  const Eigen::VectorXd center = x;
  auto pot = target.potential;
  auto grd = target.grad;
  shifted.potential = [pot, center](const Eigen::VectorXd& y) {
    return pot(y + center);
  };
  shifted.grad = [grd, center](const Eigen::VectorXd& y) {
    return grd(y + center);
  };
  if (target.sampler) {
    auto base = target.sampler;
    shifted.sampler = [base, center](RngStream& rng, int n) {
      Eigen::MatrixXd pts = base(rng, n);
      pts.rowwise() -= center.transpose();
      return pts;
    };
  }
  shifted.mixture.reset();  // mixture caches no longer describe the density
  if (target.second_moment_m2) shifted.second_moment_m2.reset();
  return shifted;
}

double local_smoothness(const Target& target, const Eigen::VectorXd& x,
                        double fd_step) {
  const int d = target.dim;
  Eigen::MatrixXd h(d, d);
  for (int j = 0; j < d; ++j) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(d);
    e[j] = fd_step;
    h.col(j) = (target.grad(x + e) - target.grad(x - e)) / (2.0 * fd_step);
  }
  h = 0.5 * (h + h.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double log_z_by_quadrature_2d(const Target& target, double pad, int grid) {
  if (target.dim != 2)
    throw UnsupportedTargetError("quadrature check only covers 2-D targets");
  // Center the box on rough mass location found by descent from the origin.
  Eigen::VectorXd c = Eigen::VectorXd::Zero(2);
  for (int i = 0; i < 200; ++i) c -= 0.02 * target.grad(c);
  double z = trapezoid_2d(
      [&](double x1, double x2) {
        Eigen::VectorXd x(2);
        x << x1, x2;
        return std::exp(-target.potential(x));
      },
      c[0] - pad, c[0] + pad, c[1] - pad, c[1] + pad, grid);
  return std::log(z);
}

}  // namespace zest
