#include <doctest.h>

#include <cmath>

#include "zest/curves.hpp"
#include "zest/errors.hpp"
#include "zest/numeric.hpp"
#include "zest/targets.hpp"

using namespace zest;

namespace {

Curve1D location_family() {
  Curve1D c;
  c.s_lo = 0.0;
  c.s_hi = 1.0;
  c.x_lo = -12.0;
  c.x_hi = 13.0;
  c.density = [](double s, double x) { return normal_pdf(x - s); };
  c.cdf = [](double s, double x) { return normal_cdf(x - s); };
  return c;
}

Curve1D scale_family() {
  Curve1D c;
  c.s_lo = 0.5;
  c.s_hi = 2.0;
  c.x_lo = -25.0;
  c.x_hi = 25.0;
  c.x_points = 40001;
  c.density = [](double s, double x) { return normal_pdf(x / s) / s; };
  c.cdf = [](double s, double x) { return normal_cdf(x / s); };
  return c;
}

// inverse-CDF route for the squared metric derivative: quantile derivatives
// squared, integrated over (0,1); an independent discretization of the same
// quantity
double metric_deriv_sq_by_quantiles(const Curve1D& curve, double s, int n_y) {
  const double hs = 1e-4 * (curve.s_hi - curve.s_lo);
  auto quantile = [&](double sv, double y) {
    double lo = curve.x_lo, hi = curve.x_hi;
    for (int i = 0; i < 80; ++i) {
      const double mid = 0.5 * (lo + hi);
      (curve.cdf(sv, mid) < y ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };
  double acc = 0.0;
  const double y0 = 5e-4, y1 = 1.0 - 5e-4;
  const double dy = (y1 - y0) / (n_y - 1);
  for (int i = 0; i < n_y; ++i) {
    const double y = y0 + i * dy;
    const double d = (quantile(s + hs, y) - quantile(s - hs, y)) / (2.0 * hs);
    acc += (i == 0 || i == n_y - 1 ? 0.5 : 1.0) * d * d;
  }
  return acc * dy;
}

}  // namespace

TEST_CASE("annealing schedule endpoints and monotonicity") {
  AnnealingSchedule s = AnnealingSchedule::uniform(1.0, 2.0, 10, 1.0);
  CHECK(lambda_at(s, 0.0) == doctest::Approx(2.0));
  CHECK(lambda_at(s, 1.0) == doctest::Approx(0.0));
  AnnealingSchedule s2 = AnnealingSchedule::uniform(2.0, 100.0, 10, 1.0);
  CHECK(lambda_at(s2, 0.5) == doctest::Approx(25.0));
  double prev = lambda_at(s2, 0.0);
  for (int i = 1; i <= 100; ++i) {
    const double cur = lambda_at(s2, i / 100.0);
    CHECK(cur <= prev + 1e-15);
    prev = cur;
  }
  CHECK_THROWS_AS(lambda_at(s, -0.1), DomainError);
  CHECK_THROWS_AS(lambda_at(s, 1.1), DomainError);
  CHECK_THROWS_AS(AnnealingSchedule::uniform(0.5, 2.0, 10, 1.0),
                  InvalidParameter);
}

TEST_CASE("annealed gradient adds the quadratic pull") {
  Target g = make_gaussian(1, Eigen::VectorXd::Zero(1), 1.0);
  OracleCounter counter;
  Eigen::VectorXd x(1);
  x << 2.0;
  CHECK(annealed_grad(g, counter, 0.0, x)[0] == doctest::Approx(2.0));
  CHECK(annealed_grad(g, counter, 3.0, x)[0] == doctest::Approx(8.0));
  CHECK(counter.calls() == 2);

  Target mb = make_mueller_brown();
  OracleCounter c2;
  Eigen::VectorXd pt(2);
  pt << 3.5, -6.5;
  Eigen::VectorXd expect = mb.grad(pt) + pt;
  CHECK((annealed_grad(mb, c2, 1.0, pt) - expect).norm() < 1e-12);
  CHECK(c2.calls() == 1);
}

TEST_CASE("ou marginal of a mixture") {
  Target mog = make_mog1d(4.0);
  SUBCASE("identity at t = 0") {
    GaussianMixture m0 = ou_marginal_mog(mog, 0.0);
    CHECK(m0.means[1][0] == doctest::Approx(4.0));
    CHECK(m0.covs[0](0, 0) == doctest::Approx(1.0));
  }
  SUBCASE("half-life point") {
    GaussianMixture mt = ou_marginal_mog(mog, std::log(2.0));
    CHECK(mt.means[0][0] == doctest::Approx(0.0));
    CHECK(mt.means[1][0] == doctest::Approx(2.0));
    CHECK(mt.covs[0](0, 0) == doctest::Approx(1.0));
    CHECK(mt.covs[1](0, 0) == doctest::Approx(1.0));
  }
  SUBCASE("stationary limit") {
    GaussianMixture mt = ou_marginal_mog(mog, 40.0);
    CHECK(std::abs(mt.means[1][0]) < 1e-15);
    CHECK(mt.covs[1](0, 0) == doctest::Approx(1.0));
  }
  SUBCASE("pushforward samples match the closed form") {
    Target gm = make_gm2d_benchmark();
    const double t = 0.7;
    GaussianMixture mt = ou_marginal_mog(gm, t);
    RngStream rng(17);
    const int n = 100000;
    Eigen::MatrixXd y0 = gm.sampler(rng, n);
    const double decay = std::exp(-t);
    const double sd = std::sqrt(-std::expm1(-2.0 * t));
    Eigen::MatrixXd yt(n, 2);
    for (int i = 0; i < n; ++i)
      yt.row(i) = decay * y0.row(i) + (sd * rng.normal_vector(2)).transpose();
    Eigen::VectorXd mean_true = Eigen::VectorXd::Zero(2);
    for (int c = 0; c < mt.components(); ++c)
      mean_true += mt.weights[c] * mt.means[c];
    Eigen::VectorXd mean = yt.colwise().mean();
    const double se = std::sqrt(mt.second_moment() / n);
    CHECK((mean - mean_true).norm() < 4 * se);
    const double m2_true = mt.second_moment();
    const double m2 = yt.rowwise().squaredNorm().mean();
    CHECK(std::abs(m2 - m2_true) < 4 * m2_true * std::sqrt(2.0 / n));
  }
  SUBCASE("non-mixture target is rejected") {
    Target mb = make_mueller_brown();
    CHECK_THROWS_AS(ou_marginal_mog(mb, 1.0), UnsupportedTargetError);
  }
}

TEST_CASE("metric derivative of translation and scale families") {
  Curve1D loc = location_family();
  CHECK(loc.validate());
  for (double s : {0.1, 0.5, 0.9}) {
    MetricDerivEval ev = metric_derivative_sq_1d(loc, s);
    CHECK(ev.value == doctest::Approx(1.0).epsilon(1e-4));
    CHECK_FALSE(ev.accuracy_warning);
    MetricDerivEval w1 = w1_metric_derivative_1d(loc, s);
    CHECK(w1.value == doctest::Approx(1.0).epsilon(1e-4));
  }
  Curve1D sc = scale_family();
  for (double s : {0.8, 1.0, 1.5}) {
    MetricDerivEval ev = metric_derivative_sq_1d(sc, s);
    CHECK(ev.value == doctest::Approx(1.0).epsilon(1e-4));
  }
}

TEST_CASE("action of simple curves") {
  ActionReport rep = action_1d(location_family(), 0.0, 1.0, 21, true);
  CHECK(rep.action == doctest::Approx(1.0).epsilon(1e-4));
  CHECK_FALSE(rep.accuracy_warning);

  // the noising flow of N(0,1) never moves
  Curve1D ou;
  ou.s_lo = 0.0;
  ou.s_hi = 3.0;
  ou.x_lo = -12.0;
  ou.x_hi = 12.0;
  ou.density = [](double, double x) { return normal_pdf(x); };
  ou.cdf = [](double, double x) { return normal_cdf(x); };
  ActionReport flat = action_1d(ou, 0.0, 3.0, 16, false);
  CHECK(flat.action == doctest::Approx(0.0).epsilon(1e-12));

  CHECK_THROWS_AS(action_1d(ou, 1.0, 1.0, 16, false), InvalidParameter);
}

TEST_CASE("tilted two-mode curve: frozen quadrature values") {
  // references from an independent high-resolution implementation
  struct Row {
    double m, md2, w1;
  };
  const Row rows[] = {{2.0, 4.89264, 1.94832},
                      {4.0, 134.983, 8.91286},
                      {6.0, 3453.6, 22.8191},
                      {8.0, 116663.0, 35.3349}};
  for (const Row& r : rows) {
    Curve1D curve = mog_tilt_curve(r.m);
    CHECK(curve.validate());
    MetricDerivEval md = metric_derivative_sq_1d(curve, 0.95);
    CHECK(md.value == doctest::Approx(r.md2).epsilon(0.01));
    MetricDerivEval w1 = w1_metric_derivative_1d(curve, 0.95);
    CHECK(w1.value == doctest::Approx(r.w1).epsilon(0.01));
  }
  // exponentially growing gap between the squared speed and the W1 speed
  CHECK(rows[3].md2 / (rows[3].w1 * rows[3].w1) >
        20.0 * rows[1].md2 / (rows[1].w1 * rows[1].w1));
}

TEST_CASE("tilted curve actions grow sharply with the separation") {
  double prev_action = 0.0;
  std::vector<double> log_actions;
  for (double m : {2.0, 4.0, 6.0, 8.0}) {
    ActionReport rep = action_1d(mog_tilt_curve(m), 0.9, 0.99, 31, false);
    CHECK(rep.action > prev_action);
    prev_action = rep.action;
    log_actions.push_back(std::log(rep.action));
  }
  // frozen references: 0.437, 11.79, 294.0, 11820
  CHECK(std::exp(log_actions[1]) == doctest::Approx(11.79).epsilon(0.03));
  CHECK(std::exp(log_actions[2]) == doctest::Approx(294.0).epsilon(0.03));
  CHECK(log_actions[2] - log_actions[1] >= 0.5);
  // the exponential regime dominates from m = 4 on: each further doubling of
  // the separation adds at least the previous log-increment
  CHECK(log_actions[3] - log_actions[2] >= log_actions[2] - log_actions[1]);
}

TEST_CASE("coarse grids raise the accuracy flag") {
  Curve1D curve = mog_tilt_curve(8.0);
  curve.x_points = 41;  // nowhere near enough to resolve the trough
  MetricDerivEval ev = metric_derivative_sq_1d(curve, 0.95);
  CHECK(ev.accuracy_warning);
}

TEST_CASE("quantile route agrees with the density route") {
  Curve1D curve = mog_tilt_curve(4.0);
  const double direct = metric_derivative_sq_1d(curve, 0.95).value;
  const double via_quantiles = metric_deriv_sq_by_quantiles(curve, 0.95, 2001);
  CHECK(std::abs(direct - via_quantiles) < 0.05 * direct);

  Curve1D sc = scale_family();
  const double d2 = metric_derivative_sq_1d(sc, 1.0).value;
  const double q2 = metric_deriv_sq_by_quantiles(sc, 1.0, 2001);
  CHECK(std::abs(d2 - q2) < 0.05 * d2);
}

TEST_CASE("s-parameterization maps") {
  const double m = 4.0, r = 2.0;
  const double theta = 0.3;
  const double s = theta_to_s(m, r, theta);
  CHECK(s == doctest::Approx(1.0 / (1.0 + 16.0 * std::pow(0.7, 2.0))));
  CHECK(s_to_theta(m, r, s) == doctest::Approx(theta).epsilon(1e-10));
  const double h = 1e-6;
  const double fd =
      (theta_to_s(m, r, theta + h) - theta_to_s(m, r, theta - h)) / (2 * h);
  CHECK(ds_dtheta(m, r, theta) == doctest::Approx(fd).epsilon(1e-6));
}

TEST_CASE("noising-path action stays under its bound") {
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(2);
  Target std2 =
      make_gaussian_mixture({1.0}, {mu}, {Eigen::MatrixXd::Identity(2, 2)});
  OuActionResult res = ou_action_and_bound(std2, 12.0, 61);
  CHECK(res.action == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(res.bound == doctest::Approx(4.0));
  CHECK_FALSE(res.accuracy_warning);

  Target mog = make_mog1d(4.0);
  OuActionResult r1 = ou_action_and_bound(mog, 14.0, 141);
  CHECK(r1.action == doctest::Approx(3.3812).epsilon(0.02));
  CHECK(r1.bound == doctest::Approx(17.0));
  CHECK(r1.action <= r1.bound);

  // insufficient horizon raises the accuracy flag
  OuActionResult r2 = ou_action_and_bound(mog, 2.0, 21);
  CHECK(r2.accuracy_warning);
}
