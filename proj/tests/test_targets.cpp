#include <doctest.h>

#include <cmath>
#include <thread>

#include "zest/errors.hpp"
#include "zest/parallel.hpp"
#include "zest/targets.hpp"

using namespace zest;

namespace {

Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

// central finite differences of the potential
Eigen::VectorXd fd_grad(const Target& t, const Eigen::VectorXd& x) {
  const double h = 1e-5 * (x.norm() + 1.0);
  Eigen::VectorXd g(t.dim);
  for (int i = 0; i < t.dim; ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(t.dim);
    e[i] = h;
    g[i] = (t.potential(x + e) - t.potential(x - e)) / (2.0 * h);
  }
  return g;
}

void check_gradients_on_samples(const Target& t, int n_points,
                                std::uint64_t seed) {
  RngStream rng(seed);
  Eigen::MatrixXd pts;
  if (t.has_sampler()) {
    pts = t.sampler(rng, n_points);
  } else {
    // descend from the origin to find the mass, then jitter around it
    Eigen::VectorXd c = Eigen::VectorXd::Zero(t.dim);
    for (int i = 0; i < 200; ++i) c -= 0.02 * t.grad(c);
    pts.resize(n_points, t.dim);
    for (int i = 0; i < n_points; ++i)
      pts.row(i) = c + 3.0 * rng.normal_vector(t.dim);
  }
  for (int i = 0; i < n_points; ++i) {
    Eigen::VectorXd x = pts.row(i);
    Eigen::VectorXd g = t.grad(x);
    Eigen::VectorXd fd = fd_grad(t, x);
    const double scale = std::max(1.0, g.norm());
    CHECK((g - fd).norm() <= 1e-5 * scale * 10);
  }
}

}  // namespace

TEST_CASE("gaussian target basics") {
  Target g2 = make_gaussian(2, Eigen::VectorXd::Zero(2), 1.0);
  CHECK(*g2.known_log_z == doctest::Approx(std::log(2.0 * M_PI)).epsilon(1e-12));

  Target g1 = make_gaussian(1, Eigen::VectorXd::Zero(1), 1.0);
  Eigen::VectorXd x(1);
  x << 3.0;
  CHECK(g1.potential(x) == doctest::Approx(4.5));
  CHECK(g1.grad(x)[0] == doctest::Approx(3.0));

  Target g3 = make_gaussian(2, vec2(1, 1), 2.0);
  CHECK(*g3.known_log_z == doctest::Approx(std::log(4.0 * M_PI)).epsilon(1e-12));
  CHECK(g3.beta == doctest::Approx(0.5));

  CHECK_THROWS_AS(make_gaussian(2, Eigen::VectorXd::Zero(2), 0.0),
                  InvalidParameter);
  CHECK_THROWS_AS(make_gaussian(2, Eigen::VectorXd::Zero(2), -1.0),
                  InvalidParameter);
}

TEST_CASE("gaussian mixture construction and density") {
  SUBCASE("bad weights") {
    CHECK_THROWS_AS(
        make_gaussian_mixture({0.5, 0.6}, {vec2(0, 0), vec2(1, 1)},
                              {Eigen::MatrixXd::Identity(2, 2),
                               Eigen::MatrixXd::Identity(2, 2)}),
        InvalidParameter);
  }
  SUBCASE("non-positive-definite covariance") {
    Eigen::MatrixXd bad(2, 2);
    bad << 1.0, 2.0, 2.0, 1.0;  // eigenvalues 3 and -1
    CHECK_THROWS_AS(make_gaussian_mixture({1.0}, {vec2(0, 0)}, {bad}),
                    InvalidParameter);
  }
  SUBCASE("degenerate single component matches plain gaussian") {
    Target mix = make_gaussian_mixture({1.0}, {Eigen::VectorXd::Zero(2)},
                                       {Eigen::MatrixXd::Identity(2, 2)});
    Target g = make_gaussian(2, Eigen::VectorXd::Zero(2), 1.0);
    RngStream rng(3);
    for (int i = 0; i < 20; ++i) {
      Eigen::VectorXd x = rng.normal_vector(2) * 2.0;
      // potentials differ by the normalization constant log(2 pi)
      CHECK(mix.potential(x) - g.potential(x) ==
            doctest::Approx(std::log(2.0 * M_PI)).epsilon(1e-10));
      CHECK((mix.grad(x) - g.grad(x)).norm() < 1e-10);
    }
    CHECK(*mix.known_log_z == doctest::Approx(0.0));
  }
  SUBCASE("two-mode density at the midpoint") {
    Target mog = make_mog1d(4.0);
    Eigen::VectorXd mid(1);
    mid << 2.0;
    const double density = std::exp(-mog.potential(mid));
    CHECK(density == doctest::Approx(0.05399096651318806).epsilon(1e-10));
    CHECK(mog.beta == doctest::Approx(8.0));
  }
  SUBCASE("benchmark mixture of the 2-D suite") {
    Target gm = make_gm2d_benchmark();
    CHECK(*gm.known_log_z == doctest::Approx(0.0));
    CHECK(*gm.second_moment_m2 == doctest::Approx(123.08).epsilon(1e-12));
    CHECK(gm.beta == doctest::Approx(24210.0).epsilon(1e-9));
  }
}

TEST_CASE("mueller-brown target") {
  Target mb = make_mueller_brown();
  CHECK(*mb.known_log_z == doctest::Approx(std::log(22340.9983)).epsilon(1e-12));

  Eigen::VectorXd origin = vec2(3.5, -6.5);  // rescaled coordinates (0, 0)
  CHECK(mb.potential(origin) == doctest::Approx(-3.5383448508389783).epsilon(1e-10));
  Eigen::VectorXd g = mb.grad(origin);
  CHECK(g[0] == doctest::Approx(-2.36139505).epsilon(1e-6));
  CHECK(g[1] == doctest::Approx(-3.29051309).epsilon(1e-6));

  Eigen::VectorXd fd = fd_grad(mb, origin);
  CHECK((g - fd).norm() / g.norm() < 1e-6);

  CHECK(mb.beta > 1.0);
  CHECK(*mb.second_moment_m2 == doctest::Approx(36.7345).epsilon(0.02));
  CHECK(*mb.potential_lower_bound < mb.potential(origin));
}

TEST_CASE("finite-difference gradient check across built-ins") {
  check_gradients_on_samples(make_gaussian(2, vec2(1, -1), 2.0), 100, 11);
  check_gradients_on_samples(make_gm2d_benchmark(), 100, 12);
  check_gradients_on_samples(make_mog1d(4.0), 100, 13);
  check_gradients_on_samples(make_mueller_brown(), 100, 14);
}

TEST_CASE("beta is a Lipschitz bound for grad on sampled pairs") {
  for (const Target& t : {make_gaussian(2, vec2(0, 0), 1.0),
                          make_gm2d_benchmark(), make_mog1d(4.0)}) {
    RngStream rng(21);
    REQUIRE(t.has_sampler());
    Eigen::MatrixXd pts = t.sampler(rng, 200);
    for (int i = 0; i + 1 < pts.rows(); i += 2) {
      Eigen::VectorXd a = pts.row(i), b = pts.row(i + 1);
      const double lhs = (t.grad(a) - t.grad(b)).norm();
      CHECK(lhs <= t.beta * (a - b).norm() * (1.0 + 1e-9) + 1e-12);
    }
  }
}

TEST_CASE("exact sampler moments match analytic values") {
  const int n = 100000;
  SUBCASE("gaussian") {
    Target g = make_gaussian(2, vec2(1, -2), 2.0);
    RngStream rng(5);
    Eigen::MatrixXd pts = g.sampler(rng, n);
    Eigen::VectorXd mean = pts.colwise().mean();
    const double se = std::sqrt(2.0 / n);
    CHECK(std::abs(mean[0] - 1.0) < 4 * se);
    CHECK(std::abs(mean[1] + 2.0) < 4 * se);
    Eigen::MatrixXd centered = pts.rowwise() - mean.transpose();
    Eigen::MatrixXd cov = centered.transpose() * centered / double(n - 1);
    CHECK(std::abs(cov(0, 0) - 2.0) < 4 * 2.0 * std::sqrt(2.0 / n));
    CHECK(std::abs(cov(0, 1)) < 4 * 2.0 * std::sqrt(1.0 / n));
  }
  SUBCASE("benchmark mixture mean and second moment") {
    Target gm = make_gm2d_benchmark();
    RngStream rng(6);
    Eigen::MatrixXd pts = gm.sampler(rng, n);
    // analytic mean of the mixture
    Eigen::VectorXd mean_true = 0.1 * vec2(0, 0) + 0.2 * vec2(0, 11) +
                                0.3 * vec2(9, 9) + 0.4 * vec2(11, 0);
    Eigen::VectorXd mean = pts.colwise().mean();
    const double sd_bound = std::sqrt(123.08 / n);  // loose per-coordinate SE
    CHECK((mean - mean_true).norm() < 6 * sd_bound);
    const double m2 = pts.rowwise().squaredNorm().mean();
    CHECK(std::abs(m2 - 123.08) < 5.0);
  }
}

TEST_CASE("grad_counted counts exactly once per call") {
  Target g = make_gaussian(1, Eigen::VectorXd::Zero(1), 1.0);
  OracleCounter counter;
  Eigen::VectorXd x(1);
  x << 2.0;
  Eigen::VectorXd gr = grad_counted(g, counter, x);
  CHECK(gr[0] == doctest::Approx(2.0));
  CHECK(counter.calls() == 1);
  grad_counted(g, counter, x);
  CHECK(counter.calls() == 2);

  Eigen::VectorXd bad(1);
  bad << std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(grad_counted(g, counter, bad), DomainError);
  CHECK(counter.calls() == 2);

  Target mb = make_mueller_brown();
  OracleCounter c2;
  Eigen::VectorXd pt = vec2(3.5, -6.5);
  Eigen::VectorXd gmb = grad_counted(mb, c2, pt);
  CHECK(gmb[0] == doctest::Approx(-2.36139505).epsilon(1e-6));
  CHECK(c2.calls() == 1);
}

TEST_CASE("oracle counter is exact under concurrent increments") {
  Target g = make_gaussian(2, Eigen::VectorXd::Zero(2), 1.0);
  OracleCounter counter;
  const int per_worker = 5000, items = 16;
  parallel_for(items, 8, [&](std::int64_t) {
    RngStream rng(99);
    for (int i = 0; i < per_worker; ++i)
      grad_counted(g, counter, rng.normal_vector(2));
  });
  CHECK(counter.calls() == std::uint64_t(per_worker) * items);
}

TEST_CASE("recentering moves the stationary point to the origin") {
  Target g = make_gaussian(2, vec2(3, -1), 1.0);
  Target r = recentered(g);
  CHECK(r.grad(Eigen::VectorXd::Zero(2)).norm() < 1e-6);
  CHECK(r.potential(Eigen::VectorXd::Zero(2)) ==
        doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("local smoothness matches analytic curvature for gaussians") {
  Target g = make_gaussian(2, vec2(0, 0), 2.0);
  CHECK(local_smoothness(g, Eigen::VectorXd::Zero(2)) ==
        doctest::Approx(0.5).epsilon(1e-6));
}
