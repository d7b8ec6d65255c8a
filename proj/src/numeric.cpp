#include "zest/numeric.hpp"

#include <map>
#include <mutex>

namespace zest {

static GaussLegendreRule compute_gl(int n) {
  GaussLegendreRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Chebyshev initial guess for the i-th root
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      // Legendre recurrence P_0..P_n at x
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

const GaussLegendreRule& gauss_legendre(int n) {
  static std::map<int, GaussLegendreRule> cache;
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_gl(n)).first;
  return it->second;
}

double gl_integrate(const std::function<double(double)>& f, double a, double b,
                    int n) {
  const auto& rule = gauss_legendre(n);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double sum = 0.0;
  for (int i = 0; i < n; ++i)
    sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return sum * half;
}

double trapezoid(const std::function<double(double)>& f, double a, double b,
                 int n) {
  const double h = (b - a) / (n - 1);
  double sum = 0.5 * (f(a) + f(b));
  for (int i = 1; i < n - 1; ++i) sum += f(a + i * h);
  return sum * h;
}

double trapezoid_2d(const std::function<double(double, double)>& f, double ax,
                    double bx, double ay, double by, int n) {
  const double hx = (bx - ax) / (n - 1), hy = (by - ay) / (n - 1);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double wx = (i == 0 || i == n - 1) ? 0.5 : 1.0;
    const double x = ax + i * hx;
    double row = 0.0;
    for (int j = 0; j < n; ++j) {
      const double wy = (j == 0 || j == n - 1) ? 0.5 : 1.0;
      row += wy * f(x, ay + j * hy);
    }
    sum += wx * row;
  }
  return sum * hx * hy;
}

}  // namespace zest
