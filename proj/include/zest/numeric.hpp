#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <vector>

namespace zest {

inline constexpr double kLog2Pi = 1.8378770664093454836;

inline double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) * 0.3989422804014326779;
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z * M_SQRT1_2); }

inline double log_sum_exp(std::span<const double> v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v)
    if (x > m) m = x;
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

// (1 - e^{-z}) / z, accurate near zero
inline double phi1(double z) {
  if (std::abs(z) < 1e-12) return 1.0 - 0.5 * z;
  return -std::expm1(-z) / z;
}

struct GaussLegendreRule {
  std::vector<double> nodes;    // on (-1, 1)
  std::vector<double> weights;
};

// Nodes via Newton iteration on Legendre polynomials; cached per order.
const GaussLegendreRule& gauss_legendre(int n);

// integral of f over [a, b] with an n-point rule
double gl_integrate(const std::function<double(double)>& f, double a, double b,
                    int n);

// Trapezoid on a uniform grid with n points over [a, b].
double trapezoid(const std::function<double(double)>& f, double a, double b,
                 int n);

// Tensor-trapezoid over a 2-D box, n points per axis.
double trapezoid_2d(const std::function<double(double, double)>& f, double ax,
                    double bx, double ay, double by, int n);

}  // namespace zest
