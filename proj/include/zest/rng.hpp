#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <random>

namespace zest {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Stream seed for (round, particle) pairs. Every worker derives its own
// stream so results do not depend on thread scheduling.
inline std::uint64_t seed_for(std::uint64_t base, std::uint64_t round,
                              std::uint64_t particle) {
  std::uint64_t h = splitmix64(base);
  h = splitmix64(h ^ (0x9e3779b97f4a7c15ULL * (round + 1)));
  h = splitmix64(h ^ (0xbf58476d1ce4e5b9ULL * (particle + 1)));
  return h;
}

// mt19937_64 plus a self-contained polar-method normal sampler. We avoid
// std::normal_distribution so the draw sequence is fixed by this file alone.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed), seed_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t raw() { return engine_(); }

  // uniform on (0,1)
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    have_spare_ = true;
    return u * f;
  }

  Eigen::VectorXd normal_vector(Eigen::Index d) {
    Eigen::VectorXd z(d);
    for (Eigen::Index i = 0; i < d; ++i) z[i] = normal();
    return z;
  }

  // index in [0, n) with probability proportional to weights[i]
  int categorical(const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double u = uniform() * total;
    for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
      u -= weights[i];
      if (u <= 0.0) return static_cast<int>(i);
    }
    return static_cast<int>(weights.size()) - 1;
  }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace zest
