#include "zest/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "zest/errors.hpp"

namespace zest {

namespace {

// sum over all pairs of the multiscale kernel, diagonal included
double kernel_sum(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                  const std::vector<double>& sigmas) {
  const Eigen::VectorXd na = a.rowwise().squaredNorm();
  const Eigen::VectorXd nb = b.rowwise().squaredNorm();
  Eigen::MatrixXd d2 = na.replicate(1, b.rows());
  d2.noalias() -= 2.0 * a * b.transpose();
  d2 += nb.transpose().replicate(a.rows(), 1);
  double total = 0.0;
  for (double s : sigmas)
    total += (-d2.array() / (2.0 * s * s)).exp().sum();
  return total / double(sigmas.size());
}

}  // namespace

double mmd(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
           const std::vector<double>& sigmas) {
  if (x.rows() < 1 || y.rows() < 1)
    throw InvalidParameter("mmd: both sample sets must be non-empty");
  if (sigmas.empty()) throw InvalidParameter("mmd: sigma list must be non-empty");
  for (double s : sigmas)
    if (s == 0.0) throw InvalidParameter("mmd: sigma must be non-zero");
  const double n = double(x.rows()), m = double(y.rows());
  const double sq = kernel_sum(x, x, sigmas) / (n * n) -
                    2.0 * kernel_sum(x, y, sigmas) / (n * m) +
                    kernel_sum(y, y, sigmas) / (m * m);
  return std::sqrt(std::max(0.0, sq));
}

std::vector<double> default_mmd_sigmas() {
  std::vector<double> sigmas;
  for (int e = -4; e <= 14; e += 2) sigmas.push_back(std::pow(2.0, e / 2.0));
  return sigmas;
}

double assignment_cost(const Eigen::MatrixXd& cost) {
  const int n = int(cost.rows());
  if (cost.cols() != n) throw InvalidParameter("assignment: matrix not square");
  constexpr double kInf = std::numeric_limits<double>::infinity();
  // shortest augmenting path with dual potentials, one row at a time
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> match(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = match[j0];
      double delta = kInf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  double total = 0.0;
  for (int j = 1; j <= n; ++j) total += cost(match[j] - 1, j - 1);
  return total;
}

namespace {

Eigen::MatrixXd pairwise_sq_dist(const Eigen::MatrixXd& x,
                                 const Eigen::MatrixXd& y) {
  const Eigen::VectorXd nx = x.rowwise().squaredNorm();
  const Eigen::VectorXd ny = y.rowwise().squaredNorm();
  Eigen::MatrixXd d2 = nx.replicate(1, y.rows());
  d2.noalias() -= 2.0 * x * y.transpose();
  d2 += ny.transpose().replicate(x.rows(), 1);
  return d2.cwiseMax(0.0);
}

// Exact uncapacitated transportation problem on the complete bipartite graph
// with integer supplies m (per source) and demands n (per sink), solved by
// successive shortest paths with potentials. Returns total cost in flow
// units; divide by n*m for the uniform-measure transport cost.
double transportation_cost(const Eigen::MatrixXd& c) {
  const int n = int(c.rows()), m = int(c.cols());
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<std::int64_t> supply(n, m), demand(m, n);
  Eigen::MatrixXd flow = Eigen::MatrixXd::Zero(n, m);
  std::vector<double> pot(n + m, 0.0);
  std::int64_t remaining = std::int64_t(n) * m;

  std::vector<double> dist(n + m);
  std::vector<int> parent(n + m);
  std::vector<char> done(n + m);
  while (remaining > 0) {
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(parent.begin(), parent.end(), -1);
    std::fill(done.begin(), done.end(), 0);
    for (int i = 0; i < n; ++i)
      if (supply[i] > 0) dist[i] = 0.0;
    int sink = -1;
    for (;;) {
      int u = -1;
      double best = kInf;
      for (int v = 0; v < n + m; ++v)
        if (!done[v] && dist[v] < best) {
          best = dist[v];
          u = v;
        }
      if (u < 0) break;
      done[u] = 1;
      if (u >= n && demand[u - n] > 0) {
        sink = u;
        break;
      }
      if (u < n) {
        for (int j = 0; j < m; ++j) {
          const double w = c(u, j) + pot[u] - pot[n + j];
          if (dist[u] + w < dist[n + j] - 1e-15) {
            dist[n + j] = dist[u] + w;
            parent[n + j] = u;
          }
        }
      } else {
        const int j = u - n;
        for (int i = 0; i < n; ++i) {
          if (flow(i, j) <= 0) continue;
          const double w = -c(i, j) + pot[u] - pot[i];
          if (dist[u] + w < dist[i] - 1e-15) {
            dist[i] = dist[u] + w;
            parent[i] = u;
          }
        }
      }
    }
    if (sink < 0) throw std::logic_error("transportation: no augmenting path");
    for (int v = 0; v < n + m; ++v)
      if (dist[v] < kInf) pot[v] += std::min(dist[v], dist[sink]);
    // bottleneck: sink deficit, origin supply, and backward arcs on the path
    std::int64_t push = demand[sink - n];
    for (int v = sink; parent[v] >= 0; v = parent[v]) {
      const int p = parent[v];
      if (p >= n && v < n) push = std::min(push, std::int64_t(flow(v, p - n)));
    }
    int source = sink;
    while (parent[source] >= 0) source = parent[source];
    push = std::min(push, supply[source]);
    for (int v = sink; parent[v] >= 0; v = parent[v]) {
      const int p = parent[v];
      if (p < n && v >= n)
        flow(p, v - n) += double(push);
      else
        flow(v, p - n) -= double(push);
    }
    supply[source] -= push;
    demand[sink - n] -= push;
    remaining -= push;
  }
  double total = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) total += flow(i, j) * c(i, j);
  return total;
}

}  // namespace

double w2_empirical(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  if (x.rows() < 1 || y.rows() < 1)
    throw InvalidParameter("w2_empirical: both sample sets must be non-empty");
  if (x.cols() != y.cols())
    throw InvalidParameter("w2_empirical: dimension mismatch");
  const Eigen::MatrixXd c = pairwise_sq_dist(x, y);
  if (x.rows() == y.rows()) {
    const double cost = assignment_cost(c) / double(x.rows());
    return std::sqrt(std::max(0.0, cost));
  }
  const double cost =
      transportation_cost(c) / (double(x.rows()) * double(y.rows()));
  return std::sqrt(std::max(0.0, cost));
}

RelativeErrorStats relative_error_stats(const std::vector<double>& z_hats,
                                        double z_true,
                                        const std::vector<double>& epsilons) {
  if (z_hats.empty())
    throw InvalidParameter("relative_error_stats: empty estimate list");
  if (!(z_true > 0.0))
    throw InvalidParameter("relative_error_stats: z_true must be positive");
  RelativeErrorStats out;
  const double n = double(z_hats.size());
  double sum = 0.0;
  for (double z : z_hats) sum += z / z_true;
  out.mean_ratio = sum / n;
  double ss = 0.0;
  for (double z : z_hats) {
    const double d = z / z_true - out.mean_ratio;
    ss += d * d;
  }
  out.std_ratio = n > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
  out.coverage.reserve(epsilons.size());
  for (double eps : epsilons) {
    int hits = 0;
    for (double z : z_hats)
      if (std::abs(z / z_true - 1.0) <= eps) ++hits;
    out.coverage.push_back(hits / n);
  }
  return out;
}

WorkStats work_stats(const std::vector<double>& works) {
  if (works.empty()) throw InvalidParameter("work_stats: empty work list");
  WorkStats out;
  const double n = double(works.size());
  out.mean = std::accumulate(works.begin(), works.end(), 0.0) / n;
  if (works.size() >= 2) {
    double ss = 0.0;
    for (double w : works) ss += (w - out.mean) * (w - out.mean);
    out.variance = ss / (n - 1.0);
  }
  return out;
}

}  // namespace zest
