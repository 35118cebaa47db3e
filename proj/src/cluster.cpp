#include "cortigraph/cluster.hpp"

#include "cortigraph/classify.hpp"
#include "cortigraph/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace cortigraph::cluster {

namespace {

constexpr int kMaxLloydIterations = 300;
constexpr std::uint64_t kCurveStride = 7919;

std::size_t nearest(const Eigen::MatrixXd& centroids, const Eigen::RowVectorXd& p, double& d2) {
  std::size_t best = 0;
  d2 = std::numeric_limits<double>::infinity();
  for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
    const double d = (centroids.row(c) - p).squaredNorm();
    if (d < d2) {
      d2 = d;
      best = static_cast<std::size_t>(c);
    }
  }
  return best;
}

double wcss_of(const Eigen::MatrixXd& points, const Eigen::MatrixXd& centroids, const std::vector<int>& labels) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) s += (points.row(i) - centroids.row(labels[static_cast<std::size_t>(i)])).squaredNorm();
  return s;
}

// Lloyd iterations from the given centroids until the assignment is stable.
ClusterAssignment lloyd(const Eigen::MatrixXd& points, Eigen::MatrixXd centroids) {
  const auto n = points.rows();
  const auto k = centroids.rows();
  ClusterAssignment out;
  out.k = static_cast<int>(k);
  out.labels.assign(static_cast<std::size_t>(n), -1);
  for (int it = 0; it < kMaxLloydIterations; ++it) {
    bool changed = false;
    std::vector<double> cost(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto c = static_cast<int>(nearest(centroids, points.row(i), cost[static_cast<std::size_t>(i)]));
      if (c != out.labels[static_cast<std::size_t>(i)]) {
        out.labels[static_cast<std::size_t>(i)] = c;
        changed = true;
      }
    }
    // An empty cluster takes the point that is currently worst served.
    std::vector<std::size_t> size(static_cast<std::size_t>(k), 0);
    for (int l : out.labels) ++size[static_cast<std::size_t>(l)];
    for (Eigen::Index c = 0; c < k; ++c) {
      if (size[static_cast<std::size_t>(c)] > 0) continue;
      std::size_t worst = 0;
      double worst_cost = -1.0;
      for (std::size_t i = 0; i < cost.size(); ++i) {
        if (size[static_cast<std::size_t>(out.labels[i])] > 1 && cost[i] > worst_cost) {
          worst_cost = cost[i];
          worst = i;
        }
      }
      --size[static_cast<std::size_t>(out.labels[worst])];
      out.labels[worst] = static_cast<int>(c);
      size[static_cast<std::size_t>(c)] = 1;
      cost[worst] = 0.0;
      changed = true;
    }
    centroids.setZero();
    for (Eigen::Index i = 0; i < n; ++i) centroids.row(out.labels[static_cast<std::size_t>(i)]) += points.row(i);
    for (Eigen::Index c = 0; c < k; ++c) centroids.row(c) /= static_cast<double>(size[static_cast<std::size_t>(c)]);
    out.wcss_trace.push_back(wcss_of(points, centroids, out.labels));
    if (!changed) break;
  }
  out.centroids = centroids;
  out.wcss = out.wcss_trace.back();
  return out;
}

Eigen::MatrixXd plus_plus_seeds(const Eigen::MatrixXd& points, int k, std::mt19937_64& rng) {
  const auto n = static_cast<std::size_t>(points.rows());
  Eigen::MatrixXd centroids(k, points.cols());
  centroids.row(0) = points.row(static_cast<Eigen::Index>(classify::uniform_index(rng, n)));
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], (points.row(static_cast<Eigen::Index>(i)) - centroids.row(c - 1)).squaredNorm());
      total += d2[i];
    }
    std::size_t pick = n - 1;
    if (total > 0.0) {
      const double target = classify::uniform_unit(rng) * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc > target && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = classify::uniform_index(rng, n);
    }
    centroids.row(c) = points.row(static_cast<Eigen::Index>(pick));
  }
  return centroids;
}

void check_k(const Eigen::MatrixXd& points, int k) {
  if (points.rows() == 0) fail(Errc::EmptyInput, "no points to cluster");
  if (k < 1 || k > points.rows())
    fail(Errc::KExceedsPoints, "k=" + std::to_string(k) + " with " + std::to_string(points.rows()) + " points");
}

std::vector<ClusterAssignment> best_per_k(const Eigen::MatrixXd& points, int k_max, std::uint64_t seed, int n_init) {
  check_k(points, k_max);
  std::vector<ClusterAssignment> best;
  for (int k = 1; k <= k_max; ++k) {
    auto a = kmeans(points, k, seed + kCurveStride * static_cast<std::uint64_t>(k), n_init);
    if (k > 1) {
      // Warm start: previous solution plus its worst-served point.
      const auto& prev = best.back();
      Eigen::MatrixXd init(k, points.cols());
      init.topRows(k - 1) = prev.centroids;
      Eigen::Index worst = 0;
      double worst_cost = -1.0;
      for (Eigen::Index i = 0; i < points.rows(); ++i) {
        const double c = (points.row(i) - prev.centroids.row(prev.labels[static_cast<std::size_t>(i)])).squaredNorm();
        if (c > worst_cost) {
          worst_cost = c;
          worst = i;
        }
      }
      init.row(k - 1) = points.row(worst);
      auto warm = lloyd(points, init);
      if (warm.wcss < a.wcss) a = std::move(warm);
    }
    best.push_back(std::move(a));
  }
  return best;
}

}  // namespace

ClusterAssignment kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed, int n_init) {
  check_k(points, k);
  if (n_init < 1) fail(Errc::InvalidRange, "n_init must be positive");
  ClusterAssignment best;
  best.wcss = std::numeric_limits<double>::infinity();
  for (int r = 0; r < n_init; ++r) {
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(r));
    auto a = lloyd(points, plus_plus_seeds(points, k, rng));
    if (a.wcss < best.wcss) best = std::move(a);
  }
  return best;
}

std::vector<double> wcss_curve(const Eigen::MatrixXd& points, int k_max, std::uint64_t seed, int n_init) {
  std::vector<double> curve;
  for (const auto& a : best_per_k(points, k_max, seed, n_init)) curve.push_back(a.wcss);
  return curve;
}

int elbow_select(const std::vector<double>& curve) {
  if (curve.size() < 3) fail(Errc::CurveTooShort, "elbow needs k_max >= 3");
  const double k_max = static_cast<double>(curve.size());
  const double w1 = curve.front();
  const double wk = curve.back();
  const double chord = std::hypot(k_max - 1.0, wk - w1);
  const double scale = std::max({std::abs(w1), std::abs(wk), 1.0}) * k_max;
  int best_k = 2;
  double best_d = -1.0;
  for (std::size_t i = 1; i + 1 < curve.size(); ++i) {
    const double k = static_cast<double>(i + 1);
    const double d = std::abs((k_max - 1.0) * (w1 - curve[i]) - (1.0 - k) * (wk - w1)) / chord;
    if (d > best_d + 1e-12 * scale) {
      best_d = d;
      best_k = static_cast<int>(i + 1);
    }
  }
  return best_k;
}

ClusterAssignment elbow_kmeans(const Eigen::MatrixXd& points, int k_max, std::uint64_t seed, int n_init) {
  auto all = best_per_k(points, k_max, seed, n_init);
  std::vector<double> curve;
  for (const auto& a : all) curve.push_back(a.wcss);
  const int k = elbow_select(curve);
  auto out = all[static_cast<std::size_t>(k - 1)];
  out.wcss_curve = std::move(curve);
  return out;
}

Eigen::MatrixXd permute_symmetric(const Eigen::MatrixXd& m, const std::vector<std::size_t>& permutation) {
  const auto n = static_cast<Eigen::Index>(permutation.size());
  if (m.rows() != n || m.cols() != n) fail(Errc::SizeMismatch, "permutation length differs from matrix size");
  Eigen::MatrixXd out(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j)
      out(i, j) = m(static_cast<Eigen::Index>(permutation[static_cast<std::size_t>(i)]),
                    static_cast<Eigen::Index>(permutation[static_cast<std::size_t>(j)]));
  }
  return out;
}

Reordered reorder_adjacency(const Eigen::MatrixXd& m, const std::vector<int>& labels) {
  if (m.rows() != m.cols()) fail(Errc::SizeMismatch, "matrix must be square");
  if (static_cast<Eigen::Index>(labels.size()) != m.rows()) fail(Errc::SizeMismatch, "label count differs from matrix size");
  Reordered r;
  r.permutation.resize(labels.size());
  std::iota(r.permutation.begin(), r.permutation.end(), std::size_t{0});
  std::stable_sort(r.permutation.begin(), r.permutation.end(),
                   [&](std::size_t a, std::size_t b) { return labels[a] < labels[b]; });
  r.matrix = permute_symmetric(m, r.permutation);
  return r;
}

}  // namespace cortigraph::cluster
