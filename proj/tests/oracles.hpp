#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the library's algorithms.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

// Ideal bandpass by naive DFT: zero every bin outside [lo, hi], inverse DFT.
inline std::vector<double> ideal_bandpass(const std::vector<double>& x, double fs, double lo, double hi) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> spec(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t t = 0; t < n; ++t) acc += x[t] * std::polar(1.0, -2.0 * std::numbers::pi * double(k * t % n) / double(n));
    const double f = double(std::min(k, n - k)) * fs / double(n);
    spec[k] = (f >= lo && f <= hi) ? acc : 0.0;
  }
  std::vector<double> y(n);
  for (std::size_t t = 0; t < n; ++t) {
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t k = 0; k < n; ++k) acc += spec[k] * std::polar(1.0, 2.0 * std::numbers::pi * double(k * t % n) / double(n));
    y[t] = acc.real() / double(n);
  }
  return y;
}

// |DFT|^2 at an arbitrary frequency.
inline double dft_power(const std::vector<double>& x, double fs, double f) {
  std::complex<double> acc{0.0, 0.0};
  for (std::size_t t = 0; t < x.size(); ++t) acc += x[t] * std::polar(1.0, -2.0 * std::numbers::pi * f * double(t) / fs);
  return std::norm(acc);
}

inline double correlation(const std::vector<double>& a, const std::vector<double>& b, std::size_t from, std::size_t to) {
  double ma = 0, mb = 0;
  for (std::size_t i = from; i < to; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= double(to - from);
  mb /= double(to - from);
  double num = 0, da = 0, db = 0;
  for (std::size_t i = from; i < to; ++i) {
    num += (a[i] - ma) * (b[i] - mb);
    da += (a[i] - ma) * (a[i] - ma);
    db += (b[i] - mb) * (b[i] - mb);
  }
  return num / std::sqrt(da * db);
}

// ---- graphs --------------------------------------------------------------

using Adj = Eigen::MatrixXi;

inline Adj random_graph(int n, double p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Adj a = Adj::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (u(rng) < p) a(i, j) = a(j, i) = 1;
  return a;
}

// All simple paths between a and b by depth-first enumeration.
inline void simple_paths(const Adj& a, int cur, int target, std::vector<int>& path, std::vector<bool>& used,
                         std::vector<std::vector<int>>& out) {
  if (cur == target) {
    out.push_back(path);
    return;
  }
  for (int w = 0; w < a.rows(); ++w) {
    if (a(cur, w) && !used[std::size_t(w)]) {
      used[std::size_t(w)] = true;
      path.push_back(w);
      simple_paths(a, w, target, path, used, out);
      path.pop_back();
      used[std::size_t(w)] = false;
    }
  }
}

// Shortest paths between every pair, by enumeration of all simple paths.
struct PathTable {
  std::vector<std::vector<std::vector<std::vector<int>>>> shortest;  // [a][b] -> list of node sequences
  std::vector<std::vector<int>> dist;                                // -1 when unreachable
};

inline PathTable enumerate_paths(const Adj& a) {
  const int n = int(a.rows());
  PathTable t;
  t.shortest.assign(std::size_t(n), std::vector<std::vector<std::vector<int>>>(std::size_t(n)));
  t.dist.assign(std::size_t(n), std::vector<int>(std::size_t(n), -1));
  for (int s = 0; s < n; ++s) {
    for (int e = 0; e < n; ++e) {
      if (s == e) {
        t.dist[std::size_t(s)][std::size_t(e)] = 0;
        continue;
      }
      std::vector<std::vector<int>> all;
      std::vector<int> path{s};
      std::vector<bool> used(std::size_t(n), false);
      used[std::size_t(s)] = true;
      simple_paths(a, s, e, path, used, all);
      if (all.empty()) continue;
      std::size_t best = all.front().size();
      for (const auto& p : all) best = std::min(best, p.size());
      for (auto& p : all)
        if (p.size() == best) t.shortest[std::size_t(s)][std::size_t(e)].push_back(p);
      t.dist[std::size_t(s)][std::size_t(e)] = int(best) - 1;
    }
  }
  return t;
}

inline Eigen::VectorXd betweenness(const Adj& a, const PathTable& t) {
  const int n = int(a.rows());
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  for (int u = 0; u < n; ++u) {
    for (int s = 0; s < n; ++s) {
      for (int e = s + 1; e < n; ++e) {
        if (s == u || e == u) continue;
        const auto& paths = t.shortest[std::size_t(s)][std::size_t(e)];
        if (paths.empty()) continue;
        int through = 0;
        for (const auto& p : paths)
          for (std::size_t k = 1; k + 1 < p.size(); ++k) through += p[k] == u;
        b(u) += double(through) / double(paths.size());
      }
    }
  }
  if (n > 2) b *= 2.0 / (double(n - 1) * double(n - 2));
  return b;
}

inline Eigen::VectorXd closeness(const Adj& a, const PathTable& t) {
  const int n = int(a.rows());
  Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
  for (int u = 0; u < n; ++u) {
    int reach = 0, total = 0;
    for (int v = 0; v < n; ++v)
      if (v != u && t.dist[std::size_t(u)][std::size_t(v)] > 0) {
        ++reach;
        total += t.dist[std::size_t(u)][std::size_t(v)];
      }
    if (reach > 0) c(u) = (double(reach) / total) * (double(reach) / (n - 1));
  }
  return c;
}

inline Eigen::VectorXd clustering(const Adj& a) {
  const int n = int(a.rows());
  Eigen::VectorXd k = Eigen::VectorXd::Zero(n);
  for (int u = 0; u < n; ++u) {
    int deg = a.row(u).sum();
    if (deg < 2) continue;
    int tri = 0;
    for (int v = 0; v < n; ++v)
      for (int w = v + 1; w < n; ++w) tri += a(u, v) && a(u, w) && a(v, w);
    k(u) = 2.0 * tri / (double(deg) * (deg - 1));
  }
  return k;
}

// Limit of power iteration from the uniform vector: projection of the
// uniform vector onto the dominant eigenspace of A + I, from a dense eigensolve.
inline Eigen::VectorXd eigenvector(const Adj& a) {
  const int n = int(a.rows());
  Eigen::MatrixXd m = a.cast<double>() + Eigen::MatrixXd::Identity(n, n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  const double top = es.eigenvalues().maxCoeff();
  Eigen::VectorXd u = Eigen::VectorXd::Constant(n, 1.0);
  Eigen::VectorXd proj = Eigen::VectorXd::Zero(n);
  for (int k = 0; k < n; ++k)
    if (es.eigenvalues()(k) > top - 1e-9) proj += es.eigenvectors().col(k).dot(u) * es.eigenvectors().col(k);
  for (int i = 0; i < n; ++i)
    if (a.row(i).sum() == 0) proj(i) = 0.0;
  return proj / proj.norm();
}

// ---- statistics ------------------------------------------------------------

// Student-t CDF by composite Simpson on a fine fixed grid (independent of
// the library's adaptive scheme).
inline double t_cdf_fixed_grid(double x, double df) {
  auto pdf = [df](double u) {
    return std::exp(std::lgamma((df + 1) / 2) - std::lgamma(df / 2)) / std::sqrt(df * std::numbers::pi) *
           std::pow(1 + u * u / df, -(df + 1) / 2);
  };
  const double ax = std::abs(x);
  const int n = 200000;
  const double h = ax / n;
  double s = pdf(0) + pdf(ax);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4 : 2) * pdf(i * h);
  const double mass = s * h / 3;
  return x >= 0 ? 0.5 + mass : 0.5 - mass;
}

}  // namespace oracle
