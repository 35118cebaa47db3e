#include "cortigraph/connectivity.hpp"
#include "cortigraph/error.hpp"

#include <doctest.h>

#include <numbers>
#include <random>

using namespace cortigraph;
using namespace cortigraph::connectivity;

namespace {

Eigen::MatrixXd gaussian(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = nd(rng);
  return m;
}

// Series with a shared component so correlations span a useful range.
Eigen::MatrixXd correlated(Eigen::Index len, Eigen::Index n, std::uint64_t seed) {
  Eigen::MatrixXd v = gaussian(len, n, seed);
  const Eigen::MatrixXd common = gaussian(len, 1, seed + 1);
  for (Eigen::Index c = 0; c < n; ++c) v.col(c) += common.col(0) * (double(c % 7) / 3.0);
  return v;
}

}  // namespace

TEST_CASE("Pearson adjacency basics") {
  Eigen::MatrixXd v = gaussian(300, 4, 1);
  v.col(1) = v.col(0);
  v.col(2) = -v.col(0);
  const auto cp = pearson_adjacency(v);
  CHECK(cp.a_hat(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cp.a_hat(0, 2) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(cp.a_hat.isApprox(cp.a_hat.transpose(), 0.0));
  CHECK((cp.a_hat.diagonal().array() == 1.0).all());
  CHECK((cp.a_hat.array().abs() <= 1.0).all());
}

TEST_CASE("sine and cosine over whole periods are uncorrelated") {
  const int len = 1000;
  Eigen::MatrixXd v(len, 2);
  double direct = 0.0;
  for (int t = 0; t < len; ++t) {
    const double a = 2.0 * std::numbers::pi * 5.0 * t / len;
    v(t, 0) = std::sin(a);
    v(t, 1) = std::cos(a);
    direct += std::sin(a) * std::cos(a);
  }
  CHECK(std::abs(direct) < 1e-9);
  CHECK(std::abs(pearson_adjacency(v).a_hat(0, 1)) < 1e-6);
}

TEST_CASE("fast path matches the literal double loop; serial equals parallel") {
  const Eigen::MatrixXd v = correlated(400, 62, 2);
  const auto fast = pearson_adjacency(v, Exec::parallel);
  const auto serial = pearson_adjacency(v, Exec::serial);
  const auto ref = pearson_adjacency_reference(v);
  CHECK((fast.a_hat - ref.a_hat).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(fast.a_hat == serial.a_hat);
}

TEST_CASE("affine invariance for positive scale") {
  const Eigen::MatrixXd v = correlated(300, 10, 3);
  Eigen::MatrixXd w = v;
  for (Eigen::Index c = 0; c < w.cols(); ++c) w.col(c) = w.col(c) * (0.5 + double(c)) + Eigen::VectorXd::Constant(300, 7.0 - double(c));
  CHECK((pearson_adjacency(v).a_hat - pearson_adjacency(w).a_hat).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("constant column is degenerate") {
  Eigen::MatrixXd v = gaussian(100, 3, 4);
  v.col(1).setConstant(3.0);
  const auto cp = pearson_adjacency(v);
  CHECK(cp.degenerate[1]);
  CHECK(cp.a_hat(0, 1) == 0.0);
  CHECK(cp.a_hat(1, 1) == 1.0);
}

TEST_CASE("thresholding") {
  ConnectivityPair cp;
  cp.a_hat = Eigen::MatrixXd::Identity(3, 3);
  cp.a_hat(0, 1) = cp.a_hat(1, 0) = 0.9;
  cp.a_hat(0, 2) = cp.a_hat(2, 0) = 0.85;
  cp.a_hat(1, 2) = cp.a_hat(2, 1) = -0.95;
  const auto b = binarize(cp, 0.85);
  CHECK(b.a_bin(0, 1) == 1);
  CHECK(b.a_bin(0, 2) == 1);  // equality makes an edge
  CHECK(b.a_bin(1, 2) == 0);  // signed comparison
  CHECK(b.a_bin.diagonal().sum() == 0);
  CHECK(binarize(cp, 0.0).a_bin.diagonal().sum() == 0);
  CHECK(binarize(cp, 1.0).a_bin.sum() == 0);
  CHECK_THROWS_AS(binarize(cp, 1.5), Error);

  const auto wide = pearson_adjacency(correlated(300, 20, 5));
  int prev = std::numeric_limits<int>::max();
  for (int k = 0; k <= 20; ++k) {
    const int edges = binarize(wide, k / 20.0).a_bin.sum();
    CHECK(edges <= prev);
    prev = edges;
  }
}

TEST_CASE("phase locking value") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-std::numbers::pi, std::numbers::pi);
  const std::size_t len = 10000;
  std::vector<double> a(len), b(len), c(len);
  for (std::size_t t = 0; t < len; ++t) {
    a[t] = u(rng);
    b[t] = std::remainder(a[t] + std::numbers::pi / 3.0, 2.0 * std::numbers::pi);
    c[t] = u(rng);
  }
  const auto m = plv_matrix(PhaseSet{a, a, b, c}, 0, "alpha");
  CHECK(m.plv(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.plv(0, 2) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.plv(0, 3) < 0.05);
  CHECK(m.plv.diagonal().minCoeff() == 1.0);
  CHECK(m.plv.isApprox(m.plv.transpose(), 0.0));
  CHECK(m.band == "alpha");

  // Per-epoch values are averaged across epochs.
  const auto two = plv_matrix(std::vector<PhaseSet>{{a, a}, {a, c}}, 0);
  const auto second = plv_matrix(PhaseSet{a, c}, 0);
  CHECK(two.plv(0, 1) == doctest::Approx(0.5 * (1.0 + second.plv(0, 1))).epsilon(1e-12));
}

TEST_CASE("Fisher transform") {
  Eigen::MatrixXd r(2, 2);
  r << 1.0, 0.85, 0.85, 1.0;
  const auto z = fisher_z(r).z;
  // atanh(x) = sum x^(2k+1) / (2k+1)
  double series = 0.0, p = 0.85;
  for (int k = 0; k < 2000; ++k, p *= 0.85 * 0.85) series += p / (2 * k + 1);
  CHECK(z(0, 1) == doctest::Approx(series).epsilon(1e-12));
  CHECK(z(0, 1) == doctest::Approx(1.25615).epsilon(1e-5));
  CHECK(z(0, 0) == 0.0);
  Eigen::MatrixXd neg = -r;
  neg.diagonal().setOnes();
  CHECK(fisher_z(neg).z(0, 1) == -z(0, 1));
  CHECK(fisher_z(Eigen::MatrixXd::Identity(3, 3)).z.cwiseAbs().maxCoeff() == 0.0);
  Eigen::MatrixXd one = Eigen::MatrixXd::Ones(2, 2);
  CHECK(std::isfinite(fisher_z(one).z(0, 1)));
}

TEST_CASE("group average") {
  const Eigen::MatrixXd m = gaussian(5, 5, 7);
  CHECK(group_average({m}) == m);
  CHECK(group_average({m, Eigen::MatrixXd(-m)}).cwiseAbs().maxCoeff() == 0.0);
  std::vector<Eigen::MatrixXd> items;
  for (int k = 0; k < 5; ++k) {
    Eigen::MatrixXd s = gaussian(6, 6, 10 + std::uint64_t(k));
    items.push_back(s + s.transpose());
  }
  const auto avg = group_average(items);
  for (Eigen::Index i = 0; i < 6; ++i)
    for (Eigen::Index j = 0; j < 6; ++j) {
      double s = 0;
      for (const auto& it : items) s += it(i, j);
      CHECK(std::abs(avg(i, j) - s / 5.0) < 1e-12);
    }
  CHECK_THROWS_AS(group_average({}), Error);
}
