#include "cortigraph/classify.hpp"
#include "cortigraph/cluster.hpp"
#include "cortigraph/error.hpp"

#include "fixtures.hpp"

#include <doctest.h>

#include <map>
#include <set>

using namespace cortigraph;
using namespace cortigraph::classify;
using cortigraph::cluster::kmeans;

namespace {

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return Errc::Io;
}

// Same partition up to relabelling.
bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
  std::map<int, int> ab, ba;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (ab.contains(a[i]) && ab[a[i]] != b[i]) return false;
    if (ba.contains(b[i]) && ba[b[i]] != a[i]) return false;
    ab[a[i]] = b[i];
    ba[b[i]] = a[i];
  }
  return true;
}

double training_accuracy(const ClassifierSpec& spec, const Eigen::MatrixXd& x, const std::vector<int>& y, int classes) {
  auto clf = make_classifier(spec, 1);
  clf->fit(x, y, classes);
  const auto p = clf->predict(x);
  int ok = 0;
  for (std::size_t i = 0; i < y.size(); ++i) ok += p[i] == y[i];
  return double(ok) / double(y.size());
}

Dataset xor_data(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Eigen::MatrixXd x(n, 2);
  std::vector<std::string> labels;
  for (int i = 0; i < n; ++i) {
    const double sx = (i % 4) < 2 ? 1.0 : -1.0;
    const double sy = (i % 2) ? 1.0 : -1.0;
    x(i, 0) = sx + 0.25 * synth::normal(rng);
    x(i, 1) = sy + 0.25 * synth::normal(rng);
    labels.push_back(sx * sy > 0 ? "same" : "diff");
  }
  return make_dataset(x, labels);
}

// 62 rows with five planted blocks; row i is node i's z-profile.
Eigen::MatrixXd planted_blocks(std::uint64_t seed, std::vector<int>* truth = nullptr) {
  std::mt19937_64 rng(seed);
  const int sizes[5] = {13, 13, 12, 12, 12};
  std::vector<int> block;
  for (int b = 0; b < 5; ++b)
    for (int k = 0; k < sizes[b]; ++k) block.push_back(b);
  Eigen::MatrixXd z(62, 62);
  for (int i = 0; i < 62; ++i)
    for (int j = i; j < 62; ++j) {
      const double v = i == j ? 0.0 : (block[std::size_t(i)] == block[std::size_t(j)] ? 1.5 : 0.0) + 0.1 * synth::normal(rng);
      z(i, j) = z(j, i) = v;
    }
  if (truth) *truth = block;
  return z;
}

}  // namespace

TEST_CASE("stratified folds") {
  std::vector<int> y;
  for (int i = 0; i < 1200; ++i) y.push_back(i % 3);
  const auto f = stratified_folds(y, 10, 42);
  std::vector<std::array<int, 3>> count(10, {0, 0, 0});
  for (std::size_t i = 0; i < y.size(); ++i) ++count[std::size_t(f[i])][std::size_t(y[i])];
  for (const auto& c : count) {
    CHECK(c[0] == 40);
    CHECK(c[1] == 40);
    CHECK(c[2] == 40);
  }
  CHECK(stratified_folds(y, 10, 42) == f);
  CHECK(stratified_folds(y, 10, 43) != f);
}

TEST_CASE("subject folds keep subjects together") {
  std::vector<int> y;
  std::vector<std::string> groups;
  for (int s = 0; s < 12; ++s)
    for (int e = 0; e < 5; ++e) {
      y.push_back(s % 2);
      groups.push_back("s" + std::to_string(s));
    }
  const auto f = subject_folds(y, groups, 4, 7);
  std::map<std::string, std::set<int>> seen;
  for (std::size_t i = 0; i < y.size(); ++i) seen[groups[i]].insert(f[i]);
  for (const auto& [g, folds] : seen) CHECK(folds.size() == 1);
  std::vector<int> per_fold(4, 0);
  for (int v : f) ++per_fold[std::size_t(v)];
  for (int c : per_fold) CHECK(c == 15);
}

TEST_CASE("cross-validation basics") {
  const auto b = fixture::gaussian_blobs(3, 4, 150, 30.0, 1);
  const auto ds = make_dataset(b.x, b.labels);
  const auto r = kfold_cv(ds, KnnSpec{}, 10, 42);
  CHECK(r.mean_accuracy == 1.0);
  CHECK(r.fold_accuracies.size() == 10);
  CHECK(r.classifier == "kNN");
  const auto again = kfold_cv(ds, KnnSpec{}, 10, 42);
  CHECK(again.fold_accuracies == r.fold_accuracies);

  const auto one = make_dataset(b.x, std::vector<std::string>(150, "A"));
  CHECK(code_of([&] { kfold_cv(one, KnnSpec{}, 10, 42); }) == Errc::TooFewClasses);
  CHECK(code_of([&] { kfold_cv(ds, KnnSpec{}, 1, 42); }) == Errc::InvalidRange);
  CHECK(code_of([&] { kfold_cv(ds, KnnSpec{}, 60, 42); }) == Errc::TooFewExamples);
}

TEST_CASE("k nearest neighbours") {
  const auto b = fixture::gaussian_blobs(3, 5, 300, 10.0, 2);
  const auto ds = make_dataset(b.x, b.labels);
  CHECK(kfold_cv(ds, KnnSpec{5}, 10, 42).mean_accuracy >= 0.99);

  auto clf = make_classifier(KnnSpec{1}, 0);
  clf->fit(ds.x, ds.y, 3);
  CHECK(clf->predict(ds.x.topRows(20)) == std::vector<int>(ds.y.begin(), ds.y.begin() + 20));

  // k = n_train: the global majority wins everywhere.
  Eigen::MatrixXd x = b.x.topRows(7);
  std::vector<int> y{0, 1, 1, 2, 1, 0, 2};
  auto all = make_classifier(KnnSpec{7}, 0);
  all->fit(x, y, 3);
  for (int p : all->predict(b.x.bottomRows(10))) CHECK(p == 1);

  auto too_many = make_classifier(KnnSpec{8}, 0);
  CHECK(code_of([&] { too_many->fit(x, y, 3); }) == Errc::KTooLarge);
}

TEST_CASE("logistic regression") {
  // Mirror-symmetric 1-D classes on either side of zero.
  Eigen::MatrixXd x(80, 1);
  std::vector<int> y;
  for (int i = 0; i < 40; ++i) {
    const double v = 0.1 + 1.9 * i / 39.0;
    x(2 * i, 0) = -v;
    x(2 * i + 1, 0) = v;
    y.push_back(0);
    y.push_back(1);
  }
  auto lr = make_classifier(LogRegSpec{}, 0);
  lr->fit(x, y, 2);
  Eigen::MatrixXd grid(201, 1);
  for (int i = 0; i <= 200; ++i) grid(i, 0) = -1.0 + i / 100.0;
  const auto p = lr->predict(grid);
  double boundary = 99;
  for (int i = 1; i <= 200; ++i)
    if (p[std::size_t(i)] != p[std::size_t(i - 1)]) {
      boundary = grid(i, 0);
      break;
    }
  CHECK(std::abs(boundary) <= 0.1);
  CHECK(p.front() == 0);
  CHECK(p.back() == 1);

  // A duplicated feature column changes nothing about the predictions.
  const auto b = fixture::gaussian_blobs(3, 3, 150, 3.0, 3);
  const auto ds = make_dataset(b.x, b.labels);
  Eigen::MatrixXd dup(150, 4);
  dup << b.x, b.x.col(0);
  auto single = make_classifier(LogRegSpec{}, 0);
  auto twice = make_classifier(LogRegSpec{}, 0);
  single->fit(b.x, ds.y, 3);
  twice->fit(dup, ds.y, 3);
  CHECK(single->predict(b.x) == twice->predict(dup));

  CHECK(code_of([&] { make_classifier(LogRegSpec{}, 0)->fit(x, std::vector<int>(80, 1), 2); }) == Errc::TooFewClasses);
}

TEST_CASE("linear SVM") {
  Eigen::MatrixXd x(20, 1);
  std::vector<int> y;
  for (int i = 0; i < 20; ++i) {
    x(i, 0) = i % 2 ? 1.0 : -1.0;
    y.push_back(i % 2);
  }
  auto svm = make_classifier(SvmSpec{}, 0);
  svm->fit(x, y, 2);
  Eigen::MatrixXd probe(4, 1);
  probe << -2.0, -1.0, 1.0, 2.0;
  CHECK(svm->predict(probe) == std::vector<int>{0, 0, 1, 1});

  const auto sep = fixture::gaussian_blobs(2, 3, 100, 12.0, 4);
  const auto ds = make_dataset(sep.x, sep.labels);
  CHECK(training_accuracy(SvmSpec{}, ds.x, ds.y, 2) == 1.0);

  const auto blobs = fixture::gaussian_blobs(3, 10, 300, 8.0, 5);
  CHECK(kfold_cv(make_dataset(blobs.x, blobs.labels), SvmSpec{}, 10, 42).mean_accuracy >= 0.95);
}

TEST_CASE("random forest") {
  CHECK(kfold_cv(xor_data(400, 6), ForestSpec{}, 10, 42).mean_accuracy >= 0.95);

  std::mt19937_64 rng(7);
  Eigen::MatrixXd x(60, 3);
  std::vector<int> y;
  for (int i = 0; i < 60; ++i) {
    for (int d = 0; d < 3; ++d) x(i, d) = synth::normal(rng);
    y.push_back(int(uniform_index(rng, 3)));
  }
  CHECK(training_accuracy(ForestSpec{1, 0, 1, false}, x, y, 3) == 1.0);
}

TEST_CASE("reporting helpers") {
  CVResult r;
  r.stimulus = "A";
  r.classifier = "RF";
  r.mean_accuracy = 0.9075;
  CHECK(table_row(r) == "A → RF 90.75");

  const auto g = sweep_grid(0.5, 0.95, 0.05);
  REQUIRE(g.size() == 10);
  CHECK(g.front() == 0.5);
  CHECK(g.back() == 0.95);
  CHECK(code_of([] { sweep_grid(0.9, 0.5, 0.05); }) == Errc::InvalidRange);

  const auto b = fixture::gaussian_blobs(2, 3, 40, 10.0, 8);
  auto build = [&](double) { return make_dataset(b.x, b.labels); };
  const auto single = threshold_sweep(build, {0.85}, KnnSpec{}, 5, 42);
  REQUIRE(single.size() == 1);
  CHECK(single[0].rho_th == 0.85);
  CHECK(code_of([&] { threshold_sweep(build, {}, KnnSpec{}, 5, 42); }) == Errc::EmptyInput);
}

TEST_CASE("k-means") {
  const auto b = fixture::gaussian_blobs(3, 2, 90, 20.0, 9);
  CHECK(kmeans(b.x, 90, 1).wcss == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(kmeans(Eigen::MatrixXd::Constant(10, 3, 2.5), 1, 1).wcss == 0.0);
  const auto three = kmeans(b.x, 3, 1);
  CHECK(same_partition(three.labels, b.truth));
  for (std::size_t i = 1; i < three.wcss_trace.size(); ++i) CHECK(three.wcss_trace[i] <= three.wcss_trace[i - 1] + 1e-9);
  CHECK(code_of([&] { kmeans(b.x.topRows(2), 3, 1); }) == Errc::KExceedsPoints);
  CHECK(kmeans(b.x, 3, 5).labels == kmeans(b.x, 3, 5).labels);
}

TEST_CASE("elbow selection") {
  std::vector<int> truth;
  const auto z = planted_blocks(10, &truth);
  const auto five = cluster::elbow_kmeans(z, 10, 42);
  CHECK(five.k == 5);
  CHECK(same_partition(five.labels, truth));
  for (std::size_t i = 1; i < five.wcss_curve.size(); ++i) CHECK(five.wcss_curve[i] <= five.wcss_curve[i - 1]);

  CHECK(cluster::elbow_select({10, 9, 8, 7, 6}) == 2);
  CHECK(code_of([] { cluster::elbow_select({3, 1}); }) == Errc::CurveTooShort);

  const auto b = fixture::gaussian_blobs(3, 2, 150, 15.0, 11);
  CHECK(cluster::elbow_kmeans(b.x, 10, 42).k == 3);
}

TEST_CASE("matrix reordering by cluster") {
  const Eigen::MatrixXd m = Eigen::MatrixXd::Random(6, 6);
  const auto same = cluster::reorder_adjacency(m, {0, 0, 1, 1, 2, 2});
  CHECK(same.matrix == m);

  // Two blocks, scrambled.
  Eigen::MatrixXd block = Eigen::MatrixXd::Zero(6, 6);
  block.topLeftCorner(3, 3).setConstant(1.0);
  block.bottomRightCorner(3, 3).setConstant(2.0);
  const std::vector<std::size_t> scramble{4, 0, 3, 5, 1, 2};
  const auto mixed = cluster::permute_symmetric(block, scramble);
  std::vector<int> labels;
  for (auto s : scramble) labels.push_back(s < 3 ? 0 : 1);
  CHECK(cluster::reorder_adjacency(mixed, labels).matrix == block);

  std::vector<std::size_t> inverse(6);
  for (std::size_t i = 0; i < 6; ++i) inverse[scramble[i]] = i;
  CHECK(cluster::permute_symmetric(mixed, inverse) == block);
  CHECK(code_of([&] { cluster::reorder_adjacency(m, {0, 1}); }) == Errc::SizeMismatch);
}
