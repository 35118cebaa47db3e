#include "cortigraph/classify.hpp"

#include "cortigraph/error.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <map>
#include <numeric>
#include <set>

namespace cortigraph::classify {

namespace {

// Fixed offsets that derive per-fold and per-tree streams from the master seed.
constexpr std::uint64_t kFoldStride = 1000003;

struct Standardizer {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd scale;

  void fit(const Eigen::MatrixXd& x) {
    mean = x.colwise().mean();
    const Eigen::MatrixXd c = x.rowwise() - mean;
    scale = (c.colwise().squaredNorm() / static_cast<double>(x.rows())).cwiseSqrt();
    for (Eigen::Index j = 0; j < scale.size(); ++j) {
      if (!(scale(j) > 1e-12)) scale(j) = 1.0;
    }
  }
  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const {
    return (x.rowwise() - mean).array().rowwise() / scale.array();
  }
};

void check_training_input(const Eigen::MatrixXd& x, const std::vector<int>& y, int n_classes) {
  if (x.rows() == 0) fail(Errc::EmptyInput, "no training examples");
  if (static_cast<std::size_t>(x.rows()) != y.size()) fail(Errc::SizeMismatch, "label count differs from row count");
  std::set<int> seen(y.begin(), y.end());
  for (int c : seen) {
    if (c < 0 || c >= n_classes) fail(Errc::IndexOutOfRange, "label index outside class range");
  }
}

void require_two_classes(const std::vector<int>& y) {
  std::set<int> seen(y.begin(), y.end());
  if (seen.size() < 2) fail(Errc::TooFewClasses, "training data contains a single class");
}

class Knn final : public Classifier {
 public:
  explicit Knn(KnnSpec spec) : spec_(spec) {}

  void fit(const Eigen::MatrixXd& x, const std::vector<int>& y, int n_classes) override {
    check_training_input(x, y, n_classes);
    if (spec_.k < 1 || static_cast<Eigen::Index>(spec_.k) > x.rows())
      fail(Errc::KTooLarge, "k=" + std::to_string(spec_.k) + " exceeds " + std::to_string(x.rows()) + " training examples");
    x_ = x;
    y_ = y;
    n_classes_ = n_classes;
  }

  std::vector<int> predict(const Eigen::MatrixXd& q) const override {
    std::vector<int> out(static_cast<std::size_t>(q.rows()));
    const auto n = static_cast<std::size_t>(x_.rows());
    const auto k = static_cast<std::size_t>(spec_.k);
    std::vector<std::pair<double, std::size_t>> d(n);
    for (Eigen::Index r = 0; r < q.rows(); ++r) {
      for (std::size_t i = 0; i < n; ++i) d[i] = {(x_.row(static_cast<Eigen::Index>(i)) - q.row(r)).norm(), i};
      std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
      std::vector<int> votes(static_cast<std::size_t>(n_classes_), 0);
      std::vector<double> dist_sum(static_cast<std::size_t>(n_classes_), 0.0);
      for (std::size_t i = 0; i < k; ++i) {
        const auto c = static_cast<std::size_t>(y_[d[i].second]);
        ++votes[c];
        dist_sum[c] += d[i].first;
      }
      int best = 0;
      for (int c = 1; c < n_classes_; ++c) {
        const auto cu = static_cast<std::size_t>(c);
        const auto bu = static_cast<std::size_t>(best);
        if (votes[cu] > votes[bu] || (votes[cu] == votes[bu] && dist_sum[cu] < dist_sum[bu])) best = c;
      }
      out[static_cast<std::size_t>(r)] = best;
    }
    return out;
  }

 private:
  KnnSpec spec_;
  Eigen::MatrixXd x_;
  std::vector<int> y_;
  int n_classes_ = 0;
};

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd p = logits.colwise() - logits.rowwise().maxCoeff();
  p = p.array().exp();
  p.array().colwise() /= p.rowwise().sum().array();
  return p;
}

class LogisticRegression final : public Classifier {
 public:
  explicit LogisticRegression(LogRegSpec spec) : spec_(spec) {}

  void fit(const Eigen::MatrixXd& x_raw, const std::vector<int>& y, int n_classes) override {
    check_training_input(x_raw, y, n_classes);
    require_two_classes(y);
    std_.fit(x_raw);
    const Eigen::MatrixXd x = std_.apply(x_raw);
    const auto n = x.rows();
    const auto p = x.cols();
    const double nd = static_cast<double>(n);
    Eigen::MatrixXd onehot = Eigen::MatrixXd::Zero(n, n_classes);
    for (Eigen::Index i = 0; i < n; ++i) onehot(i, y[static_cast<std::size_t>(i)]) = 1.0;

    w_ = Eigen::MatrixXd::Zero(p, n_classes);
    b_ = Eigen::RowVectorXd::Zero(n_classes);
    const double lambda = spec_.l2_strength;

    auto loss = [&](const Eigen::MatrixXd& w, const Eigen::RowVectorXd& b) {
      const Eigen::MatrixXd logits = (x * w).rowwise() + b;
      const Eigen::VectorXd mx = logits.rowwise().maxCoeff();
      const Eigen::VectorXd lse =
          mx.array() + (logits.colwise() - mx).array().exp().rowwise().sum().log();
      const double ce = (lse - (logits.cwiseProduct(onehot)).rowwise().sum()).sum() / nd;
      return ce + lambda / (2.0 * nd) * w.squaredNorm();
    };

    double f = loss(w_, b_);
    double step = 1.0;
    bool converged = false;
    for (int it = 0; it < spec_.max_iter; ++it) {
      const Eigen::MatrixXd resid = softmax_rows((x * w_).rowwise() + b_) - onehot;
      const Eigen::MatrixXd gw = x.transpose() * resid / nd + lambda / nd * w_;
      const Eigen::RowVectorXd gb = resid.colwise().sum() / nd;
      const double gnorm2 = gw.squaredNorm() + gb.squaredNorm();
      if (gnorm2 == 0.0) {
        converged = true;
        break;
      }
      // Armijo backtracking, then let the step grow again.
      double f_new = 0.0;
      Eigen::MatrixXd w_new;
      Eigen::RowVectorXd b_new;
      while (true) {
        w_new = w_ - step * gw;
        b_new = b_ - step * gb;
        f_new = loss(w_new, b_new);
        if (f_new <= f - 0.5 * step * gnorm2 || step < 1e-12) break;
        step *= 0.5;
      }
      w_.swap(w_new);
      b_.swap(b_new);
      const double change = f - f_new;
      f = f_new;
      step = std::min(step * 2.0, 1e3);
      if (std::abs(change) < spec_.tol) {
        converged = true;
        break;
      }
    }
    if (!converged) warnings_.push_back("NonConvergence: logistic regression reached max_iter");
  }

  std::vector<int> predict(const Eigen::MatrixXd& q) const override {
    const Eigen::MatrixXd logits = (std_.apply(q) * w_).rowwise() + b_;
    std::vector<int> out(static_cast<std::size_t>(q.rows()));
    for (Eigen::Index r = 0; r < q.rows(); ++r) {
      Eigen::Index c = 0;
      logits.row(r).maxCoeff(&c);
      out[static_cast<std::size_t>(r)] = static_cast<int>(c);
    }
    return out;
  }

 private:
  LogRegSpec spec_;
  Standardizer std_;
  Eigen::MatrixXd w_;
  Eigen::RowVectorXd b_;
};

class LinearSvm final : public Classifier {
 public:
  explicit LinearSvm(SvmSpec spec) : spec_(spec) {}

  void fit(const Eigen::MatrixXd& x_raw, const std::vector<int>& y, int n_classes) override {
    check_training_input(x_raw, y, n_classes);
    require_two_classes(y);
    std_.fit(x_raw);
    const Eigen::MatrixXd x = std_.apply(x_raw);
    const auto n = x.rows();
    const double nd = static_cast<double>(n);
    const double lambda = 1.0 / (spec_.c_penalty * nd);
    w_ = Eigen::MatrixXd::Zero(x.cols(), n_classes);
    b_ = Eigen::RowVectorXd::Zero(n_classes);

    auto objective = [&](const Eigen::VectorXd& w, double b, const Eigen::VectorXd& t) {
      const Eigen::ArrayXd margin = 1.0 - t.array() * ((x * w).array() + b);
      return 0.5 * lambda * w.squaredNorm() + margin.max(0.0).sum() / nd;
    };

    bool stalled = false;
    for (int c = 0; c < n_classes; ++c) {
      Eigen::VectorXd t(n);
      for (Eigen::Index i = 0; i < n; ++i) t(i) = y[static_cast<std::size_t>(i)] == c ? 1.0 : -1.0;
      Eigen::VectorXd w = Eigen::VectorXd::Zero(x.cols());
      double b = 0.0;
      Eigen::VectorXd w_avg = Eigen::VectorXd::Zero(x.cols());
      double b_avg = 0.0;
      double obj_half = 0.0;
      for (int it = 1; it <= spec_.max_iter; ++it) {
        const Eigen::ArrayXd margin = t.array() * ((x * w).array() + b);
        Eigen::VectorXd coef = Eigen::VectorXd::Zero(n);
        for (Eigen::Index i = 0; i < n; ++i) {
          if (margin(i) < 1.0) coef(i) = t(i);
        }
        const Eigen::VectorXd gw = lambda * w - x.transpose() * coef / nd;
        const double gb = -coef.sum() / nd;
        const double eta = 1.0 / std::sqrt(static_cast<double>(it));
        w -= eta * gw;
        b -= eta * gb;
        // Running average of the iterates.
        const double a = 1.0 / static_cast<double>(it);
        w_avg += a * (w - w_avg);
        b_avg += a * (b - b_avg);
        if (it == spec_.max_iter / 2) obj_half = objective(w_avg, b_avg, t);
      }
      const double obj_end = objective(w_avg, b_avg, t);
      if (obj_half - obj_end > 1e-2 * std::max(obj_end, 1e-3)) stalled = true;
      w_.col(c) = w_avg;
      b_(c) = b_avg;
    }
    if (stalled) warnings_.push_back("NonConvergence: linear SVM objective still decreasing at max_iter");
  }

  std::vector<int> predict(const Eigen::MatrixXd& q) const override {
    const Eigen::MatrixXd score = (std_.apply(q) * w_).rowwise() + b_;
    std::vector<int> out(static_cast<std::size_t>(q.rows()));
    for (Eigen::Index r = 0; r < q.rows(); ++r) {
      Eigen::Index c = 0;
      score.row(r).maxCoeff(&c);
      out[static_cast<std::size_t>(r)] = static_cast<int>(c);
    }
    return out;
  }

  const Eigen::MatrixXd& weights() const { return w_; }

 private:
  SvmSpec spec_;
  Standardizer std_;
  Eigen::MatrixXd w_;
  Eigen::RowVectorXd b_;
};

// CART tree with Gini impurity. Nodes are stored flat; leaves carry a class.
class DecisionTree {
 public:
  void fit(const Eigen::MatrixXd& x, const std::vector<int>& y, const std::vector<std::size_t>& rows, int n_classes,
           int max_features, int min_leaf, std::mt19937_64& rng) {
    nodes_.clear();
    n_classes_ = n_classes;
    struct Pending {
      std::size_t node;
      std::vector<std::size_t> rows;
    };
    nodes_.push_back({});
    std::vector<Pending> stack;
    stack.push_back({0, rows});
    const auto p = static_cast<std::size_t>(x.cols());
    std::vector<std::size_t> features(p);
    std::vector<std::pair<double, int>> vals;

    while (!stack.empty()) {
      Pending cur = std::move(stack.back());
      stack.pop_back();
      std::vector<double> counts(static_cast<std::size_t>(n_classes), 0.0);
      for (auto r : cur.rows) counts[static_cast<std::size_t>(y[r])] += 1.0;
      const auto majority = static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
      const double m = static_cast<double>(cur.rows.size());
      const double parent_gini = gini(counts, m);
      nodes_[cur.node].label = majority;
      if (parent_gini <= 0.0 || cur.rows.size() < 2 * static_cast<std::size_t>(min_leaf)) continue;

      // Sample candidate features; keep drawing past max_features until one
      // non-constant feature has been seen.
      std::iota(features.begin(), features.end(), std::size_t{0});
      shuffle(features, rng);
      double best_score = parent_gini;
      std::size_t best_feature = p;
      double best_threshold = 0.0;
      std::size_t examined = 0;
      bool any_valid = false;
      for (std::size_t fi = 0; fi < p; ++fi) {
        if (examined >= static_cast<std::size_t>(max_features) && any_valid) break;
        const auto f = features[fi];
        ++examined;
        vals.clear();
        for (auto r : cur.rows) vals.push_back({x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(f)), y[r]});
        std::sort(vals.begin(), vals.end());
        if (vals.front().first == vals.back().first) continue;
        any_valid = true;
        std::vector<double> left(static_cast<std::size_t>(n_classes), 0.0);
        std::vector<double> right = counts;
        for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
          left[static_cast<std::size_t>(vals[i].second)] += 1.0;
          right[static_cast<std::size_t>(vals[i].second)] -= 1.0;
          if (vals[i].first == vals[i + 1].first) continue;
          const double nl = static_cast<double>(i + 1);
          const double nr = m - nl;
          if (nl < min_leaf || nr < min_leaf) continue;
          const double score = (nl * gini(left, nl) + nr * gini(right, nr)) / m;
          if (score < best_score - 1e-15) {
            best_score = score;
            best_feature = f;
            best_threshold = 0.5 * (vals[i].first + vals[i + 1].first);
            // Guard against the midpoint rounding onto the upper value.
            if (best_threshold >= vals[i + 1].first) best_threshold = vals[i].first;
          }
        }
      }
      if (best_feature == p) continue;

      std::vector<std::size_t> lrows, rrows;
      for (auto r : cur.rows) {
        (x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(best_feature)) <= best_threshold ? lrows : rrows)
            .push_back(r);
      }
      const std::size_t li = nodes_.size();
      nodes_.push_back({});
      nodes_.push_back({});
      nodes_[cur.node].feature = static_cast<long>(best_feature);
      nodes_[cur.node].threshold = best_threshold;
      nodes_[cur.node].left = li;
      nodes_[cur.node].right = li + 1;
      stack.push_back({li + 1, std::move(rrows)});
      stack.push_back({li, std::move(lrows)});
    }
  }

  int predict(const Eigen::MatrixXd& q, Eigen::Index r) const {
    std::size_t i = 0;
    while (nodes_[i].feature >= 0) {
      i = q(r, nodes_[i].feature) <= nodes_[i].threshold ? nodes_[i].left : nodes_[i].right;
    }
    return nodes_[i].label;
  }

 private:
  static double gini(const std::vector<double>& counts, double m) {
    double s = 0.0;
    for (double c : counts) s += c * c;
    return 1.0 - s / (m * m);
  }

  struct Node {
    long feature = -1;
    double threshold = 0.0;
    std::size_t left = 0, right = 0;
    int label = 0;
  };
  std::vector<Node> nodes_;
  int n_classes_ = 0;
};

class RandomForest final : public Classifier {
 public:
  RandomForest(ForestSpec spec, std::uint64_t seed) : spec_(spec), seed_(seed) {}

  void fit(const Eigen::MatrixXd& x, const std::vector<int>& y, int n_classes) override {
    check_training_input(x, y, n_classes);
    n_classes_ = n_classes;
    const auto p = static_cast<int>(x.cols());
    const int mtry = spec_.max_features > 0 ? std::min(spec_.max_features, p)
                                            : std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(p)))));
    trees_.assign(static_cast<std::size_t>(spec_.n_trees), {});
    const auto n = static_cast<std::size_t>(x.rows());
    const long long n_trees = spec_.n_trees;
#pragma omp parallel for schedule(dynamic)
    for (long long t = 0; t < n_trees; ++t) {
      std::mt19937_64 rng(seed_ + static_cast<std::uint64_t>(t));
      std::vector<std::size_t> rows(n);
      if (spec_.bootstrap) {
        for (auto& r : rows) r = uniform_index(rng, n);
      } else {
        std::iota(rows.begin(), rows.end(), std::size_t{0});
      }
      trees_[static_cast<std::size_t>(t)].fit(x, y, rows, n_classes, mtry, spec_.min_leaf, rng);
    }
  }

  std::vector<int> predict(const Eigen::MatrixXd& q) const override {
    std::vector<int> out(static_cast<std::size_t>(q.rows()));
    std::vector<int> votes(static_cast<std::size_t>(n_classes_));
    for (Eigen::Index r = 0; r < q.rows(); ++r) {
      std::fill(votes.begin(), votes.end(), 0);
      for (const auto& t : trees_) ++votes[static_cast<std::size_t>(t.predict(q, r))];
      out[static_cast<std::size_t>(r)] = static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
    }
    return out;
  }

 private:
  ForestSpec spec_;
  std::uint64_t seed_;
  std::vector<DecisionTree> trees_;
  int n_classes_ = 0;
};

std::string format_fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void validate_dataset(const Dataset& ds, int n_folds) {
  if (ds.size() == 0) fail(Errc::EmptyInput, "empty dataset");
  if (static_cast<std::size_t>(ds.x.rows()) != ds.size()) fail(Errc::SizeMismatch, "label count differs from row count");
  if (!ds.groups.empty() && ds.groups.size() != ds.size()) fail(Errc::SizeMismatch, "group id count differs from row count");
  if (!ds.x.allFinite()) fail(Errc::NonFiniteValue, "dataset contains non-finite values");
  if (ds.n_classes() < 2) fail(Errc::TooFewClasses, "dataset needs at least two classes");
  if (n_folds < 2) fail(Errc::InvalidRange, "n_folds must be at least 2");
  std::vector<std::size_t> per_class(ds.n_classes(), 0);
  for (int c : ds.y) ++per_class[static_cast<std::size_t>(c)];
  for (std::size_t c = 0; c < per_class.size(); ++c) {
    if (per_class[c] < static_cast<std::size_t>(n_folds))
      fail(Errc::TooFewExamples, "class " + ds.class_names[c] + " has " + std::to_string(per_class[c]) +
                                     " examples for " + std::to_string(n_folds) + " folds");
  }
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& x, const std::vector<std::size_t>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(rows[i]));
  return out;
}

}  // namespace

std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  // Rejection sampling keeps the map unbiased and platform independent.
  const std::uint64_t range = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % range;
  std::uint64_t v = 0;
  do {
    v = rng();
  } while (v >= limit);
  return static_cast<std::size_t>(v % range);
}

double uniform_unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

void shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[uniform_index(rng, i)]);
}

Dataset make_dataset(Eigen::MatrixXd x, const std::vector<std::string>& labels, std::vector<std::string> groups) {
  Dataset ds;
  std::set<std::string> uniq(labels.begin(), labels.end());
  ds.class_names.assign(uniq.begin(), uniq.end());
  ds.y.reserve(labels.size());
  for (const auto& l : labels) {
    ds.y.push_back(static_cast<int>(std::lower_bound(ds.class_names.begin(), ds.class_names.end(), l) - ds.class_names.begin()));
  }
  ds.x = std::move(x);
  ds.groups = std::move(groups);
  return ds;
}

std::string classifier_name(const ClassifierSpec& spec) {
  struct Namer {
    std::string operator()(const KnnSpec&) const { return "kNN"; }
    std::string operator()(const LogRegSpec&) const { return "LR"; }
    std::string operator()(const SvmSpec&) const { return "LinearSVM"; }
    std::string operator()(const ForestSpec&) const { return "RF"; }
  };
  return std::visit(Namer{}, spec);
}

std::unique_ptr<Classifier> make_classifier(const ClassifierSpec& spec, std::uint64_t seed) {
  struct Maker {
    std::uint64_t seed;
    std::unique_ptr<Classifier> operator()(const KnnSpec& s) const { return std::make_unique<Knn>(s); }
    std::unique_ptr<Classifier> operator()(const LogRegSpec& s) const { return std::make_unique<LogisticRegression>(s); }
    std::unique_ptr<Classifier> operator()(const SvmSpec& s) const { return std::make_unique<LinearSvm>(s); }
    std::unique_ptr<Classifier> operator()(const ForestSpec& s) const { return std::make_unique<RandomForest>(s, seed); }
  };
  return std::visit(Maker{seed}, spec);
}

std::vector<int> stratified_folds(const std::vector<int>& y, int n_folds, std::uint64_t seed) {
  if (n_folds < 2) fail(Errc::InvalidRange, "n_folds must be at least 2");
  std::mt19937_64 rng(seed);
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < y.size(); ++i) by_class[y[i]].push_back(i);
  std::vector<int> fold(y.size(), 0);
  for (auto& [c, idx] : by_class) {
    if (idx.size() < static_cast<std::size_t>(n_folds))
      fail(Errc::TooFewExamples, "class has fewer examples than folds");
    shuffle(idx, rng);
    for (std::size_t r = 0; r < idx.size(); ++r) fold[idx[r]] = static_cast<int>(r % static_cast<std::size_t>(n_folds));
  }
  return fold;
}

std::vector<int> subject_folds(const std::vector<int>& y, const std::vector<std::string>& groups, int n_folds,
                               std::uint64_t seed) {
  if (n_folds < 2) fail(Errc::InvalidRange, "n_folds must be at least 2");
  if (groups.size() != y.size()) fail(Errc::SizeMismatch, "subject grouping needs one group id per example");
  // Subjects are assigned to the class of their first example.
  std::map<std::string, int> subject_class;
  for (std::size_t i = 0; i < y.size(); ++i) subject_class.emplace(groups[i], y[i]);
  std::map<int, std::vector<std::string>> by_class;
  for (const auto& [s, c] : subject_class) by_class[c].push_back(s);
  std::mt19937_64 rng(seed);
  std::map<std::string, int> subject_fold;
  std::size_t offset = 0;
  for (auto& [c, subjects] : by_class) {
    std::vector<std::size_t> order(subjects.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle(order, rng);
    // Continue the round-robin across classes so small classes do not all
    // land in the first folds.
    for (std::size_t r = 0; r < order.size(); ++r)
      subject_fold[subjects[order[r]]] = static_cast<int>((offset + r) % static_cast<std::size_t>(n_folds));
    offset += order.size();
  }
  if (subject_class.size() < static_cast<std::size_t>(n_folds))
    fail(Errc::TooFewExamples, std::to_string(subject_class.size()) + " subjects for " + std::to_string(n_folds) + " folds");
  std::vector<int> fold(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) fold[i] = subject_fold.at(groups[i]);
  return fold;
}

CVResult kfold_cv(const Dataset& ds, const ClassifierSpec& clf, int n_folds, std::uint64_t seed, bool group_by_subject,
                  Exec exec) {
  validate_dataset(ds, n_folds);
  const auto fold = group_by_subject ? subject_folds(ds.y, ds.groups, n_folds, seed) : stratified_folds(ds.y, n_folds, seed);

  CVResult res;
  res.classifier = classifier_name(clf);
  res.fold_accuracies.assign(static_cast<std::size_t>(n_folds), 0.0);
  std::vector<std::vector<std::string>> fold_warnings(static_cast<std::size_t>(n_folds));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_folds));
  const int n_classes = static_cast<int>(ds.n_classes());

  auto run_fold = [&](int f) {
    const auto fu = static_cast<std::size_t>(f);
    try {
      std::vector<std::size_t> train, test;
      for (std::size_t i = 0; i < ds.size(); ++i) (fold[i] == f ? test : train).push_back(i);
      if (test.empty()) fail(Errc::TooFewExamples, "fold " + std::to_string(f) + " is empty");
      std::vector<int> ytr;
      ytr.reserve(train.size());
      for (auto i : train) ytr.push_back(ds.y[i]);
      auto model = make_classifier(clf, seed + kFoldStride * static_cast<std::uint64_t>(f + 1));
      model->fit(take_rows(ds.x, train), ytr, n_classes);
      const auto pred = model->predict(take_rows(ds.x, test));
      std::size_t hit = 0;
      for (std::size_t i = 0; i < test.size(); ++i) hit += pred[i] == ds.y[test[i]] ? 1 : 0;
      res.fold_accuracies[fu] = static_cast<double>(hit) / static_cast<double>(test.size());
      fold_warnings[fu] = model->warnings();
    } catch (...) {
      errors[fu] = std::current_exception();
    }
  };
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int f = 0; f < n_folds; ++f) run_fold(f);
  } else {
    for (int f = 0; f < n_folds; ++f) run_fold(f);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  for (int f = 0; f < n_folds; ++f) {
    for (const auto& w : fold_warnings[static_cast<std::size_t>(f)]) res.warnings.push_back("fold " + std::to_string(f) + ": " + w);
  }
  res.mean_accuracy = std::accumulate(res.fold_accuracies.begin(), res.fold_accuracies.end(), 0.0) / n_folds;
  return res;
}

std::string table_row(const CVResult& r) {
  return r.stimulus + " → " + r.classifier + " " + format_fixed(100.0 * r.mean_accuracy, 2);
}

std::string to_json(const CVResult& r) {
  nlohmann::ordered_json j;
  j["stimulus"] = r.stimulus;
  j["rho_th"] = r.rho_th;
  j["classifier"] = r.classifier;
  j["fold_accuracies"] = r.fold_accuracies;
  j["mean_accuracy"] = r.mean_accuracy;
  if (!r.warnings.empty()) j["warnings"] = r.warnings;
  return j.dump(2);
}

std::vector<CVResult> threshold_sweep(const std::function<Dataset(double)>& build_dataset,
                                      const std::vector<double>& thresholds, const ClassifierSpec& clf, int n_folds,
                                      std::uint64_t seed, bool group_by_subject) {
  if (thresholds.empty()) fail(Errc::EmptyInput, "threshold list is empty");
  std::vector<CVResult> out;
  out.reserve(thresholds.size());
  for (double rho : thresholds) {
    auto r = kfold_cv(build_dataset(rho), clf, n_folds, seed, group_by_subject);
    r.rho_th = rho;
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<double> sweep_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo)) fail(Errc::InvalidRange, "sweep needs LO <= HI and STEP > 0");
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> g(count);
  for (std::size_t i = 0; i < count; ++i) g[i] = std::round((lo + static_cast<double>(i) * step) * 1e12) / 1e12;
  return g;
}

}  // namespace cortigraph::classify
