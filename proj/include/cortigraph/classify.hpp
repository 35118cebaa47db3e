#pragma once

#include "cortigraph/parallel.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <variant>
#include <vector>

namespace cortigraph::classify {

struct Dataset {
  Eigen::MatrixXd x;                     // n_examples x n_features
  std::vector<int> y;                    // class index into class_names
  std::vector<std::string> class_names;  // sorted label set
  std::vector<std::string> groups;       // optional subject ids, one per example

  std::size_t size() const { return y.size(); }
  std::size_t n_classes() const { return class_names.size(); }
};

// Builds a dataset from string labels; classes are indexed in sorted label order.
Dataset make_dataset(Eigen::MatrixXd x, const std::vector<std::string>& labels, std::vector<std::string> groups = {});

struct KnnSpec {
  int k = 5;
};

struct LogRegSpec {
  double l2_strength = 1.0;  // penalty l2_strength / (2 n) * ||W||^2 on the mean cross-entropy
  int max_iter = 1000;
  double tol = 1e-6;
};

struct SvmSpec {
  double c_penalty = 1.0;
  int max_iter = 1000;
};

struct ForestSpec {
  int n_trees = 100;
  int max_features = 0;  // 0 -> floor(sqrt(p))
  int min_leaf = 1;
  bool bootstrap = true;
};

using ClassifierSpec = std::variant<KnnSpec, LogRegSpec, SvmSpec, ForestSpec>;

// "kNN", "LR", "LinearSVM" or "RF".
std::string classifier_name(const ClassifierSpec& spec);

class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual void fit(const Eigen::MatrixXd& x, const std::vector<int>& y, int n_classes) = 0;
  virtual std::vector<int> predict(const Eigen::MatrixXd& x) const = 0;

  const std::vector<std::string>& warnings() const { return warnings_; }

 protected:
  std::vector<std::string> warnings_;
};

std::unique_ptr<Classifier> make_classifier(const ClassifierSpec& spec, std::uint64_t seed);

// Deterministic helpers shared with clustering: mt19937_64 mapped to
// [0, n) and [0, 1) without relying on implementation-defined distributions.
std::size_t uniform_index(std::mt19937_64& rng, std::size_t n);
double uniform_unit(std::mt19937_64& rng);
void shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng);

// Test-fold index of each example. Stratified: per-class shuffle, round-robin.
std::vector<int> stratified_folds(const std::vector<int>& y, int n_folds, std::uint64_t seed);

// Whole subjects go to one fold; subjects are stratified by their class.
std::vector<int> subject_folds(const std::vector<int>& y, const std::vector<std::string>& groups, int n_folds,
                               std::uint64_t seed);

struct CVResult {
  std::vector<double> fold_accuracies;
  double mean_accuracy = 0.0;
  std::string classifier;
  std::string stimulus;
  double rho_th = 0.0;
  std::vector<std::string> warnings;
};

CVResult kfold_cv(const Dataset& ds, const ClassifierSpec& clf, int n_folds, std::uint64_t seed,
                  bool group_by_subject = false, Exec exec = Exec::parallel);

// "A → RF 90.75"
std::string table_row(const CVResult& r);

std::string to_json(const CVResult& r);

std::vector<CVResult> threshold_sweep(const std::function<Dataset(double)>& build_dataset,
                                      const std::vector<double>& thresholds, const ClassifierSpec& clf, int n_folds,
                                      std::uint64_t seed, bool group_by_subject = false);

// lo, lo+step, ... <= hi (inclusive within rounding).
std::vector<double> sweep_grid(double lo, double hi, double step);

}  // namespace cortigraph::classify
