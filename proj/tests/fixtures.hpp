#pragma once

#include "cortigraph/synth.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace fixture {

struct Blobs {
  Eigen::MatrixXd x;
  std::vector<std::string> labels;
  std::vector<int> truth;
};

// Balanced isotropic Gaussian blobs with unit spread; every pair of centres
// is `separation` apart (a regular simplex on the first n_classes axes, or a
// regular polygon in the plane when there are fewer dimensions than classes).
inline Blobs gaussian_blobs(int n_classes, int dims, int n_examples, double separation, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Eigen::MatrixXd centres = Eigen::MatrixXd::Zero(n_classes, dims);
  if (dims >= n_classes) {
    for (int c = 0; c < n_classes; ++c) centres(c, c) = separation / std::sqrt(2.0);
  } else {
    // Regular polygon in the plane with side `separation`.
    const double radius = separation / (2.0 * std::sin(3.141592653589793 / n_classes));
    for (int c = 0; c < n_classes; ++c) {
      centres(c, 0) = radius * std::cos(2.0 * 3.141592653589793 * c / n_classes);
      if (dims > 1) centres(c, 1) = radius * std::sin(2.0 * 3.141592653589793 * c / n_classes);
    }
  }
  Blobs b;
  b.x.resize(n_examples, dims);
  for (int i = 0; i < n_examples; ++i) {
    const int c = i % n_classes;
    for (int d = 0; d < dims; ++d) b.x(i, d) = centres(c, d) + cortigraph::synth::normal(rng);
    b.labels.push_back(std::string(1, char('A' + c)));
    b.truth.push_back(c);
  }
  return b;
}

}  // namespace fixture
