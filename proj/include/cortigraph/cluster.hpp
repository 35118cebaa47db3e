#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace cortigraph::cluster {

struct ClusterAssignment {
  int k = 0;
  std::vector<int> labels;          // one per point, in [0, k)
  double wcss = 0.0;                // objective of the returned labels
  std::vector<double> wcss_curve;   // WCSS for k = 1..k_max when produced by the elbow search
  std::vector<double> wcss_trace;   // WCSS after each Lloyd iteration of the best restart
  Eigen::MatrixXd centroids;        // k x dims
};

// Lloyd's algorithm with k-means++ seeding; best of n_init restarts by WCSS.
// Points are the rows of `points`.
ClusterAssignment kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed, int n_init = 10);

// Best WCSS for each k = 1..k_max. Each k also tries the (k-1) solution plus
// its farthest point as a start, so the curve never increases.
std::vector<double> wcss_curve(const Eigen::MatrixXd& points, int k_max, std::uint64_t seed, int n_init = 10);

// Interior k (1-based curve position) farthest from the chord between the
// curve's end points; ties go to the smaller k.
int elbow_select(const std::vector<double>& curve);

// Elbow search followed by the clustering at the selected k.
ClusterAssignment elbow_kmeans(const Eigen::MatrixXd& points, int k_max, std::uint64_t seed, int n_init = 10);

struct Reordered {
  Eigen::MatrixXd matrix;
  std::vector<std::size_t> permutation;  // new position -> original index
};

// Rows and columns grouped by cluster id, stable by original index inside a cluster.
Reordered reorder_adjacency(const Eigen::MatrixXd& m, const std::vector<int>& labels);

// Applies a permutation (new position -> original index) symmetrically.
Eigen::MatrixXd permute_symmetric(const Eigen::MatrixXd& m, const std::vector<std::size_t>& permutation);

}  // namespace cortigraph::cluster
