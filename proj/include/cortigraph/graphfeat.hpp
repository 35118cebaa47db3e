#pragma once

#include "cortigraph/parallel.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace cortigraph::graphfeat {

// Undirected simple graph; adjacency is symmetric 0/1 with zero diagonal.
class Graph {
 public:
  Graph() = default;
  explicit Graph(const Eigen::MatrixXi& adj, std::vector<std::string> names = {});

  std::size_t n() const { return neighbours_.size(); }
  const Eigen::MatrixXi& adjacency() const { return adj_; }
  const std::vector<std::size_t>& neighbours(std::size_t u) const { return neighbours_[u]; }
  std::size_t degree(std::size_t u) const { return neighbours_[u].size(); }
  std::size_t edge_count() const;
  const std::vector<std::string>& names() const { return names_; }
  bool connected_ignoring_isolated() const;

 private:
  Eigen::MatrixXi adj_;
  std::vector<std::vector<std::size_t>> neighbours_;
  std::vector<std::string> names_;
};

Eigen::VectorXd degree_centrality(const Graph& g);

// Normalized by 2 / ((N-1)(N-2)); unordered source/target pairs.
Eigen::VectorXd betweenness_centrality(const Graph& g);

struct EigenvectorResult {
  Eigen::VectorXd values;
  std::size_t iterations = 0;
  bool converged = false;
  bool disconnected = false;
};

// Power iteration from the uniform vector; unit Euclidean norm, non-negative.
EigenvectorResult eigenvector_centrality(const Graph& g, double tol = 1e-10, std::size_t max_iter = 10000);

// Component-scaled closeness: ((r-1)/sum d) * ((r-1)/(N-1)), r = reachable count including u.
Eigen::VectorXd closeness_centrality(const Graph& g);

// 2 T(u) / (deg(u)(deg(u)-1)); 0 when deg(u) < 2.
Eigen::VectorXd clustering_coefficient(const Graph& g);

inline constexpr std::size_t kFeatureKinds = 5;
inline constexpr const char* kFeatureNames[kFeatureKinds] = {"degree", "betweenness", "eigenvector", "closeness",
                                                             "clustering"};

struct FeatureVector {
  Eigen::VectorXd values;  // [degree x n, betweenness x n, eigenvector x n, closeness x n, clustering x n]
  std::string group;
  std::string stimulus;
  std::vector<std::string> warnings;
};

FeatureVector assemble_features(const Graph& g);

// Feature extraction for a batch of binary adjacency matrices.
std::vector<FeatureVector> assemble_batch(const std::vector<Eigen::MatrixXi>& graphs, Exec exec = Exec::parallel);

// Column labels "degree:<name>", ... matching the FeatureVector layout.
std::vector<std::string> feature_labels(const std::vector<std::string>& node_names);

}  // namespace cortigraph::graphfeat
