#pragma once

#include "cortigraph/inverse.hpp"
#include "cortigraph/parallel.hpp"

#include <string>
#include <vector>

namespace cortigraph::connectivity {

// Weighted Pearson adjacency and its thresholded binary graph.
struct ConnectivityPair {
  Eigen::MatrixXd a_hat;  // symmetric, unit diagonal, entries in [-1, 1]
  Eigen::MatrixXi a_bin;  // empty until binarize(); symmetric 0/1, zero diagonal
  double rho_th = 0.0;
  std::vector<bool> degenerate;  // columns with std < 1e-12; their off-diagonal entries are 0
};

struct ZMatrix {
  Eigen::MatrixXd z;  // symmetric, zero diagonal
};

struct PLVMatrix {
  Eigen::MatrixXd plv;  // symmetric in [0, 1], unit diagonal
  std::string band;
};

// Phase series of every scout in one epoch: [scout][sample].
using PhaseSet = std::vector<std::vector<double>>;

constexpr double kFisherClamp = 1.0 - 1e-12;

// Pearson correlation between the columns of v (time x scouts).
ConnectivityPair pearson_adjacency(const Eigen::MatrixXd& v, Exec exec = Exec::parallel);
ConnectivityPair pearson_adjacency(const inverse::ScoutMatrix& sm, Exec exec = Exec::parallel);

// Literal double-loop evaluation of the correlation sum; slow, kept as the reference.
ConnectivityPair pearson_adjacency_reference(const Eigen::MatrixXd& v);

// a_bin(i,j) = 1 iff i != j and a_hat(i,j) >= rho_th (signed, inclusive).
ConnectivityPair binarize(const ConnectivityPair& cp, double rho_th);

// Per-epoch PLV over samples [discard_edges, n - discard_edges), averaged over epochs.
PLVMatrix plv_matrix(const std::vector<PhaseSet>& epochs, std::size_t discard_edges, const std::string& band = "");
PLVMatrix plv_matrix(const PhaseSet& phases, std::size_t discard_edges, const std::string& band = "");

ZMatrix fisher_z(const ConnectivityPair& cp);
ZMatrix fisher_z(const Eigen::MatrixXd& r);

// Element-wise mean in input order.
Eigen::MatrixXd group_average(const std::vector<Eigen::MatrixXd>& items);

// Mean of per-epoch scout matrices (the epoch-averaged series), re-normalized per column.
inverse::ScoutMatrix average_scout_series(const std::vector<inverse::ScoutMatrix>& items);

// Per-epoch Pearson adjacency for a batch.
std::vector<ConnectivityPair> pearson_batch(const std::vector<inverse::ScoutMatrix>& items, Exec exec = Exec::parallel);

}  // namespace cortigraph::connectivity
