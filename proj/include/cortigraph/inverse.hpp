#pragma once

#include "cortigraph/dataio.hpp"
#include "cortigraph/parallel.hpp"

#include <string>
#include <vector>

namespace cortigraph::inverse {

struct NoiseCovariance {
  Eigen::MatrixXd c;  // n_channels x n_channels
  std::size_t n_baseline_samples = 0;
};

// Standardized minimum-norm (sLORETA) kernel.
struct InverseKernel {
  Eigen::MatrixXd t;       // n_sources x n_channels, unstandardized minimum-norm operator
  Eigen::VectorXd s_diag;  // diagonal of the resolution matrix t * gain
  double lambda = 0.0;

  // Rows of t scaled by 1 / sqrt(s_diag).
  Eigen::MatrixXd standardized() const;
};

// Source time series of one epoch: n_sources x n_samples.
struct SourceSeries {
  Eigen::MatrixXd data;
  double fs = 0.0;
  double t0_offset = 0.0;
};

// The V matrix: time x scouts, columns z-normalized.
struct ScoutMatrix {
  Eigen::MatrixXd v;  // n_samples x n_scouts
  std::vector<std::string> scout_names;
  double fs = 0.0;
  double t0_offset = 0.0;
  std::vector<bool> zero_variance;  // per column; such columns are left as zeros

  std::size_t n_scouts() const { return scout_names.size(); }
  std::size_t n_samples() const { return static_cast<std::size_t>(v.rows()); }
};

constexpr double kDiagonalLoading = 1e-10;

NoiseCovariance estimate_noise_covariance(const EpochSet& x, Window window);

// Gain columns with their channel mean removed.
Eigen::MatrixXd average_reference_gain(const Eigen::MatrixXd& gain);

InverseKernel build_sloreta_kernel(const LeadfieldModel& lf, const NoiseCovariance& noise, double snr_assumed);

std::vector<SourceSeries> apply_inverse(const EpochSet& x, const InverseKernel& k, Exec exec = Exec::parallel);

SourceSeries apply_inverse(const Eigen::MatrixXd& epoch, double fs, double t0_offset, const InverseKernel& k);

ScoutMatrix extract_scout_series(const SourceSeries& src, const LeadfieldModel& lf);

// Replaces the named columns by their re-normalized mean, placed at the
// position of the first named column.
ScoutMatrix merge_scouts(const ScoutMatrix& sm, const std::vector<std::string>& names, const std::string& new_name);

// Subtract column mean, divide by population standard deviation; columns
// with std below 1e-12 become zero and are flagged.
void zscore_columns(Eigen::MatrixXd& v, std::vector<bool>& zero_variance);

}  // namespace cortigraph::inverse
