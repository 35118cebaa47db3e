#include "cortigraph/inverse.hpp"

#include "cortigraph/error.hpp"
#include "cortigraph/preproc.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace cortigraph::inverse {

Eigen::MatrixXd InverseKernel::standardized() const {
  return s_diag.array().rsqrt().matrix().asDiagonal() * t;
}

NoiseCovariance estimate_noise_covariance(const EpochSet& x, Window window) {
  const auto r = preproc::window_samples(x.fs, x.t0_offset, x.n_samples(), window);
  const auto len = static_cast<Eigen::Index>(r.end - r.begin);
  const auto nc = static_cast<Eigen::Index>(x.n_channels());
  const std::size_t m = static_cast<std::size_t>(len) * x.n_epochs();
  if (m < 2 || m <= x.n_channels()) {
    fail(Errc::TooFewSamples, std::to_string(m) + " pooled baseline samples for " + std::to_string(nc) + " channels");
  }

  Eigen::VectorXd mean = Eigen::VectorXd::Zero(nc);
  for (const auto& e : x.epochs) mean += e.middleCols(static_cast<Eigen::Index>(r.begin), len).rowwise().sum();
  mean /= static_cast<double>(m);

  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(nc, nc);
  for (const auto& e : x.epochs) {
    const Eigen::MatrixXd d = e.middleCols(static_cast<Eigen::Index>(r.begin), len).colwise() - mean;
    c.noalias() += d * d.transpose();
  }
  c /= static_cast<double>(m - 1);
  c = 0.5 * (c + c.transpose());
  return {c, m};
}

Eigen::MatrixXd average_reference_gain(const Eigen::MatrixXd& gain) {
  return gain.rowwise() - gain.colwise().mean();
}

InverseKernel build_sloreta_kernel(const LeadfieldModel& lf, const NoiseCovariance& noise, double snr_assumed) {
  const auto nc = static_cast<Eigen::Index>(lf.n_channels());
  if (noise.c.rows() != nc || noise.c.cols() != nc) {
    fail(Errc::ChannelCountMismatch, "noise covariance is " + std::to_string(noise.c.rows()) + "x" +
                                         std::to_string(noise.c.cols()) + " for " + std::to_string(nc) + " channels");
  }
  if (!(snr_assumed > 0.0)) fail(Errc::InvalidRange, "snr_assumed must be positive");

  const Eigen::MatrixXd gain = average_reference_gain(lf.gain);
  const Eigen::MatrixXd gram = gain * gain.transpose();

  Eigen::MatrixXd c_reg = noise.c;
  double load = kDiagonalLoading * c_reg.diagonal().mean();
  if (!(load > 0.0)) load = kDiagonalLoading * std::max(gram.diagonal().mean(), 1e-300);
  c_reg.diagonal().array() += load;

  const double lambda = gram.trace() / (c_reg.trace() * snr_assumed * snr_assumed);
  const Eigen::MatrixXd system = gram + lambda * c_reg;

  // Symmetric eigendecomposition keeps the inverse accurate along the
  // near-null average-reference direction.
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(system);
  if (eig.info() != Eigen::Success) fail(Errc::SingularSystem, "eigendecomposition failed");
  const Eigen::VectorXd ev = eig.eigenvalues();
  if (!ev.allFinite() || ev.minCoeff() <= 0.0) fail(Errc::SingularSystem, "regularized system is not positive definite");
  const Eigen::MatrixXd& q = eig.eigenvectors();
  const Eigen::MatrixXd inv = q * ev.cwiseInverse().asDiagonal() * q.transpose();

  InverseKernel k;
  k.lambda = lambda;
  k.t = gain.transpose() * inv;
  k.s_diag = (k.t.array() * gain.transpose().array()).rowwise().sum();
  if (!k.t.allFinite()) fail(Errc::SingularSystem, "kernel is not finite");
  for (Eigen::Index j = 0; j < k.s_diag.size(); ++j) {
    if (!(k.s_diag(j) > 0.0)) {
      fail(Errc::NonPositiveStandardizer, "source " + std::to_string(j) + " has resolution " + std::to_string(k.s_diag(j)));
    }
  }
  return k;
}

SourceSeries apply_inverse(const Eigen::MatrixXd& epoch, double fs, double t0_offset, const InverseKernel& k) {
  if (epoch.rows() != k.t.cols()) {
    fail(Errc::ChannelCountMismatch,
         "epoch has " + std::to_string(epoch.rows()) + " channels, kernel expects " + std::to_string(k.t.cols()));
  }
  return {k.standardized() * epoch, fs, t0_offset};
}

std::vector<SourceSeries> apply_inverse(const EpochSet& x, const InverseKernel& k, Exec exec) {
  if (static_cast<Eigen::Index>(x.n_channels()) != k.t.cols()) {
    fail(Errc::ChannelCountMismatch,
         "epochs have " + std::to_string(x.n_channels()) + " channels, kernel expects " + std::to_string(k.t.cols()));
  }
  const Eigen::MatrixXd w = k.standardized();
  std::vector<SourceSeries> out(x.n_epochs());
  const auto n = static_cast<long long>(x.n_epochs());
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = {w * x.epochs[static_cast<std::size_t>(i)], x.fs, x.t0_offset};
  } else {
    for (long long i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = {w * x.epochs[static_cast<std::size_t>(i)], x.fs, x.t0_offset};
  }
  return out;
}

void zscore_columns(Eigen::MatrixXd& v, std::vector<bool>& zero_variance) {
  zero_variance.assign(static_cast<std::size_t>(v.cols()), false);
  const double n = static_cast<double>(v.rows());
  for (Eigen::Index c = 0; c < v.cols(); ++c) {
    auto col = v.col(c);
    col.array() -= col.mean();
    const double sd = std::sqrt(col.squaredNorm() / n);
    if (!(sd >= 1e-12)) {
      col.setZero();
      zero_variance[static_cast<std::size_t>(c)] = true;
    } else {
      col /= sd;
    }
  }
}

ScoutMatrix extract_scout_series(const SourceSeries& src, const LeadfieldModel& lf) {
  const auto ns = src.data.cols();
  ScoutMatrix sm;
  sm.v.resize(ns, static_cast<Eigen::Index>(lf.n_scouts()));
  sm.fs = src.fs;
  sm.t0_offset = src.t0_offset;
  for (std::size_t i = 0; i < lf.n_scouts(); ++i) {
    const auto& scout = lf.scouts[i];
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(ns);
    for (std::size_t j : scout.sources) {
      if (static_cast<Eigen::Index>(j) >= src.data.rows()) {
        fail(Errc::IndexOutOfRange, "scout '" + scout.name + "' references source " + std::to_string(j));
      }
      acc += src.data.row(static_cast<Eigen::Index>(j)).transpose();
    }
    sm.v.col(static_cast<Eigen::Index>(i)) = acc / static_cast<double>(scout.sources.size());
    sm.scout_names.push_back(scout.name);
  }
  zscore_columns(sm.v, sm.zero_variance);
  return sm;
}

ScoutMatrix merge_scouts(const ScoutMatrix& sm, const std::vector<std::string>& names, const std::string& new_name) {
  if (names.empty()) fail(Errc::EmptyInput, "no scouts to merge");
  std::set<std::string> unique;
  std::vector<Eigen::Index> cols;
  for (const auto& name : names) {
    if (!unique.insert(name).second) fail(Errc::DuplicateName, "scout '" + name + "' listed twice");
    const auto it = std::find(sm.scout_names.begin(), sm.scout_names.end(), name);
    if (it == sm.scout_names.end()) fail(Errc::UnknownScout, "no scout named '" + name + "'");
    cols.push_back(static_cast<Eigen::Index>(it - sm.scout_names.begin()));
  }
  const Eigen::Index first = *std::min_element(cols.begin(), cols.end());

  Eigen::MatrixXd merged(sm.v.rows(), 1);
  merged.setZero();
  for (auto c : cols) merged.col(0) += sm.v.col(c);
  merged /= static_cast<double>(cols.size());
  std::vector<bool> merged_flag;
  zscore_columns(merged, merged_flag);

  const std::set<Eigen::Index> drop(cols.begin(), cols.end());
  ScoutMatrix out;
  out.fs = sm.fs;
  out.t0_offset = sm.t0_offset;
  out.v.resize(sm.v.rows(), sm.v.cols() - static_cast<Eigen::Index>(cols.size()) + 1);
  Eigen::Index k = 0;
  for (Eigen::Index c = 0; c < sm.v.cols(); ++c) {
    if (c == first) {
      out.v.col(k++) = merged.col(0);
      out.scout_names.push_back(new_name);
      out.zero_variance.push_back(merged_flag[0]);
    } else if (!drop.contains(c)) {
      out.v.col(k++) = sm.v.col(c);
      out.scout_names.push_back(sm.scout_names[static_cast<std::size_t>(c)]);
      out.zero_variance.push_back(sm.zero_variance.empty() ? false : static_cast<bool>(sm.zero_variance[static_cast<std::size_t>(c)]));
    }
  }
  return out;
}

}  // namespace cortigraph::inverse
