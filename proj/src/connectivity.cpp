#include "cortigraph/connectivity.hpp"

#include "cortigraph/error.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

namespace cortigraph::connectivity {

namespace {

constexpr double kDegenerateStd = 1e-12;

}  // namespace

ConnectivityPair pearson_adjacency(const Eigen::MatrixXd& v, Exec exec) {
  const auto n = v.cols();
  const auto len = static_cast<double>(v.rows());
  Eigen::MatrixXd z = v.rowwise() - v.colwise().mean();
  ConnectivityPair cp;
  cp.degenerate.assign(static_cast<std::size_t>(n), false);
  for (Eigen::Index c = 0; c < n; ++c) {
    const double norm = z.col(c).norm();
    if (!(norm / std::sqrt(len) >= kDegenerateStd)) {
      cp.degenerate[static_cast<std::size_t>(c)] = true;
      z.col(c).setZero();
    } else {
      z.col(c) /= norm;
    }
  }

  cp.a_hat.resize(n, n);
  auto row = [&](Eigen::Index i) {
    cp.a_hat(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double r = std::clamp(z.col(i).dot(z.col(j)), -1.0, 1.0);
      cp.a_hat(i, j) = r;
      cp.a_hat(j, i) = r;
    }
  };
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic)
    for (Eigen::Index i = 0; i < n; ++i) row(i);
  } else {
    for (Eigen::Index i = 0; i < n; ++i) row(i);
  }
  return cp;
}

ConnectivityPair pearson_adjacency(const inverse::ScoutMatrix& sm, Exec exec) { return pearson_adjacency(sm.v, exec); }

ConnectivityPair pearson_adjacency_reference(const Eigen::MatrixXd& v) {
  const auto n = v.cols();
  const auto len = v.rows();
  ConnectivityPair cp;
  cp.a_hat = Eigen::MatrixXd::Identity(n, n);
  cp.degenerate.assign(static_cast<std::size_t>(n), false);
  std::vector<double> mu(static_cast<std::size_t>(n), 0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    double s = 0.0;
    for (Eigen::Index l = 0; l < len; ++l) s += v(l, i);
    mu[static_cast<std::size_t>(i)] = s / static_cast<double>(len);
    double ss = 0.0;
    for (Eigen::Index l = 0; l < len; ++l) ss += (v(l, i) - mu[static_cast<std::size_t>(i)]) * (v(l, i) - mu[static_cast<std::size_t>(i)]);
    cp.degenerate[static_cast<std::size_t>(i)] = !(std::sqrt(ss / static_cast<double>(len)) >= kDegenerateStd);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      if (cp.degenerate[static_cast<std::size_t>(i)] || cp.degenerate[static_cast<std::size_t>(j)]) {
        cp.a_hat(i, j) = 0.0;
        continue;
      }
      const double mi = mu[static_cast<std::size_t>(i)];
      const double mj = mu[static_cast<std::size_t>(j)];
      double num = 0.0, di = 0.0, dj = 0.0;
      for (Eigen::Index l = 0; l < len; ++l) {
        num += (v(l, i) - mi) * (v(l, j) - mj);
        di += (v(l, i) - mi) * (v(l, i) - mi);
        dj += (v(l, j) - mj) * (v(l, j) - mj);
      }
      cp.a_hat(i, j) = num / std::sqrt(di * dj);
    }
  }
  return cp;
}

ConnectivityPair binarize(const ConnectivityPair& cp, double rho_th) {
  if (!(rho_th >= 0.0 && rho_th <= 1.0)) fail(Errc::InvalidThreshold, "rho_th " + std::to_string(rho_th) + " outside [0, 1]");
  ConnectivityPair out = cp;
  out.rho_th = rho_th;
  const auto n = cp.a_hat.rows();
  out.a_bin = Eigen::MatrixXi::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j && cp.a_hat(i, j) >= rho_th) out.a_bin(i, j) = 1;
    }
  }
  return out;
}

PLVMatrix plv_matrix(const std::vector<PhaseSet>& epochs, std::size_t discard_edges, const std::string& band) {
  if (epochs.empty()) fail(Errc::EmptyGroup, "no epochs for PLV");
  const std::size_t n_scouts = epochs.front().size();
  if (n_scouts == 0) fail(Errc::EmptyInput, "no phase series");
  const std::size_t len = epochs.front().front().size();
  for (const auto& e : epochs) {
    if (e.size() != n_scouts) fail(Errc::LengthMismatch, "epochs differ in scout count");
    for (const auto& s : e) {
      if (s.size() != len) fail(Errc::LengthMismatch, "phase series differ in length");
    }
  }
  if (len <= 2 * discard_edges) fail(Errc::LengthMismatch, "no samples left after discarding edges");
  const std::size_t t0 = discard_edges;
  const std::size_t t1 = len - discard_edges;
  const double count = static_cast<double>(t1 - t0);

  const auto n = static_cast<Eigen::Index>(n_scouts);
  PLVMatrix out;
  out.band = band;
  out.plv = Eigen::MatrixXd::Zero(n, n);
  std::vector<std::vector<std::complex<double>>> phasor(n_scouts, std::vector<std::complex<double>>(t1 - t0));
  for (const auto& e : epochs) {
    for (std::size_t s = 0; s < n_scouts; ++s) {
      for (std::size_t t = t0; t < t1; ++t) phasor[s][t - t0] = std::polar(1.0, e[s][t]);
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i + 1; j < n; ++j) {
        std::complex<double> acc{0.0, 0.0};
        const auto& pi = phasor[static_cast<std::size_t>(i)];
        const auto& pj = phasor[static_cast<std::size_t>(j)];
        for (std::size_t t = 0; t < pi.size(); ++t) acc += pi[t] * std::conj(pj[t]);
        out.plv(i, j) += std::min(std::abs(acc) / count, 1.0);
      }
    }
  }
  out.plv /= static_cast<double>(epochs.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    out.plv(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) out.plv(j, i) = out.plv(i, j);
  }
  return out;
}

PLVMatrix plv_matrix(const PhaseSet& phases, std::size_t discard_edges, const std::string& band) {
  return plv_matrix(std::vector<PhaseSet>{phases}, discard_edges, band);
}

ZMatrix fisher_z(const Eigen::MatrixXd& r) {
  ZMatrix out;
  out.z = r.unaryExpr([](double v) { return std::atanh(std::clamp(v, -kFisherClamp, kFisherClamp)); });
  out.z.diagonal().setZero();
  return out;
}

ZMatrix fisher_z(const ConnectivityPair& cp) { return fisher_z(cp.a_hat); }

Eigen::MatrixXd group_average(const std::vector<Eigen::MatrixXd>& items) {
  if (items.empty()) fail(Errc::EmptyGroup, "nothing to average");
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(items.front().rows(), items.front().cols());
  for (const auto& m : items) {
    if (m.rows() != acc.rows() || m.cols() != acc.cols()) fail(Errc::ShapeMismatch, "matrices differ in shape");
    acc += m;
  }
  return acc / static_cast<double>(items.size());
}

inverse::ScoutMatrix average_scout_series(const std::vector<inverse::ScoutMatrix>& items) {
  if (items.empty()) fail(Errc::EmptyGroup, "nothing to average");
  std::vector<Eigen::MatrixXd> mats;
  mats.reserve(items.size());
  for (const auto& s : items) {
    if (s.scout_names != items.front().scout_names) fail(Errc::ShapeMismatch, "scout layouts differ");
    mats.push_back(s.v);
  }
  inverse::ScoutMatrix out;
  out.v = group_average(mats);
  out.scout_names = items.front().scout_names;
  out.fs = items.front().fs;
  out.t0_offset = items.front().t0_offset;
  inverse::zscore_columns(out.v, out.zero_variance);
  return out;
}

std::vector<ConnectivityPair> pearson_batch(const std::vector<inverse::ScoutMatrix>& items, Exec exec) {
  std::vector<ConnectivityPair> out(items.size());
  const auto n = static_cast<long long>(items.size());
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = pearson_adjacency(items[static_cast<std::size_t>(i)].v, Exec::serial);
  } else {
    for (long long i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = pearson_adjacency(items[static_cast<std::size_t>(i)].v, Exec::serial);
  }
  return out;
}

}  // namespace cortigraph::connectivity
