#include "cortigraph/preproc.hpp"

#include "cortigraph/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace cortigraph::preproc {

namespace {

using cplx = std::complex<double>;

void run_cascade(const SosFilter& sos, std::vector<double>& x, std::vector<std::array<double, 2>> state) {
  for (std::size_t i = 0; i < sos.size(); ++i) {
    const auto& s = sos[i];
    double z1 = state[i][0];
    double z2 = state[i][1];
    for (double& v : x) {
      const double in = v;
      const double y = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * y + z2;
      z2 = s.b2 * in - s.a2 * y;
      v = y;
    }
  }
}

void check_band(Band band, double fs) {
  if (!(band.first > 0.0) || !(band.first < band.second) || !(band.second < fs / 2.0)) {
    fail(Errc::BandOutOfRange, "band (" + std::to_string(band.first) + ", " + std::to_string(band.second) +
                                   ") invalid for fs " + std::to_string(fs));
  }
}

}  // namespace

SosFilter design_butterworth_bandpass(int order, Band band, double fs) {
  if (order < 2 || order % 2 != 0) fail(Errc::InvalidRange, "filter order must be even and >= 2");
  check_band(band, fs);
  const int n = order / 2;
  const double pi = std::numbers::pi;
  const double w1 = 2.0 * fs * std::tan(pi * band.first / fs);
  const double w2 = 2.0 * fs * std::tan(pi * band.second / fs);
  const double w0 = std::sqrt(w1 * w2);
  const double bw = w2 - w1;

  std::vector<cplx> poles;
  for (int k = 0; k < n; ++k) {
    const cplx p = std::polar(1.0, pi * (2.0 * k + n + 1.0) / (2.0 * n));
    const cplx a = p * bw / 2.0;
    const cplx d = std::sqrt(a * a - w0 * w0);
    for (const cplx s : {a + d, a - d}) poles.push_back((2.0 * fs + s) / (2.0 * fs - s));
  }

  // Pair conjugates; real poles are paired among themselves.
  std::vector<cplx> upper;
  std::vector<double> real;
  for (const auto& z : poles) {
    if (std::abs(z.imag()) <= 1e-12 * std::abs(z)) real.push_back(z.real());
    else if (z.imag() > 0.0) upper.push_back(z);
  }
  std::sort(upper.begin(), upper.end(), [](cplx a, cplx b) { return std::arg(a) < std::arg(b); });
  std::sort(real.begin(), real.end());

  SosFilter sos;
  for (const auto& z : upper) sos.push_back({1.0, 0.0, -1.0, -2.0 * z.real(), std::norm(z)});
  for (std::size_t i = 0; i + 1 < real.size(); i += 2) {
    sos.push_back({1.0, 0.0, -1.0, -(real[i] + real[i + 1]), real[i] * real[i + 1]});
  }

  const double centre = fs / pi * std::atan(w0 / (2.0 * fs));
  const double g = std::abs(frequency_response(sos, centre, fs));
  sos.front().b0 /= g;
  sos.front().b1 /= g;
  sos.front().b2 /= g;
  return sos;
}

std::complex<double> frequency_response(const SosFilter& sos, double f, double fs) {
  const cplx zinv = std::polar(1.0, -2.0 * std::numbers::pi * f / fs);
  cplx h{1.0, 0.0};
  for (const auto& s : sos) {
    h *= (s.b0 + s.b1 * zinv + s.b2 * zinv * zinv) / (1.0 + s.a1 * zinv + s.a2 * zinv * zinv);
  }
  return h;
}

std::vector<double> sos_filter(const SosFilter& sos, std::span<const double> x) {
  std::vector<double> y(x.begin(), x.end());
  run_cascade(sos, y, std::vector<std::array<double, 2>>(sos.size(), {0.0, 0.0}));
  return y;
}

std::vector<double> filtfilt(const SosFilter& sos, std::span<const double> x, std::size_t padlen) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  if (n < 2) fail(Errc::TooShortSignal, "need at least two samples");

  // Even mirror extension, repeated as often as needed: the padded signal is
  // continuous and has the same spectrum as the epoch, so the start-up
  // transient decays inside the padding.
  const auto period = static_cast<long long>(2 * n - 2);
  auto mirrored = [&](long long i) {
    long long k = i % period;
    if (k < 0) k += period;
    return k < static_cast<long long>(n) ? x[static_cast<std::size_t>(k)] : x[static_cast<std::size_t>(period - k)];
  };
  const auto pad = static_cast<long long>(padlen);
  std::vector<double> ext;
  ext.reserve(n + 2 * padlen);
  for (long long i = -pad; i < static_cast<long long>(n) + pad; ++i) ext.push_back(mirrored(i));

  const std::vector<std::array<double, 2>> rest(sos.size(), {0.0, 0.0});
  run_cascade(sos, ext, rest);
  std::reverse(ext.begin(), ext.end());
  run_cascade(sos, ext, rest);
  std::reverse(ext.begin(), ext.end());
  return {ext.begin() + static_cast<std::ptrdiff_t>(padlen), ext.end() - static_cast<std::ptrdiff_t>(padlen)};
}

std::size_t settling_samples(const SosFilter& sos) {
  double slowest = 0.0;
  for (const auto& s : sos) {
    // Roots of z^2 + a1 z + a2.
    const cplx d = std::sqrt(cplx(s.a1 * s.a1 - 4.0 * s.a2, 0.0));
    slowest = std::max({slowest, std::abs((-s.a1 + d) / 2.0), std::abs((-s.a1 - d) / 2.0)});
  }
  if (!(slowest < 1.0)) fail(Errc::InvalidRange, "filter is not stable");
  if (slowest == 0.0) return 1;
  // Eight time constants of the slowest pole: the transient falls below 3.4e-4.
  return static_cast<std::size_t>(std::ceil(8.0 / -std::log(slowest)));
}

std::vector<double> bandpass_series(std::span<const double> x, double fs, const FilterSpec& spec) {
  const auto sos = design_butterworth_bandpass(spec.order, spec.band, fs);
  if (x.size() <= 3 * static_cast<std::size_t>(spec.order + 1)) {
    fail(Errc::TooShortSignal, std::to_string(x.size()) + " samples is too short for order " + std::to_string(spec.order));
  }
  return filtfilt(sos, x, settling_samples(sos));
}

EpochSet bandpass_filter(const EpochSet& x, const FilterSpec& spec, Exec exec) {
  const auto sos = design_butterworth_bandpass(spec.order, spec.band, x.fs);
  const std::size_t ns = x.n_samples();
  if (ns <= 3 * static_cast<std::size_t>(spec.order + 1)) {
    fail(Errc::TooShortSignal, std::to_string(ns) + " samples is too short for order " + std::to_string(spec.order));
  }
  const std::size_t padlen = settling_samples(sos);

  EpochSet out = x;
  const auto nc = static_cast<long long>(x.n_channels());
  const auto total = static_cast<long long>(x.n_epochs()) * nc;
  auto work = [&](long long k) {
    const auto e = static_cast<std::size_t>(k / nc);
    const auto c = static_cast<Eigen::Index>(k % nc);
    const Eigen::RowVectorXd row = x.epochs[e].row(c);
    const auto y = filtfilt(sos, std::span<const double>(row.data(), ns), padlen);
    out.epochs[e].row(c) = Eigen::Map<const Eigen::RowVectorXd>(y.data(), static_cast<Eigen::Index>(ns));
  };
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (long long k = 0; k < total; ++k) work(k);
  } else {
    for (long long k = 0; k < total; ++k) work(k);
  }
  return out;
}

EpochSet rereference_average(const EpochSet& x) {
  if (x.n_channels() < 2) fail(Errc::InvalidRange, "average reference needs at least 2 channels");
  EpochSet out = x;
  for (auto& e : out.epochs) e.rowwise() -= e.colwise().mean();
  return out;
}

SampleRange window_samples(double fs, double t0_offset, std::size_t n_samples, Window window) {
  constexpr double eps = 1e-9;
  const double end_time = t0_offset + static_cast<double>(n_samples) / fs;
  if (!(window.first < window.second) || window.first < t0_offset - eps || window.second > end_time + eps) {
    fail(Errc::WindowOutsideEpoch, "window (" + std::to_string(window.first) + ", " + std::to_string(window.second) +
                                       ") outside epoch [" + std::to_string(t0_offset) + ", " +
                                       std::to_string(end_time) + "]");
  }
  // Half-open in time: sample k at t0 + k/fs belongs when start <= t < end.
  auto index = [&](double t) {
    const double k = std::ceil((t - t0_offset) * fs - eps);
    return static_cast<std::size_t>(std::clamp(k, 0.0, static_cast<double>(n_samples)));
  };
  SampleRange r{index(window.first), index(window.second)};
  if (r.end <= r.begin) fail(Errc::WindowOutsideEpoch, "window covers no samples");
  return r;
}

EpochSet baseline_correct(const EpochSet& x, Window window) {
  const auto r = window_samples(x.fs, x.t0_offset, x.n_samples(), window);
  const auto len = static_cast<Eigen::Index>(r.end - r.begin);
  EpochSet out = x;
  for (auto& e : out.epochs) {
    const Eigen::VectorXd mean = e.middleCols(static_cast<Eigen::Index>(r.begin), len).rowwise().mean();
    e.colwise() -= mean;
  }
  return out;
}

}  // namespace cortigraph::preproc
