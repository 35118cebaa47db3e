#include "cortigraph/timefreq.hpp"

#include "cortigraph/error.hpp"
#include "cortigraph/preproc.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <numbers>

namespace cortigraph::timefreq {

namespace {

using cplx = std::complex<double>;

double wrap_phase(double a) { return a <= -std::numbers::pi ? a + 2.0 * std::numbers::pi : a; }

void check_spec(const MorletSpec& spec, double fs) {
  if (!(spec.fc > 0.0) || !(spec.fwhm_t > 0.0)) fail(Errc::InvalidRange, "wavelet fc and fwhm must be positive");
  if (spec.freqs.empty()) fail(Errc::InvalidRange, "no analysis frequencies");
  for (std::size_t i = 0; i < spec.freqs.size(); ++i) {
    const double f = spec.freqs[i];
    if (!(f > 0.0) || !(f < fs / 2.0)) fail(Errc::InvalidRange, "frequency " + std::to_string(f) + " outside (0, fs/2)");
    if (i > 0 && !(f > spec.freqs[i - 1])) fail(Errc::InvalidRange, "frequencies must be strictly increasing");
  }
}

}  // namespace

std::vector<double> frequency_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !(lo <= hi)) fail(Errc::InvalidRange, "bad frequency grid");
  std::vector<double> f;
  for (std::size_t i = 0;; ++i) {
    const double v = lo + static_cast<double>(i) * step;
    if (v > hi + 1e-9 * step) break;
    f.push_back(v);
  }
  return f;
}

double wavelet_sigma(const MorletSpec& spec, double f) {
  const double sigma_fc = spec.fwhm_t / (2.0 * std::sqrt(2.0 * std::numbers::ln2));
  return sigma_fc * spec.fc / f;
}

TFMap morlet_transform(std::span<const double> x, double fs, double t0_offset, const MorletSpec& spec, Exec exec) {
  check_spec(spec, fs);
  const std::size_t n = x.size();
  const double support = 6.0 * wavelet_sigma(spec, spec.freqs.front());
  if (static_cast<double>(n) < 2.0 * support * fs) {
    fail(Errc::SeriesTooShort, std::to_string(n) + " samples; the " + std::to_string(spec.freqs.front()) +
                                   " Hz wavelet needs at least " + std::to_string(2.0 * support * fs));
  }

  const auto nf = spec.freqs.size();
  TFMap tf;
  tf.power.resize(static_cast<Eigen::Index>(nf), static_cast<Eigen::Index>(n));
  tf.phase.resize(static_cast<Eigen::Index>(nf), static_cast<Eigen::Index>(n));
  tf.freqs = spec.freqs;
  tf.fs = fs;
  tf.t0_offset = t0_offset;
  tf.valid_begin.resize(nf);
  tf.valid_end.resize(nf);
  tf.zero_variance.assign(nf, false);

  auto row = [&](long long fi) {
    const auto r = static_cast<std::size_t>(fi);
    const double f = spec.freqs[r];
    const double sigma = wavelet_sigma(spec, f);
    const auto half = static_cast<long long>(std::ceil(3.0 * sigma * fs));

    // Gaussian envelope scaled to unit sum: a complex tone at f passes with gain 1.
    std::vector<cplx> psi(static_cast<std::size_t>(2 * half + 1));
    double norm = 0.0;
    for (long long k = -half; k <= half; ++k) {
      const double t = static_cast<double>(k) / fs;
      const double g = std::exp(-t * t / (2.0 * sigma * sigma));
      norm += g;
      psi[static_cast<std::size_t>(k + half)] = g * std::polar(1.0, 2.0 * std::numbers::pi * f * t);
    }
    for (auto& p : psi) p /= norm;

    const auto len = static_cast<long long>(n);
    for (long long t = 0; t < len; ++t) {
      cplx acc{0.0, 0.0};
      const long long k_lo = std::max(-half, t - len + 1);
      const long long k_hi = std::min(half, t);
      for (long long k = k_lo; k <= k_hi; ++k) acc += x[static_cast<std::size_t>(t - k)] * psi[static_cast<std::size_t>(k + half)];
      tf.power(static_cast<Eigen::Index>(r), t) = std::norm(acc);
      tf.phase(static_cast<Eigen::Index>(r), t) = wrap_phase(std::arg(acc));
    }
    const auto edge = std::min(static_cast<std::size_t>(std::ceil(2.0 * sigma * fs)), n / 2);
    tf.valid_begin[r] = edge;
    tf.valid_end[r] = n - edge;
  };

  const auto nfl = static_cast<long long>(nf);
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic)
    for (long long fi = 0; fi < nfl; ++fi) row(fi);
  } else {
    for (long long fi = 0; fi < nfl; ++fi) row(fi);
  }
  return tf;
}

TFMap zscore_normalize(const TFMap& tf, Window baseline) {
  const auto r = preproc::window_samples(tf.fs, tf.t0_offset, static_cast<std::size_t>(tf.power.cols()), baseline);
  const auto len = static_cast<Eigen::Index>(r.end - r.begin);
  TFMap out = tf;
  out.zero_variance.assign(tf.freqs.size(), false);
  for (Eigen::Index f = 0; f < tf.power.rows(); ++f) {
    const auto base = tf.power.row(f).segment(static_cast<Eigen::Index>(r.begin), len);
    const double mean = base.mean();
    const double sd = std::sqrt((base.array() - mean).square().sum() / static_cast<double>(len));
    if (!(sd > 1e-12 * std::max(std::abs(mean), 1e-300))) {
      out.power.row(f).setZero();
      out.zero_variance[static_cast<std::size_t>(f)] = true;
    } else {
      out.power.row(f) = (tf.power.row(f).array() - mean) / sd;
    }
  }
  return out;
}

std::vector<double> band_power(const TFMap& tf, Band band) {
  std::vector<Eigen::Index> rows;
  for (std::size_t i = 0; i < tf.freqs.size(); ++i) {
    if (tf.freqs[i] >= band.first - 1e-9 && tf.freqs[i] <= band.second + 1e-9) rows.push_back(static_cast<Eigen::Index>(i));
  }
  if (rows.empty()) {
    fail(Errc::EmptyBand, "no analysis frequency in (" + std::to_string(band.first) + ", " + std::to_string(band.second) + ")");
  }
  Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(tf.power.cols());
  for (auto r : rows) acc += tf.power.row(r);
  acc /= static_cast<double>(rows.size());
  return {acc.data(), acc.data() + acc.size()};
}

std::vector<cplx> analytic_signal(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  std::vector<cplx> in(x.begin(), x.end());
  std::vector<cplx> spec;
  Eigen::FFT<double> fft;
  fft.fwd(spec, in);
  // Keep DC (and Nyquist for even n), double positive frequencies, drop negative ones.
  for (std::size_t k = 1; k < n; ++k) {
    if (2 * k < n) spec[k] *= 2.0;
    else if (2 * k > n) spec[k] = 0.0;
  }
  std::vector<cplx> out;
  fft.inv(out, spec);
  return out;
}

std::vector<double> band_phase(std::span<const double> x, double fs, Band band, int order) {
  const auto filtered = preproc::bandpass_series(x, fs, {order, band});
  const auto z = analytic_signal(filtered);
  std::vector<double> phase(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) phase[i] = wrap_phase(std::arg(z[i]));
  return phase;
}

}  // namespace cortigraph::timefreq
