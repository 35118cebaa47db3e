#pragma once

#include "cortigraph/dataio.hpp"
#include "cortigraph/parallel.hpp"

#include <complex>
#include <span>
#include <vector>

namespace cortigraph::timefreq {

struct MorletSpec {
  double fc = 1.0;      // centre frequency of the mother wavelet (Hz)
  double fwhm_t = 1.0;  // temporal FWHM at fc (s)
  std::vector<double> freqs;
};

// Evenly spaced grid lo, lo+step, ... up to hi inclusive.
std::vector<double> frequency_grid(double lo, double hi, double step);

// Temporal standard deviation of the wavelet used at frequency f.
double wavelet_sigma(const MorletSpec& spec, double f);

struct TFMap {
  Eigen::MatrixXd power;  // n_freqs x n_samples
  Eigen::MatrixXd phase;  // radians in (-pi, pi]
  std::vector<double> freqs;
  double fs = 0.0;
  double t0_offset = 0.0;
  // Per frequency row, the samples further than 2 sigma from either edge.
  std::vector<std::size_t> valid_begin, valid_end;
  // Rows whose baseline variance vanished during z-scoring.
  std::vector<bool> zero_variance;
};

TFMap morlet_transform(std::span<const double> x, double fs, double t0_offset, const MorletSpec& spec,
                       Exec exec = Exec::parallel);

TFMap zscore_normalize(const TFMap& tf, Window baseline);

std::vector<double> band_power(const TFMap& tf, Band band);

// Analytic signal through the frequency-domain Hilbert construction.
std::vector<std::complex<double>> analytic_signal(std::span<const double> x);

// Zero-phase bandpass (order `order`) followed by the analytic-signal phase.
std::vector<double> band_phase(std::span<const double> x, double fs, Band band, int order = 4);

}  // namespace cortigraph::timefreq
