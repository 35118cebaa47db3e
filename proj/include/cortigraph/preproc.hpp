#pragma once

#include "cortigraph/dataio.hpp"
#include "cortigraph/parallel.hpp"

#include <complex>
#include <span>
#include <vector>

namespace cortigraph::preproc {

struct FilterSpec {
  int order = 4;  // total bandpass order (even); order/2 poles per band edge
  Band band{0.5, 40.0};
};

// Direct-form II transposed biquad with a0 == 1.
struct Biquad {
  double b0, b1, b2, a1, a2;
};

using SosFilter = std::vector<Biquad>;

// Digital Butterworth bandpass as cascaded second-order sections, unit gain
// at the (prewarped) geometric band centre.
SosFilter design_butterworth_bandpass(int order, Band band, double fs);

// Complex frequency response of the cascade at frequency f (Hz).
std::complex<double> frequency_response(const SosFilter& sos, double f, double fs);

// Single forward pass starting from rest.
std::vector<double> sos_filter(const SosFilter& sos, std::span<const double> x);

// Forward-backward filtering. The series is extended by `padlen` samples of
// repeated even mirroring at each end and both passes start from rest.
std::vector<double> filtfilt(const SosFilter& sos, std::span<const double> x, std::size_t padlen);

// Padding long enough for the slowest pole's transient to die out.
std::size_t settling_samples(const SosFilter& sos);

// Zero-phase bandpass of one series; validates the band against fs.
std::vector<double> bandpass_series(std::span<const double> x, double fs, const FilterSpec& spec);

EpochSet bandpass_filter(const EpochSet& x, const FilterSpec& spec, Exec exec = Exec::parallel);

EpochSet rereference_average(const EpochSet& x);

// Sample index range [begin, end) covered by a time window of the epoch.
struct SampleRange {
  std::size_t begin, end;
};
SampleRange window_samples(double fs, double t0_offset, std::size_t n_samples, Window window);

EpochSet baseline_correct(const EpochSet& x, Window window);

}  // namespace cortigraph::preproc
