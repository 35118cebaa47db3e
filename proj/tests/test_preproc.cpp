#include "cortigraph/error.hpp"
#include "cortigraph/preproc.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <numbers>
#include <random>

using namespace cortigraph;
using namespace cortigraph::preproc;

namespace {

std::vector<double> tone(double f, double fs, std::size_t n, double phase = 0.0) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = std::sin(2.0 * std::numbers::pi * f * double(i) / fs + phase);
  return x;
}

double rms(const std::vector<double>& x, std::size_t from, std::size_t to) {
  double s = 0;
  for (std::size_t i = from; i < to; ++i) s += x[i] * x[i];
  return std::sqrt(s / double(to - from));
}

EpochSet one_epoch(const Eigen::MatrixXd& m) {
  EpochSet s;
  s.fs = 500.0;
  s.t0_offset = -0.5;
  s.stimulus = "A";
  s.group = "M";
  s.epochs = {m};
  return s;
}

}  // namespace

TEST_CASE("10 Hz tone passes like an ideal filter") {
  const double fs = 500.0;
  const std::size_t n = 700;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  auto x = tone(10.0, fs, n);
  const auto y = bandpass_series(x, fs, {4, {0.5, 40.0}});
  const auto ideal = oracle::ideal_bandpass(x, fs, 0.5, 40.0);
  const std::size_t edge = n / 10;
  CHECK(oracle::correlation(y, ideal, edge, n - edge) > 0.999);
  CHECK(oracle::correlation(y, x, edge, n - edge) > 0.999);
}

TEST_CASE("100 Hz tone is rejected") {
  const auto x = tone(100.0, 500.0, 700);
  const auto y = bandpass_series(x, 500.0, {4, {0.5, 40.0}});
  CHECK(rms(y, 0, y.size()) < 0.05 * rms(x, 0, x.size()));
}

TEST_CASE("zero in, zero out; linear") {
  const std::vector<double> zero(700, 0.0);
  for (double v : bandpass_series(zero, 500.0, {})) CHECK(v == 0.0);

  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd;
  std::vector<double> a(700), b(700), mix(700);
  for (std::size_t i = 0; i < 700; ++i) {
    a[i] = nd(rng);
    b[i] = nd(rng);
    mix[i] = 2.0 * a[i] - 0.5 * b[i];
  }
  const auto fa = bandpass_series(a, 500.0, {});
  const auto fb = bandpass_series(b, 500.0, {});
  const auto fm = bandpass_series(mix, 500.0, {});
  for (std::size_t i = 0; i < 700; ++i) CHECK(fm[i] == doctest::Approx(2.0 * fa[i] - 0.5 * fb[i]).epsilon(1e-9));
}

TEST_CASE("forward-backward filtering has no lag") {
  const double fs = 500.0;
  const auto x = tone(12.0, fs, 1000);
  const auto y = bandpass_series(x, fs, {4, {8.0, 16.0}});
  int best_lag = 99;
  double best = -1e9;
  for (int lag = -10; lag <= 10; ++lag) {
    double s = 0;
    for (std::size_t i = 200; i < 800; ++i) s += x[i] * y[std::size_t(int(i) + lag)];
    if (s > best) {
      best = s;
      best_lag = lag;
    }
  }
  CHECK(best_lag == 0);
}

TEST_CASE("Butterworth response: unit gain at centre, half power at the band edges") {
  const double fs = 500.0;
  for (int order : {2, 4, 8}) {
    const auto sos = design_butterworth_bandpass(order, {8.0, 13.0}, fs);
    CHECK(std::abs(frequency_response(sos, 8.0, fs)) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-6));
    CHECK(std::abs(frequency_response(sos, 13.0, fs)) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-6));
    const double centre = std::atan(std::sqrt(std::tan(std::numbers::pi * 8.0 / fs) * std::tan(std::numbers::pi * 13.0 / fs))) * fs /
                          std::numbers::pi;
    CHECK(std::abs(frequency_response(sos, centre, fs)) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("filter argument checks") {
  const auto x = tone(10.0, 500.0, 700);
  CHECK_THROWS_AS(bandpass_series(x, 500.0, {4, {0.5, 300.0}}), Error);
  try {
    bandpass_series(x, 500.0, {4, {30.0, 20.0}});
    FAIL("expected BandOutOfRange");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::BandOutOfRange);
  }
  try {
    bandpass_series(std::vector<double>(10, 1.0), 500.0, {});
    FAIL("expected TooShortSignal");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::TooShortSignal);
  }
}

TEST_CASE("serial and parallel epoch filtering agree exactly") {
  Eigen::MatrixXd m = Eigen::MatrixXd::Random(31, 700);
  auto s = one_epoch(m);
  s.epochs.push_back(m * 0.5);
  const auto a = bandpass_filter(s, {}, Exec::serial);
  const auto b = bandpass_filter(s, {}, Exec::parallel);
  CHECK(a.epochs[0] == b.epochs[0]);
  CHECK(a.epochs[1] == b.epochs[1]);
}

TEST_CASE("average reference") {
  Eigen::MatrixXd m(2, 3);
  m << 1, 1, 1, 3, 3, 3;
  const auto r = rereference_average(one_epoch(m));
  Eigen::MatrixXd expect(2, 3);
  expect << -1, -1, -1, 1, 1, 1;
  CHECK(r.epochs[0] == expect);

  Eigen::MatrixXd rnd = Eigen::MatrixXd::Random(31, 700);
  const auto once = rereference_average(one_epoch(rnd));
  CHECK(once.epochs[0].colwise().sum().cwiseAbs().maxCoeff() < 1e-9);
  const auto twice = rereference_average(once);
  CHECK((twice.epochs[0] - once.epochs[0]).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("baseline correction") {
  const Eigen::MatrixXd five = Eigen::MatrixXd::Constant(4, 700, 5.0);
  CHECK(baseline_correct(one_epoch(five), {-0.5, 0.0}).epochs[0].cwiseAbs().maxCoeff() == 0.0);

  Eigen::MatrixXd rnd = Eigen::MatrixXd::Random(31, 700).array() + 3.0;
  const auto out = baseline_correct(one_epoch(rnd), {-0.5, 0.0});
  const auto r = window_samples(500.0, -0.5, 700, {-0.5, 0.0});
  CHECK(r.begin == 0);
  CHECK(r.end == 250);
  CHECK(out.epochs[0].leftCols(250).rowwise().mean().cwiseAbs().maxCoeff() < 1e-12);

  try {
    baseline_correct(one_epoch(rnd), {1.0, 2.0});
    FAIL("expected WindowOutsideEpoch");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::WindowOutsideEpoch);
  }
}
