#include "cortigraph/stats.hpp"

#include "cortigraph/error.hpp"

#include <json.hpp>

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace cortigraph::stats {

namespace {

double simpson(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
                double whole, double eps, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson(a, m, fa, flm, fm);
  const double right = simpson(m, b, fm, frm, fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * eps) return left + right + delta / 15.0;
  return adaptive(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1) +
         adaptive(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double eps) {
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  return adaptive(f, a, b, fa, fm, fb, simpson(a, b, fa, fm, fb), eps, 50);
}

}  // namespace

double student_t_pdf(double x, double df) {
  const double log_norm = std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df) - 0.5 * std::log(df * std::numbers::pi);
  return std::exp(log_norm - 0.5 * (df + 1.0) * std::log1p(x * x / df));
}

double student_t_cdf(double x, double df) {
  if (!(df > 0.0)) fail(Errc::InvalidRange, "degrees of freedom must be positive");
  if (x == 0.0) return 0.5;
  const auto pdf = [df](double u) { return student_t_pdf(u, df); };
  const double ax = std::abs(x);
  // Split [0, |x|] so that far tails do not starve the core of refinement.
  double mass = 0.0;
  double lo = 0.0;
  for (double hi : {1.0, 4.0, 16.0, 64.0, 256.0, 1024.0}) {
    const double end = std::min(hi, ax);
    if (end > lo) mass += integrate(pdf, lo, end, 1e-13);
    lo = end;
    if (lo >= ax) break;
  }
  if (ax > lo) mass += integrate(pdf, lo, ax, 1e-13);
  mass = std::min(mass, 0.5);
  return x > 0.0 ? 0.5 + mass : 0.5 - mass;
}

GroupStats paired_t_test(std::span<const double> a, std::span<const double> b, Tail tail, std::string label) {
  if (a.size() != b.size()) fail(Errc::LengthMismatch, "paired samples differ in length");
  if (a.size() < 2) fail(Errc::LengthMismatch, "paired t-test needs at least 2 pairs");
  const auto n = a.size();
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
  double mean = 0.0;
  for (double v : d) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : d) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));

  GroupStats s;
  s.df = static_cast<double>(n - 1);
  s.mean_diff = mean;
  s.tail = tail;
  s.label = std::move(label);
  const double scale = std::max(std::abs(mean), 1.0);
  if (sd <= 1e-14 * scale) {
    bool all_zero = true;
    for (double v : d) all_zero = all_zero && v == 0.0;
    if (!all_zero) fail(Errc::DegenerateVariance, "paired differences are constant and nonzero");
    s.t = 0.0;
    s.p = tail == Tail::two ? 1.0 : 0.5;
    s.degenerate = true;
    return s;
  }
  s.t = mean / (sd / std::sqrt(static_cast<double>(n)));
  const double upper = 1.0 - student_t_cdf(std::abs(s.t), s.df);
  s.p = tail == Tail::two ? 2.0 * upper : upper;
  return s;
}

double activation_difference_auc(std::span<const double> a, std::span<const double> b, double fs) {
  if (a.size() != b.size()) fail(Errc::LengthMismatch, "series differ in length");
  if (!(fs > 0.0)) fail(Errc::InvalidRange, "sampling rate must be positive");
  if (a.size() < 2) return 0.0;
  double area = 0.0;
  for (std::size_t i = 0; i + 1 < a.size(); ++i) area += 0.5 * (std::abs(a[i] - b[i]) + std::abs(a[i + 1] - b[i + 1]));
  return area / fs;
}

double activation_difference_auc(const Eigen::MatrixXd& group_a, const Eigen::MatrixXd& group_b, double fs) {
  if (group_a.rows() == 0 || group_b.rows() == 0) fail(Errc::EmptyGroup, "empty group");
  if (group_a.cols() != group_b.cols()) fail(Errc::LengthMismatch, "groups differ in series length");
  const Eigen::VectorXd ma = group_a.colwise().mean().transpose();
  const Eigen::VectorXd mb = group_b.colwise().mean().transpose();
  return activation_difference_auc(std::span<const double>(ma.data(), static_cast<std::size_t>(ma.size())),
                                   std::span<const double>(mb.data(), static_cast<std::size_t>(mb.size())), fs);
}

std::string to_json(const GroupStats& s) {
  nlohmann::ordered_json j;
  j["label"] = s.label;
  j["t_value"] = s.t;
  j["df"] = s.df;
  j[s.tail == Tail::one ? "p_one_tailed" : "p_two_tailed"] = s.p;
  j["mean_diff"] = s.mean_diff;
  if (s.degenerate) j["degenerate"] = true;
  return j.dump(2);
}

}  // namespace cortigraph::stats
