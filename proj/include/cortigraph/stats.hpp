#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>

namespace cortigraph::stats {

enum class Tail { one, two };

struct GroupStats {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;           // for Tail::one, the tail beyond |t| in the observed direction
  double mean_diff = 0.0;
  Tail tail = Tail::two;
  std::string label;
  bool degenerate = false;  // every difference was zero
};

// Student-t density with df degrees of freedom.
double student_t_pdf(double x, double df);

// CDF by adaptive Simpson quadrature of the density over [0, |x|].
double student_t_cdf(double x, double df);

GroupStats paired_t_test(std::span<const double> a, std::span<const double> b, Tail tail, std::string label = "");

// Trapezoidal integral of |a(t) - b(t)| with sample spacing 1/fs.
double activation_difference_auc(std::span<const double> a, std::span<const double> b, double fs);

// Rows are trials (or subjects), columns are samples; the row means are compared.
double activation_difference_auc(const Eigen::MatrixXd& group_a, const Eigen::MatrixXd& group_b, double fs);

std::string to_json(const GroupStats& s);

}  // namespace cortigraph::stats
