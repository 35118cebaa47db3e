#include "cortigraph/chord_svg.hpp"

#include "cortigraph/atlas.hpp"
#include "cortigraph/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>

namespace cortigraph::report {

namespace {

constexpr double kCanvas = 900.0;
constexpr double kCentre = kCanvas / 2.0;
constexpr double kRadius = 330.0;
constexpr double kPull = 0.2;  // control points are this fraction of the way out from the centre

const std::array<const char*, 9> kLobeColours = {"#8c564b", "#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd",
                                                 "#17becf", "#e377c2", "#bcbd22", "#7f7f7f"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  // Avoid "-0.00" so output does not depend on the sign of tiny values.
  if (std::string(buf) == "-0.00") return "0.00";
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string colour(const ColorScale& cs, double w) {
  double t = cs.hi > cs.lo ? (w - cs.lo) / (cs.hi - cs.lo) : 1.0;
  t = std::clamp(t, 0.0, 1.0);
  char buf[8];
  int rgb[3];
  for (int k = 0; k < 3; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    rgb[k] = static_cast<int>(std::lround(cs.low_rgb[ku] + t * (cs.high_rgb[ku] - cs.low_rgb[ku])));
  }
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
  return buf;
}

}  // namespace

std::size_t count_chords(const Eigen::MatrixXd& m, double threshold) {
  std::size_t c = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < m.cols(); ++j) c += m(i, j) > threshold ? 1 : 0;
  }
  return c;
}

std::string render_chord_svg(const Eigen::MatrixXd& m, const std::vector<std::string>& names, double threshold,
                             const ColorScale& colors, const std::vector<std::string>& lobes) {
  const auto n = static_cast<std::size_t>(m.rows());
  if (m.rows() != m.cols()) fail(Errc::ShapeMismatch, "chord matrix must be square");
  if (names.size() != n) fail(Errc::ShapeMismatch, "name count differs from matrix size");
  if (!lobes.empty() && lobes.size() != n) fail(Errc::ShapeMismatch, "lobe count differs from matrix size");
  if (!m.isApprox(m.transpose(), 1e-9) && m.size() > 0) fail(Errc::ShapeMismatch, "chord matrix must be symmetric");

  std::vector<std::string> lobe(n);
  for (std::size_t i = 0; i < n; ++i) lobe[i] = lobes.empty() ? atlas::lobe_of(names[i]) : lobes[i];
  const auto& order = atlas::lobe_order();
  auto rank = [&](const std::string& l) {
    const auto it = std::find(order.begin(), order.end(), l);
    return static_cast<std::size_t>(it - order.begin());
  };
  std::vector<std::size_t> pos(n);
  std::iota(pos.begin(), pos.end(), std::size_t{0});
  std::stable_sort(pos.begin(), pos.end(), [&](std::size_t a, std::size_t b) { return rank(lobe[a]) < rank(lobe[b]); });
  std::vector<double> angle(n);
  const double slot = n ? 2.0 * std::numbers::pi / static_cast<double>(n) : 0.0;
  for (std::size_t k = 0; k < n; ++k) angle[pos[k]] = (static_cast<double>(k) + 0.5) * slot - std::numbers::pi / 2.0;

  auto px = [](double r, double a) { return kCentre + r * std::cos(a); };
  auto py = [](double r, double a) { return kCentre + r * std::sin(a); };

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + fmt(kCanvas) + "\" height=\"" +
         fmt(kCanvas) + "\" viewBox=\"0 0 " + fmt(kCanvas) + " " + fmt(kCanvas) + "\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"" + fmt(kCanvas) + "\" height=\"" + fmt(kCanvas) + "\" fill=\"#ffffff\"/>\n";

  svg += "<g id=\"nodes\" fill=\"none\" stroke-width=\"8\">\n";
  for (std::size_t k = 0; k < n; ++k) {
    const auto i = pos[k];
    const auto li = std::min(rank(lobe[i]), kLobeColours.size() - 1);
    svg += "<polyline stroke=\"";
    svg += kLobeColours[li];
    svg += "\" points=\"";
    for (int s = 0; s <= 6; ++s) {
      const double a = angle[i] - 0.4 * slot + 0.8 * slot * s / 6.0;
      if (s) svg += ' ';
      svg += fmt(px(kRadius, a)) + "," + fmt(py(kRadius, a));
    }
    svg += "\"><title>" + escape(names[i]) + "</title></polyline>\n";
  }
  svg += "</g>\n";

  svg += "<g id=\"labels\" font-family=\"sans-serif\" font-size=\"9\" fill=\"#333333\">\n";
  for (std::size_t k = 0; k < n; ++k) {
    const auto i = pos[k];
    const double deg = angle[i] * 180.0 / std::numbers::pi;
    const bool flip = std::cos(angle[i]) < 0.0;
    svg += "<text x=\"" + fmt(px(kRadius + 12.0, angle[i])) + "\" y=\"" + fmt(py(kRadius + 12.0, angle[i])) +
           "\" text-anchor=\"" + (flip ? "end" : "start") + "\" dominant-baseline=\"middle\" transform=\"rotate(" +
           fmt(flip ? deg + 180.0 : deg) + " " + fmt(px(kRadius + 12.0, angle[i])) + " " +
           fmt(py(kRadius + 12.0, angle[i])) + ")\">" + escape(names[i]) + "</text>\n";
  }
  svg += "</g>\n";

  svg += "<g id=\"chords\" fill=\"none\" stroke-opacity=\"0.7\">\n";
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double w = m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (!(w > threshold)) continue;
      const double r0 = kRadius - 5.0;
      svg += "<path d=\"M " + fmt(px(r0, angle[i])) + " " + fmt(py(r0, angle[i])) + " C " +
             fmt(px(kPull * r0, angle[i])) + " " + fmt(py(kPull * r0, angle[i])) + " " + fmt(px(kPull * r0, angle[j])) +
             " " + fmt(py(kPull * r0, angle[j])) + " " + fmt(px(r0, angle[j])) + " " + fmt(py(r0, angle[j])) +
             "\" stroke=\"" + colour(colors, w) + "\" stroke-width=\"1.5\"/>\n";
    }
  }
  svg += "</g>\n</svg>\n";
  return svg;
}

}  // namespace cortigraph::report
