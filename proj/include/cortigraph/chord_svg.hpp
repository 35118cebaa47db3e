#pragma once

#include <Eigen/Dense>

#include <array>
#include <string>
#include <vector>

namespace cortigraph::report {

struct ColorScale {
  double lo = 0.0;  // weight mapped to low_rgb
  double hi = 1.0;  // weight mapped to high_rgb
  std::array<int, 3> low_rgb{49, 130, 189};
  std::array<int, 3> high_rgb{222, 45, 38};
};

// Standalone SVG 1.1 chord diagram. Nodes sit on a circle grouped by lobe
// (from `lobes`, or from the atlas when empty); every pair i < j with weight
// strictly above `threshold` becomes one cubic Bezier <path>. Node arcs are
// <polyline> elements so path count equals chord count.
std::string render_chord_svg(const Eigen::MatrixXd& m, const std::vector<std::string>& names, double threshold,
                             const ColorScale& colors = {}, const std::vector<std::string>& lobes = {});

// Number of pairs i < j with m(i, j) > threshold.
std::size_t count_chords(const Eigen::MatrixXd& m, double threshold);

}  // namespace cortigraph::report
