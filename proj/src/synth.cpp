#include "cortigraph/synth.hpp"

#include "cortigraph/atlas.hpp"
#include "cortigraph/classify.hpp"
#include "cortigraph/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cortigraph::synth {

namespace {

constexpr double kSensorRadius = 1.0;
constexpr double kScoutRadius = 0.7;
constexpr double kSourceJitter = 0.03;

// Fibonacci lattice: n roughly evenly spread points on a sphere.
std::vector<Eigen::Vector3d> sphere_points(std::size_t n, double radius) {
  std::vector<Eigen::Vector3d> p(n);
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (std::size_t i = 0; i < n; ++i) {
    const double z = 1.0 - 2.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    const double rho = std::sqrt(1.0 - z * z);
    const double phi = golden * static_cast<double>(i);
    p[i] = radius * Eigen::Vector3d(rho * std::cos(phi), rho * std::sin(phi), z);
  }
  return p;
}

}  // namespace

double normal(std::mt19937_64& rng) {
  double u = 0.0;
  while (u <= 0.0) u = classify::uniform_unit(rng);
  const double v = classify::uniform_unit(rng);
  return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * std::numbers::pi * v);
}

LeadfieldModel make_leadfield(std::size_t n_channels, std::size_t sources_per_scout, std::uint64_t seed) {
  if (n_channels < 2 || sources_per_scout == 0) fail(Errc::InvalidRange, "leadfield needs channels and sources");
  const auto names = atlas::mindboggle_scouts();
  LeadfieldModel lf;
  const auto n_src = names.size() * sources_per_scout;
  lf.gain.resize(static_cast<Eigen::Index>(n_channels), static_cast<Eigen::Index>(n_src));
  std::mt19937_64 rng(seed);
  const auto sensors = sphere_points(n_channels, kSensorRadius);
  const auto centres = sphere_points(names.size(), kScoutRadius);
  for (Eigen::Index j = 0; j < lf.gain.cols(); ++j) {
    Eigen::Vector3d pos = centres[static_cast<std::size_t>(j) / sources_per_scout];
    for (int k = 0; k < 3; ++k) pos(k) += kSourceJitter * normal(rng);
    const Eigen::Vector3d dir = Eigen::Vector3d(normal(rng), normal(rng), normal(rng)).normalized();
    for (Eigen::Index i = 0; i < lf.gain.rows(); ++i) {
      // Dipole-like falloff: projection of the sensor direction on the
      // orientation over squared distance, plus an isotropic part.
      const Eigen::Vector3d d = sensors[static_cast<std::size_t>(i)] - pos;
      const double r = d.norm();
      lf.gain(i, j) = (0.5 + std::abs(dir.dot(d) / r)) / (r * r);
    }
  }
  for (std::size_t s = 0; s < names.size(); ++s) {
    Scout sc{names[s], {}, atlas::lobe_of(names[s])};
    for (std::size_t k = 0; k < sources_per_scout; ++k) sc.sources.push_back(s * sources_per_scout + k);
    lf.scouts.push_back(std::move(sc));
  }
  return lf;
}

std::vector<std::string> default_coupled_scouts() {
  return {"superiortemporal L",  "superiortemporal R", "transversetemporal L", "transversetemporal R",
          "lateraloccipital L",  "lateraloccipital R", "superiorparietal L",   "superiorparietal R",
          "supramarginal L",     "supramarginal R"};
}

EpochSet make_epochset(const LeadfieldModel& lf, const EpochSpec& spec, std::uint64_t seed) {
  if (!(spec.coupling >= 0.0 && spec.coupling <= 1.0)) fail(Errc::InvalidRange, "coupling must lie in [0, 1]");
  std::vector<bool> coupled(lf.n_scouts(), false);
  for (const auto& name : spec.coupled_scouts) {
    const auto it = std::find_if(lf.scouts.begin(), lf.scouts.end(), [&](const Scout& s) { return s.name == name; });
    if (it == lf.scouts.end()) fail(Errc::UnknownScout, "unknown scout " + name);
    coupled[static_cast<std::size_t>(it - lf.scouts.begin())] = true;
  }
  EpochSet set;
  set.fs = spec.fs;
  set.t0_offset = spec.t0_offset;
  set.stimulus = spec.stimulus;
  set.group = spec.group;
  set.subject_id = spec.subject_id;

  const auto n = static_cast<Eigen::Index>(spec.n_samples);
  const double shared = std::sqrt(spec.coupling);
  const double own = std::sqrt(1.0 - spec.coupling);
  std::mt19937_64 rng(seed);
  for (std::size_t e = 0; e < spec.n_epochs; ++e) {
    Eigen::VectorXd driver(n);
    for (Eigen::Index t = 0; t < n; ++t) driver(t) = normal(rng);
    Eigen::MatrixXd src = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(lf.n_sources()), n);
    for (std::size_t s = 0; s < lf.n_scouts(); ++s) {
      Eigen::RowVectorXd sig(n);
      for (Eigen::Index t = 0; t < n; ++t) sig(t) = normal(rng);
      if (coupled[s]) sig = spec.coupled_gain * (shared * driver.transpose() + own * sig);
      for (auto k : lf.scouts[s].sources) src.row(static_cast<Eigen::Index>(k)) = sig;
    }
    Eigen::MatrixXd x = lf.gain * src;
    const double level = std::sqrt(x.squaredNorm() / static_cast<double>(x.size()));
    for (Eigen::Index t = 0; t < n; ++t) {
      for (Eigen::Index c = 0; c < x.rows(); ++c) x(c, t) += spec.sensor_noise * level * normal(rng);
    }
    set.epochs.push_back(x * (spec.amplitude_uv / level));
  }
  return set;
}

void write_fixture(const std::filesystem::path& dir, const FixtureSpec& spec, std::uint64_t seed) {
  if (spec.groups.size() != spec.couplings.size()) fail(Errc::SizeMismatch, "one coupling per group");
  std::filesystem::create_directories(dir);
  const auto lf = make_leadfield(spec.n_channels, spec.sources_per_scout, seed);
  write_leadfield(lf, dir / "leadfield.csv", dir / "atlas.json");
  for (std::size_t g = 0; g < spec.groups.size(); ++g) {
    auto es = spec.epochs;
    es.group = spec.groups[g];
    es.subject_id = "synthetic_" + spec.groups[g];
    es.coupling = spec.couplings[g];
    if (es.coupled_scouts.empty()) es.coupled_scouts = default_coupled_scouts();
    const auto set = make_epochset(lf, es, seed + 1 + g);
    write_epochset(set, dir / (spec.groups[g] + "_" + es.stimulus));
  }
}

}  // namespace cortigraph::synth
