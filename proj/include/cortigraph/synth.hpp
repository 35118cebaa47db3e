#pragma once

#include "cortigraph/dataio.hpp"

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace cortigraph::synth {

// Standard normal deviate from mt19937_64 via Box-Muller; identical on every platform.
double normal(std::mt19937_64& rng);

// Gain (n_channels x 62*sources_per_scout) over the 62 reference scouts,
// sources assigned to scouts in contiguous blocks. Scouts sit on an inner
// sphere and sensors on an outer one; gain falls off with distance, times a
// random source orientation factor.
LeadfieldModel make_leadfield(std::size_t n_channels, std::size_t sources_per_scout, std::uint64_t seed);

struct EpochSpec {
  std::size_t n_epochs = 80;
  std::size_t n_samples = 700;
  double fs = 500.0;
  double t0_offset = -0.5;
  std::string stimulus = "AV";
  std::string group = "Y";
  std::string subject_id = "synthetic";
  // Scouts driven by one shared signal per epoch; their pairwise source
  // correlation equals `coupling`.
  std::vector<std::string> coupled_scouts;
  double coupling = 0.0;
  double coupled_gain = 1.0;  // amplitude of coupled scouts relative to the background
  double sensor_noise = 0.05;  // relative to the mean channel std
  double amplitude_uv = 10.0;
};

// Scouts used by the planted two-group fixtures.
std::vector<std::string> default_coupled_scouts();

EpochSet make_epochset(const LeadfieldModel& lf, const EpochSpec& spec, std::uint64_t seed);

// Writes leadfield.csv, atlas.json and one epoch-set directory per group
// (<dir>/<group>_<stimulus>/) with group-dependent coupling.
struct FixtureSpec {
  std::size_t n_channels = 31;
  std::size_t sources_per_scout = 3;
  std::vector<std::string> groups{"M", "Y"};
  std::vector<double> couplings{0.6, 0.98};
  EpochSpec epochs;
};
void write_fixture(const std::filesystem::path& dir, const FixtureSpec& spec, std::uint64_t seed);

}  // namespace cortigraph::synth
