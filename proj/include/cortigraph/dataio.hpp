#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace cortigraph {

// Epoched multichannel recording for one subject and one stimulus type.
// Each epoch is n_channels x n_samples in microvolts.
struct EpochSet {
  std::vector<Eigen::MatrixXd> epochs;
  double fs = 0.0;
  double t0_offset = 0.0;  // seconds from epoch start to stimulus onset (negative)
  std::string stimulus;    // A, V, AV, A50V, V50A
  std::string group;       // Y, T, M
  std::string subject_id;

  std::size_t n_epochs() const { return epochs.size(); }
  std::size_t n_channels() const { return epochs.empty() ? 0 : static_cast<std::size_t>(epochs.front().rows()); }
  std::size_t n_samples() const { return epochs.empty() ? 0 : static_cast<std::size_t>(epochs.front().cols()); }
  double duration() const { return static_cast<double>(n_samples()) / fs; }
};

struct Scout {
  std::string name;
  std::vector<std::size_t> sources;
  std::string lobe;  // empty when the atlas does not say
};

struct LeadfieldModel {
  Eigen::MatrixXd gain;  // n_channels x n_sources
  std::vector<Scout> scouts;
  std::vector<std::string> warnings;

  std::size_t n_channels() const { return static_cast<std::size_t>(gain.rows()); }
  std::size_t n_sources() const { return static_cast<std::size_t>(gain.cols()); }
  std::size_t n_scouts() const { return scouts.size(); }
  std::vector<std::string> scout_names() const;
};

using Window = std::pair<double, double>;  // (start_s, end_s)
using Band = std::pair<double, double>;    // (lo_hz, hi_hz)

struct PipelineConfig {
  double band_lo = 0.5;
  double band_hi = 40.0;
  int filter_order = 4;
  double rho_th = 0.85;
  Window baseline_window{-0.5, 0.0};
  Window epoch_window{-0.5, 0.9};
  double snr_assumed = 3.0;
  double wavelet_fc = 1.0;
  double wavelet_fwhm = 1.0;
  double tf_freq_lo = 4.0;
  double tf_freq_hi = 40.0;
  double tf_freq_step = 1.0;
  std::map<std::string, Band> freq_bands{
      {"theta", {4.0, 7.0}}, {"alpha", {8.0, 13.0}}, {"beta", {14.0, 30.0}}, {"gamma", {30.0, 40.0}}};
  int k_max = 10;
  int n_init = 10;
  int n_folds = 10;
  int n_trees = 100;
  int knn_k = 5;
  unsigned long long rng_seed = 42;
};

// Throws Error(InvalidRange) when an invariant is violated.
void validate(const PipelineConfig& cfg);

// Throws on any violated EpochSet invariant (shape, finiteness, labels, timing).
void validate(const EpochSet& set);

EpochSet load_epochset(const std::filesystem::path& dir);

// Writes manifest.json plus epoch_NNNN.epb files. Values are stored as float32.
void write_epochset(const EpochSet& set, const std::filesystem::path& dir);

LeadfieldModel load_leadfield(const std::filesystem::path& gain_csv, const std::filesystem::path& atlas_json);

PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig parse_config(const std::string& json_text);
std::string config_to_json(const PipelineConfig& cfg);

// Plain decimal CSV, no header.
Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path);

// Matrix CSV with '.' decimals and full round-trip precision. When
// col_names is non-empty it is written as a header row.
std::string matrix_to_csv(const Eigen::MatrixXd& m, const std::vector<std::string>& col_names = {});

void write_leadfield(const LeadfieldModel& lf, const std::filesystem::path& gain_csv,
                     const std::filesystem::path& atlas_json);

}  // namespace cortigraph
