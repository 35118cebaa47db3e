#pragma once

#include "cortigraph/connectivity.hpp"
#include "cortigraph/dataio.hpp"
#include "cortigraph/inverse.hpp"
#include "cortigraph/parallel.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cortigraph::pipeline {

// Building blocks shared by the CLI, the benchmarks and the end-to-end tests.

// Zero-phase bandpass, average reference, baseline correction.
EpochSet preprocess(const EpochSet& raw, const PipelineConfig& cfg, Exec exec = Exec::parallel);

struct SourceStage {
  inverse::InverseKernel kernel;
  std::vector<inverse::ScoutMatrix> scouts;  // one per epoch
};

// Noise covariance from the baseline, sLORETA kernel, scout series per epoch.
SourceStage source_stage(const EpochSet& prepped, const LeadfieldModel& lf, const PipelineConfig& cfg,
                         Exec exec = Exec::parallel);

// One row of graph features per correlation matrix, thresholded at rho_th.
Eigen::MatrixXd graph_feature_rows(const std::vector<connectivity::ConnectivityPair>& cps, double rho_th,
                                   Exec exec = Exec::parallel);

std::string sha256_hex(std::string_view bytes);

// Single writer for every artifact of a run; remembers content hashes for
// the run manifest.
class ArtifactWriter {
 public:
  explicit ArtifactWriter(std::filesystem::path root);

  void write(const std::string& relative_path, const std::string& bytes);
  const std::filesystem::path& root() const { return root_; }
  // path -> sha256, sorted by path.
  const std::map<std::string, std::string>& hashes() const { return hashes_; }

 private:
  std::filesystem::path root_;
  std::map<std::string, std::string> hashes_;
};

struct RunOptions {
  std::string command;  // preprocess|sources|timefreq|connectivity|features|classify|cluster|report
  std::optional<std::filesystem::path> config;
  std::filesystem::path input;
  std::filesystem::path out;
  std::optional<std::string> stimulus;
  std::string band = "alpha";
  std::optional<double> rho_th;
  std::optional<std::string> sweep;  // "LO:HI:STEP"
  std::optional<std::uint64_t> seed;
  std::string metric = "pearson";    // pearson|plv
  bool group_by_subject = false;
  std::optional<std::filesystem::path> dump_sources;
  std::string average = "epochs";    // epochs|series
};

// Runs the requested command and everything upstream of it. Returns 0 on
// success; on failure writes {"stage", "error", "message"} to stderr and
// <out>/error.json and returns 2.
int run_pipeline(const RunOptions& opts);

const std::vector<std::string>& commands();

}  // namespace cortigraph::pipeline
