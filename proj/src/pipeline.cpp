#include "cortigraph/pipeline.hpp"

#include "cortigraph/atlas.hpp"
#include "cortigraph/chord_svg.hpp"
#include "cortigraph/classify.hpp"
#include "cortigraph/cluster.hpp"
#include "cortigraph/error.hpp"
#include "cortigraph/graphfeat.hpp"
#include "cortigraph/preproc.hpp"
#include "cortigraph/stats.hpp"
#include "cortigraph/timefreq.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

namespace cortigraph::pipeline {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

EpochSet preprocess(const EpochSet& raw, const PipelineConfig& cfg, Exec exec) {
  const preproc::FilterSpec spec{cfg.filter_order, {cfg.band_lo, cfg.band_hi}};
  auto filtered = preproc::bandpass_filter(raw, spec, exec);
  return preproc::baseline_correct(preproc::rereference_average(filtered), cfg.baseline_window);
}

SourceStage source_stage(const EpochSet& prepped, const LeadfieldModel& lf, const PipelineConfig& cfg, Exec exec) {
  SourceStage st;
  const auto noise = inverse::estimate_noise_covariance(prepped, cfg.baseline_window);
  st.kernel = inverse::build_sloreta_kernel(lf, noise, cfg.snr_assumed);
  const auto src = inverse::apply_inverse(prepped, st.kernel, exec);
  st.scouts.resize(src.size());
  const auto n = static_cast<long long>(src.size());
  std::vector<std::exception_ptr> errors(src.size());
  auto work = [&](long long i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      st.scouts[k] = inverse::extract_scout_series(src[k], lf);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  };
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < n; ++i) work(i);
  } else {
    for (long long i = 0; i < n; ++i) work(i);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return st;
}

Eigen::MatrixXd graph_feature_rows(const std::vector<connectivity::ConnectivityPair>& cps, double rho_th, Exec exec) {
  std::vector<Eigen::MatrixXi> graphs;
  graphs.reserve(cps.size());
  for (const auto& cp : cps) graphs.push_back(connectivity::binarize(cp, rho_th).a_bin);
  const auto fv = graphfeat::assemble_batch(graphs, exec);
  if (fv.empty()) return {};
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(fv.size()), fv.front().values.size());
  for (std::size_t i = 0; i < fv.size(); ++i) rows.row(static_cast<Eigen::Index>(i)) = fv[i].values.transpose();
  return rows;
}

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    fail(Errc::Io, "sha256 failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 0xF];
  }
  return out;
}

ArtifactWriter::ArtifactWriter(fs::path root) : root_(std::move(root)) {}

void ArtifactWriter::write(const std::string& relative_path, const std::string& bytes) {
  const fs::path p = root_ / relative_path;
  std::error_code ec;
  fs::create_directories(p.parent_path(), ec);
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) fail(Errc::Io, "cannot write " + p.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(Errc::Io, "short write to " + p.string());
  hashes_[relative_path] = sha256_hex(bytes);
}

const std::vector<std::string>& commands() {
  static const std::vector<std::string> c{"preprocess", "sources", "timefreq", "connectivity",
                                          "features",   "classify", "cluster", "report"};
  return c;
}

namespace {

// Error raised inside a named stage.
struct StageFailure {
  std::string stage;
  std::string error;
  std::string message;
};

template <class F>
auto in_stage(const char* stage, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw StageFailure{stage, to_string(e.code()), e.what()};
  } catch (const fs::filesystem_error& e) {
    throw StageFailure{stage, to_string(Errc::Io), e.what()};
  }
}

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) fail(Errc::Io, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string num(double v) {
  std::array<char, 32> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return {buf.data(), end};
}

struct NamedSet {
  std::string name;  // relative path under the input directory
  EpochSet set;
};

class Run {
 public:
  explicit Run(const RunOptions& o) : opts_(o), writer_(o.out) {}

  int execute() {
    ingest();
    const auto& cmd = opts_.command;
    if (cmd == "preprocess") {
      write_preprocessed();
    } else if (cmd == "sources") {
      write_sources();
    } else if (cmd == "timefreq") {
      write_timefreq();
    } else if (cmd == "connectivity") {
      write_connectivity();
    } else if (cmd == "features") {
      write_features();
    } else if (cmd == "classify") {
      write_classify();
    } else if (cmd == "cluster") {
      write_cluster();
    } else if (cmd == "report") {
      write_report();
    } else {
      throw StageFailure{"ingest", to_string(Errc::InvalidConfig), "unknown command '" + cmd + "'"};
    }
    write_manifest();
    return 0;
  }

 private:
  // ---- upstream stages --------------------------------------------------

  void ingest() {
    stages_.push_back("ingest");
    in_stage("ingest", [&] {
      cfg_ = opts_.config ? load_config(*opts_.config) : PipelineConfig{};
      if (opts_.seed) cfg_.rng_seed = *opts_.seed;
      if (opts_.rho_th) cfg_.rho_th = *opts_.rho_th;
      validate(cfg_);
      if (opts_.metric != "pearson" && opts_.metric != "plv") fail(Errc::InvalidConfig, "metric must be pearson or plv");
      if (opts_.average != "epochs" && opts_.average != "series") fail(Errc::InvalidConfig, "average must be epochs or series");
      if (!cfg_.freq_bands.contains(opts_.band)) fail(Errc::InvalidConfig, "unknown band '" + opts_.band + "'");
      if (!fs::is_directory(opts_.input)) fail(Errc::MissingInput, "input directory " + opts_.input.string() + " not found");

      std::vector<fs::path> dirs;
      if (fs::is_regular_file(opts_.input / "manifest.json")) dirs.push_back(opts_.input);
      for (const auto& entry : fs::recursive_directory_iterator(opts_.input)) {
        if (entry.is_directory() && fs::is_regular_file(entry.path() / "manifest.json")) dirs.push_back(entry.path());
      }
      std::sort(dirs.begin(), dirs.end());
      for (const auto& d : dirs) {
        auto set = load_epochset(d);
        if (opts_.stimulus && set.stimulus != *opts_.stimulus) continue;
        std::string name = fs::relative(d, opts_.input).generic_string();
        if (name == ".") name = d.filename().generic_string();
        for (const auto& entry : fs::directory_iterator(d)) {
          if (entry.is_regular_file())
            inputs_[name + "/" + entry.path().filename().generic_string()] = sha256_hex(read_bytes(entry.path()));
        }
        sets_.push_back({name, std::move(set)});
      }
      if (sets_.empty()) fail(Errc::MissingInput, "no epoch sets found under " + opts_.input.string());
      return 0;
    });
  }

  void ensure_preproc() {
    if (!prepped_.empty()) return;
    stages_.push_back("preproc");
    in_stage("preproc", [&] {
      for (const auto& s : sets_) prepped_.push_back(preprocess(s.set, cfg_));
      return 0;
    });
  }

  void ensure_inverse() {
    if (!kernels_.empty()) return;
    ensure_preproc();
    stages_.push_back("inverse");
    in_stage("inverse", [&] {
      const fs::path gain = opts_.input / "leadfield.csv";
      const fs::path atlas = opts_.input / "atlas.json";
      if (!fs::is_regular_file(gain) || !fs::is_regular_file(atlas)) {
        fail(Errc::MissingInput, "leadfield.csv and atlas.json are required in " + opts_.input.string());
      }
      inputs_["leadfield.csv"] = sha256_hex(read_bytes(gain));
      inputs_["atlas.json"] = sha256_hex(read_bytes(atlas));
      lf_ = load_leadfield(gain, atlas);
      for (const auto& p : prepped_) {
        if (p.n_channels() != lf_.n_channels())
          fail(Errc::ChannelCountMismatch, "epochs have " + std::to_string(p.n_channels()) + " channels, leadfield " +
                                               std::to_string(lf_.n_channels()));
        const auto noise = inverse::estimate_noise_covariance(p, cfg_.baseline_window);
        kernels_.push_back(inverse::build_sloreta_kernel(lf_, noise, cfg_.snr_assumed));
      }
      return 0;
    });
  }

  void ensure_scouts() {
    if (!scouts_.empty()) return;
    ensure_inverse();
    stages_.push_back("scouts");
    in_stage("scouts", [&] {
      for (std::size_t i = 0; i < prepped_.size(); ++i) {
        const auto src = inverse::apply_inverse(prepped_[i], kernels_[i]);
        std::vector<inverse::ScoutMatrix> per_epoch;
        per_epoch.reserve(src.size());
        for (const auto& s : src) per_epoch.push_back(inverse::extract_scout_series(s, lf_));
        scouts_.push_back(std::move(per_epoch));
      }
      return 0;
    });
  }

  void ensure_correlations() {
    if (!corr_.empty()) return;
    ensure_scouts();
    stages_.push_back("connectivity");
    in_stage("connectivity", [&] {
      for (const auto& sc : scouts_) corr_.push_back(connectivity::pearson_batch(sc));
      return 0;
    });
  }

  // ---- commands ---------------------------------------------------------

  void write_preprocessed() {
    ensure_preproc();
    in_stage("preproc", [&] {
      for (std::size_t i = 0; i < sets_.size(); ++i) {
        const fs::path dir = writer_.root() / "preprocessed" / sets_[i].name;
        write_epochset(prepped_[i], dir);
        for (const auto& entry : fs::directory_iterator(dir)) {
          writer_.write("preprocessed/" + sets_[i].name + "/" + entry.path().filename().generic_string(),
                        read_bytes(entry.path()));
        }
      }
      return 0;
    });
  }

  void write_sources() {
    ensure_scouts();
    in_stage("scouts", [&] {
      for (std::size_t i = 0; i < sets_.size(); ++i) {
        const auto avg = connectivity::average_scout_series(scouts_[i]);
        writer_.write("sources/" + sets_[i].name + "/scout_series_mean.csv", matrix_to_csv(avg.v, avg.scout_names));
        ojson k;
        k["n_channels"] = lf_.n_channels();
        k["n_sources"] = lf_.n_sources();
        k["n_scouts"] = lf_.n_scouts();
        k["lambda"] = kernels_[i].lambda;
        k["leadfield_warnings"] = lf_.warnings;
        writer_.write("sources/" + sets_[i].name + "/kernel.json", k.dump(2) + "\n");
        if (opts_.dump_sources) {
          ArtifactWriter dump(*opts_.dump_sources);
          for (std::size_t e = 0; e < scouts_[i].size(); ++e) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "epoch_%04zu.csv", e);
            dump.write(sets_[i].name + "/" + buf, matrix_to_csv(scouts_[i][e].v, scouts_[i][e].scout_names));
          }
        }
      }
      return 0;
    });
  }

  void write_timefreq() {
    ensure_scouts();
    stages_.push_back("timefreq");
    in_stage("timefreq", [&] {
      timefreq::MorletSpec spec{cfg_.wavelet_fc, cfg_.wavelet_fwhm,
                                timefreq::frequency_grid(cfg_.tf_freq_lo, cfg_.tf_freq_hi, cfg_.tf_freq_step)};
      for (std::size_t i = 0; i < sets_.size(); ++i) {
        const auto& sc = scouts_[i];
        // Induced power of the merged audio-visual scout, averaged over epochs.
        timefreq::TFMap acc;
        for (std::size_t e = 0; e < sc.size(); ++e) {
          const auto merged = inverse::merge_scouts(sc[e], atlas::avi_scouts(), "AVI");
          const auto col = std::find(merged.scout_names.begin(), merged.scout_names.end(), "AVI") - merged.scout_names.begin();
          const Eigen::VectorXd x = merged.v.col(col);
          auto tf = timefreq::morlet_transform({x.data(), static_cast<std::size_t>(x.size())}, merged.fs,
                                               merged.t0_offset, spec);
          if (e == 0) {
            acc = std::move(tf);
          } else {
            acc.power += tf.power;
          }
        }
        acc.power /= static_cast<double>(sc.size());
        const auto z = timefreq::zscore_normalize(acc, cfg_.baseline_window);

        Eigen::MatrixXd table(z.power.rows(), z.power.cols() + 1);
        table.col(0) = Eigen::Map<const Eigen::VectorXd>(z.freqs.data(), static_cast<Eigen::Index>(z.freqs.size()));
        table.rightCols(z.power.cols()) = z.power;
        std::vector<std::string> header{"freq_hz"};
        for (Eigen::Index t = 0; t < z.power.cols(); ++t) header.push_back(num(z.t0_offset + static_cast<double>(t) / z.fs));
        writer_.write("timefreq/" + sets_[i].name + "/avi_power_z.csv", matrix_to_csv(table, header));

        ojson bands;
        const auto post = preproc::window_samples(z.fs, z.t0_offset, static_cast<std::size_t>(z.power.cols()),
                                                  {0.0, cfg_.epoch_window.second});
        for (const auto& [name, band] : cfg_.freq_bands) {
          const auto bp = timefreq::band_power(z, band);
          double s = 0.0;
          for (std::size_t t = post.begin; t < post.end; ++t) s += bp[t];
          bands[name] = s / static_cast<double>(post.end - post.begin);
        }
        ojson out;
        out["set"] = sets_[i].name;
        out["post_stimulus_mean_z"] = bands;
        out["flagged_rows"] = std::count(z.zero_variance.begin(), z.zero_variance.end(), true);
        writer_.write("timefreq/" + sets_[i].name + "/band_power.json", out.dump(2) + "\n");
      }
      return 0;
    });
  }

  Eigen::MatrixXd mean_correlation(std::size_t i) {
    if (opts_.average == "series") return connectivity::pearson_adjacency(connectivity::average_scout_series(scouts_[i])).a_hat;
    std::vector<Eigen::MatrixXd> mats;
    for (const auto& cp : corr_[i]) mats.push_back(cp.a_hat);
    return connectivity::group_average(mats);
  }

  void write_connectivity() {
    ensure_scouts();
    if (opts_.metric == "pearson") ensure_correlations();
    else stages_.push_back("connectivity");
    in_stage("connectivity", [&] {
      const auto names = lf_.scout_names();
      ojson summary = ojson::array();
      for (std::size_t i = 0; i < sets_.size(); ++i) {
        const std::string base = "connectivity/" + sets_[i].name + "/";
        Eigen::MatrixXd w;
        if (opts_.metric == "pearson") {
          connectivity::ConnectivityPair cp;
          cp.a_hat = mean_correlation(i);
          cp = connectivity::binarize(cp, cfg_.rho_th);
          writer_.write(base + "adjacency.csv", matrix_to_csv(cp.a_hat, names));
          writer_.write(base + "binary.csv", matrix_to_csv(cp.a_bin.cast<double>(), names));
          writer_.write(base + "zmatrix.csv", matrix_to_csv(connectivity::fisher_z(cp).z, names));
          summary.push_back({{"set", sets_[i].name}, {"metric", "pearson"}, {"rho_th", cfg_.rho_th},
                             {"edges", cp.a_bin.sum() / 2}});
          w = cp.a_hat;
        } else {
          const auto band = cfg_.freq_bands.at(opts_.band);
          std::vector<connectivity::PhaseSet> phases;
          for (const auto& sm : scouts_[i]) {
            connectivity::PhaseSet ps;
            for (Eigen::Index c = 0; c < sm.v.cols(); ++c)
              ps.push_back(timefreq::band_phase({sm.v.col(c).data(), static_cast<std::size_t>(sm.v.rows())}, sm.fs, band,
                                                cfg_.filter_order));
            phases.push_back(std::move(ps));
          }
          const auto discard = static_cast<std::size_t>(std::ceil(0.1 * sets_[i].set.fs));
          const auto plv = connectivity::plv_matrix(phases, discard, opts_.band);
          writer_.write(base + "plv_" + opts_.band + ".csv", matrix_to_csv(plv.plv, names));
          summary.push_back({{"set", sets_[i].name}, {"metric", "plv"}, {"band", opts_.band}, {"rho_th", cfg_.rho_th},
                             {"edges", connectivity::binarize({plv.plv, {}, 0.0, {}}, cfg_.rho_th).a_bin.sum() / 2}});
          w = plv.plv;
        }
        report::ColorScale cs;
        cs.lo = cfg_.rho_th;
        writer_.write(base + "chord.svg", report::render_chord_svg(w, names, cfg_.rho_th, cs, lobes()));
      }
      writer_.write("connectivity/summary.json", summary.dump(2) + "\n");
      return 0;
    });
  }

  std::vector<std::string> lobes() const {
    std::vector<std::string> l;
    for (const auto& s : lf_.scouts) l.push_back(s.lobe.empty() ? atlas::lobe_of(s.name) : s.lobe);
    return l;
  }

  // Feature rows of every selected set at one threshold.
  Eigen::MatrixXd feature_matrix(double rho) {
    std::vector<Eigen::MatrixXd> blocks;
    Eigen::Index rows = 0;
    for (const auto& c : corr_) {
      blocks.push_back(graph_feature_rows(c, rho));
      rows += blocks.back().rows();
    }
    Eigen::MatrixXd x(rows, blocks.front().cols());
    Eigen::Index r = 0;
    for (const auto& b : blocks) {
      x.middleRows(r, b.rows()) = b;
      r += b.rows();
    }
    return x;
  }

  void write_features() {
    ensure_correlations();
    stages_.push_back("features");
    in_stage("features", [&] {
      const auto x = feature_matrix(cfg_.rho_th);
      std::string csv = "set,group,stimulus,subject_id,epoch";
      for (const auto& l : graphfeat::feature_labels(lf_.scout_names())) csv += "," + l;
      csv += '\n';
      Eigen::Index r = 0;
      for (std::size_t i = 0; i < sets_.size(); ++i) {
        for (std::size_t e = 0; e < corr_[i].size(); ++e, ++r) {
          csv += sets_[i].name + "," + sets_[i].set.group + "," + sets_[i].set.stimulus + "," + sets_[i].set.subject_id +
                 "," + std::to_string(e);
          for (Eigen::Index c = 0; c < x.cols(); ++c) csv += "," + num(x(r, c));
          csv += '\n';
        }
      }
      writer_.write("features/features.csv", csv);
      return 0;
    });
  }

  // Indices of the selected sets grouped by stimulus.
  std::map<std::string, std::vector<std::size_t>> sets_by_stimulus() const {
    std::map<std::string, std::vector<std::size_t>> m;
    for (std::size_t i = 0; i < sets_.size(); ++i) m[sets_[i].set.stimulus].push_back(i);
    return m;
  }

  classify::Dataset dataset_for(const std::vector<std::size_t>& idx, double rho) {
    std::vector<Eigen::MatrixXd> blocks;
    std::vector<std::string> labels, groups;
    Eigen::Index rows = 0;
    for (auto i : idx) {
      blocks.push_back(graph_feature_rows(corr_[i], rho));
      rows += blocks.back().rows();
      for (std::size_t e = 0; e < corr_[i].size(); ++e) {
        labels.push_back(sets_[i].set.group);
        groups.push_back(sets_[i].set.subject_id);
      }
    }
    Eigen::MatrixXd x(rows, blocks.front().cols());
    Eigen::Index r = 0;
    for (const auto& b : blocks) {
      x.middleRows(r, b.rows()) = b;
      r += b.rows();
    }
    return classify::make_dataset(std::move(x), labels, std::move(groups));
  }

  void write_classify() {
    ensure_correlations();
    stages_.push_back("features");
    stages_.push_back("classify");
    in_stage("classify", [&] {
      const classify::ForestSpec rf{cfg_.n_trees, 0, 1, true};
      if (opts_.sweep) {
        const auto grid = parse_sweep(*opts_.sweep);
        std::string csv = "stimulus,rho_th,classifier,mean_accuracy\n";
        ojson all = ojson::array();
        for (const auto& [stim, idx] : sets_by_stimulus()) {
          const auto res = classify::threshold_sweep([&](double rho) { return dataset_for(idx, rho); }, grid, rf,
                                                     cfg_.n_folds, cfg_.rng_seed, opts_.group_by_subject);
          for (auto r : res) {
            r.stimulus = stim;
            csv += stim + "," + num(r.rho_th) + "," + r.classifier + "," + num(r.mean_accuracy) + "\n";
            all.push_back(ojson::parse(classify::to_json(r)));
          }
        }
        writer_.write("classify/accuracy_vs_threshold.csv", csv);
        writer_.write("classify/sweep.json", all.dump(2) + "\n");
        return 0;
      }
      const std::vector<classify::ClassifierSpec> specs{classify::KnnSpec{cfg_.knn_k}, classify::LogRegSpec{},
                                                        classify::SvmSpec{}, rf};
      std::string table;
      ojson all = ojson::array();
      for (const auto& [stim, idx] : sets_by_stimulus()) {
        const auto ds = dataset_for(idx, cfg_.rho_th);
        for (const auto& spec : specs) {
          auto r = classify::kfold_cv(ds, spec, cfg_.n_folds, cfg_.rng_seed, opts_.group_by_subject);
          r.stimulus = stim;
          r.rho_th = cfg_.rho_th;
          table += classify::table_row(r) + "\n";
          all.push_back(ojson::parse(classify::to_json(r)));
        }
      }
      writer_.write("classify/cv_results.json", all.dump(2) + "\n");
      writer_.write("classify/table.txt", table);
      return 0;
    });
  }

  static std::vector<double> parse_sweep(const std::string& s) {
    std::array<double, 3> v{};
    std::size_t pos = 0;
    for (int k = 0; k < 3; ++k) {
      const auto next = k < 2 ? s.find(':', pos) : s.size();
      if (next == std::string::npos) fail(Errc::InvalidConfig, "sweep must look like LO:HI:STEP");
      const auto tok = s.substr(pos, next - pos);
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v[static_cast<std::size_t>(k)]);
      if (ec != std::errc{} || ptr != tok.data() + tok.size()) fail(Errc::InvalidConfig, "bad sweep value '" + tok + "'");
      pos = next + 1;
    }
    return classify::sweep_grid(v[0], v[1], v[2]);
  }

  void write_cluster() {
    ensure_correlations();
    stages_.push_back("cluster");
    in_stage("cluster", [&] {
      const auto names = lf_.scout_names();
      for (std::size_t i = 0; i < sets_.size(); ++i) {
        const auto z = connectivity::fisher_z(mean_correlation(i));
        const auto ca = cluster::elbow_kmeans(z.z, cfg_.k_max, cfg_.rng_seed, cfg_.n_init);
        const auto re = cluster::reorder_adjacency(z.z, ca.labels);
        std::vector<std::string> reordered;
        for (auto p : re.permutation) reordered.push_back(names[p]);
        ojson out;
        out["set"] = sets_[i].name;
        out["k"] = ca.k;
        out["wcss_curve"] = ca.wcss_curve;
        ojson labels;
        for (std::size_t s = 0; s < names.size(); ++s) labels[names[s]] = ca.labels[s];
        out["labels"] = labels;
        out["order"] = reordered;
        const std::string base = "cluster/" + sets_[i].name + "/";
        writer_.write(base + "clusters.json", out.dump(2) + "\n");
        writer_.write(base + "reordered_zmatrix.csv", matrix_to_csv(re.matrix, reordered));
      }
      return 0;
    });
  }

  // Epoch-averaged merged audio-visual scout series (not re-normalized).
  Eigen::VectorXd avi_mean(std::size_t i) {
    Eigen::VectorXd acc;
    for (const auto& sm : scouts_[i]) {
      const auto merged = inverse::merge_scouts(sm, atlas::avi_scouts(), "AVI");
      const auto col = std::find(merged.scout_names.begin(), merged.scout_names.end(), "AVI") - merged.scout_names.begin();
      if (acc.size() == 0) acc = Eigen::VectorXd::Zero(merged.v.rows());
      acc += merged.v.col(col);
    }
    return acc / static_cast<double>(scouts_[i].size());
  }

  void write_report() {
    ensure_correlations();
    stages_.push_back("report");
    in_stage("report", [&] {
      const auto names = lf_.scout_names();
      ojson out;
      out["sets"] = ojson::array();
      std::map<std::string, std::map<std::string, double>> peak;  // stimulus -> group -> activation
      std::map<std::string, std::map<std::string, Eigen::VectorXd>> series;
      for (std::size_t i = 0; i < sets_.size(); ++i) {
        const auto& s = sets_[i].set;
        const Eigen::VectorXd avi = avi_mean(i);
        const auto post = preproc::window_samples(s.fs, s.t0_offset, static_cast<std::size_t>(avi.size()),
                                                  {0.0, cfg_.epoch_window.second});
        const auto len = static_cast<Eigen::Index>(post.end - post.begin);
        const Eigen::VectorXd post_avi = avi.segment(static_cast<Eigen::Index>(post.begin), len);
        const double act = post_avi.cwiseAbs().mean();
        peak[s.stimulus][s.group] = act;
        series[s.stimulus][s.group] = post_avi;

        report::ColorScale cs;
        cs.lo = cfg_.rho_th;
        const auto w = mean_correlation(i);
        writer_.write("report/" + sets_[i].name + "/chord.svg", report::render_chord_svg(w, names, cfg_.rho_th, cs, lobes()));
        writer_.write("report/" + sets_[i].name + "/avi_mean.csv",
                      matrix_to_csv(Eigen::MatrixXd(avi), std::vector<std::string>{"AVI"}));
        out["sets"].push_back({{"set", sets_[i].name}, {"group", s.group}, {"stimulus", s.stimulus},
                               {"avi_post_mean_abs", act},
                               {"chords", report::count_chords(w, cfg_.rho_th)}});
      }

      // Activation-difference areas between every pair of groups sharing a stimulus.
      out["auc"] = ojson::array();
      for (const auto& [stim, by_group] : series) {
        for (auto a = by_group.begin(); a != by_group.end(); ++a) {
          for (auto b = std::next(a); b != by_group.end(); ++b) {
            if (a->second.size() != b->second.size()) continue;
            const double fs = sets_.front().set.fs;
            const double auc = stats::activation_difference_auc(
                std::span<const double>(a->second.data(), static_cast<std::size_t>(a->second.size())),
                std::span<const double>(b->second.data(), static_cast<std::size_t>(b->second.size())), fs);
            out["auc"].push_back({{"stimulus", stim}, {"a", a->first}, {"b", b->first}, {"area", auc}});
          }
        }
      }

      // Unimodal vs bimodal activation paired over groups.
      std::vector<double> uni, bi;
      std::vector<std::string> paired_groups;
      if (peak.contains("AV")) {
        for (const auto& [group, av] : peak.at("AV")) {
          std::vector<double> u;
          for (const char* st : {"A", "V"}) {
            if (peak.contains(st) && peak.at(st).contains(group)) u.push_back(peak.at(st).at(group));
          }
          if (u.empty()) continue;
          uni.push_back((u.size() == 2 ? 0.5 * (u[0] + u[1]) : u[0]));
          bi.push_back(av);
          paired_groups.push_back(group);
        }
      }
      if (uni.size() >= 2) {
        try {
          const auto t = stats::paired_t_test(uni, bi, stats::Tail::one, "unimodal vs AV");
          auto j = ojson::parse(stats::to_json(t));
          j["groups"] = paired_groups;
          out["paired_t_test"] = j;
        } catch (const Error& e) {
          out["paired_t_test"] = {{"skipped", to_string(e.code())}};
        }
      } else {
        out["paired_t_test"] = {{"skipped", "needs AV and unimodal sets for at least two groups"}};
      }
      writer_.write("report/report.json", out.dump(2) + "\n");
      return 0;
    });
  }

  void write_manifest() {
    ojson m;
    m["command"] = opts_.command;
    m["config"] = ojson::parse(config_to_json(cfg_));
    ojson o;
    o["stimulus"] = opts_.stimulus ? ojson(*opts_.stimulus) : ojson(nullptr);
    o["band"] = opts_.band;
    o["metric"] = opts_.metric;
    o["average"] = opts_.average;
    o["sweep"] = opts_.sweep ? ojson(*opts_.sweep) : ojson(nullptr);
    o["group_by_subject"] = opts_.group_by_subject;
    m["options"] = o;
    std::vector<std::string> unique_stages;
    for (const auto& s : stages_) {
      if (std::find(unique_stages.begin(), unique_stages.end(), s) == unique_stages.end()) unique_stages.push_back(s);
    }
    m["stages"] = unique_stages;
    m["inputs"] = inputs_;
    m["artifacts"] = writer_.hashes();
    m["warnings"] = lf_.warnings;
    const std::string text = m.dump(2) + "\n";
    std::ofstream out(writer_.root() / "run_manifest.json", std::ios::binary | std::ios::trunc);
    out << text;
  }

  const RunOptions& opts_;
  ArtifactWriter writer_;
  PipelineConfig cfg_;
  std::vector<NamedSet> sets_;
  std::vector<EpochSet> prepped_;
  LeadfieldModel lf_;
  std::vector<inverse::InverseKernel> kernels_;
  std::vector<std::vector<inverse::ScoutMatrix>> scouts_;
  std::vector<std::vector<connectivity::ConnectivityPair>> corr_;
  std::vector<std::string> stages_;
  std::map<std::string, std::string> inputs_;
};

void report_failure(const RunOptions& opts, const StageFailure& f) {
  ojson j;
  j["stage"] = f.stage;
  j["error"] = f.error;
  j["message"] = f.message;
  const std::string text = j.dump() + "\n";
  std::cerr << text;
  std::error_code ec;
  fs::create_directories(opts.out, ec);
  std::ofstream out(opts.out / "error.json", std::ios::trunc);
  if (out) out << text;
}

}  // namespace

int run_pipeline(const RunOptions& opts) {
  try {
    std::error_code ec;
    fs::create_directories(opts.out, ec);
    if (ec) throw StageFailure{"ingest", to_string(Errc::Io), "cannot create " + opts.out.string()};
    fs::remove(opts.out / "error.json", ec);
    Run run(opts);
    return run.execute();
  } catch (const StageFailure& f) {
    report_failure(opts, f);
    return 2;
  }
}

}  // namespace cortigraph::pipeline
