#include "cortigraph/dataio.hpp"

#include "cortigraph/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace cortigraph {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr std::array<char, 4> kEpbMagic{'E', 'P', 'B', '1'};

static_assert(std::endian::native == std::endian::little, ".epb I/O assumes a little-endian host");

const std::set<std::string> kStimuli{"A", "V", "AV", "A50V", "V50A"};
const std::set<std::string> kGroups{"Y", "T", "M"};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json_file(const fs::path& path, Errc on_error) {
  const std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    fail(on_error, path.string() + ": " + e.what());
  }
}

template <typename T>
T get_field(const json& j, const char* key, Errc on_error) {
  if (!j.contains(key)) fail(on_error, std::string("missing key '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(on_error, std::string("bad value for '") + key + "': " + e.what());
  }
}

void append_double(std::string& out, double v) {
  std::array<char, 32> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc{}) fail(Errc::Io, "number formatting failed");
  out.append(buf.data(), end);
}

}  // namespace

std::vector<std::string> LeadfieldModel::scout_names() const {
  std::vector<std::string> names;
  names.reserve(scouts.size());
  for (const auto& s : scouts) names.push_back(s.name);
  return names;
}

void validate(const EpochSet& set) {
  if (!(set.fs > 0.0) || !std::isfinite(set.fs)) fail(Errc::InvalidRange, "fs must be positive");
  if (set.epochs.empty()) fail(Errc::ShapeMismatch, "epoch set has no epochs");
  const auto rows = set.epochs.front().rows();
  const auto cols = set.epochs.front().cols();
  if (rows < 1 || cols < 1) fail(Errc::ShapeMismatch, "empty epoch");
  for (const auto& e : set.epochs) {
    if (e.rows() != rows || e.cols() != cols) fail(Errc::ShapeMismatch, "epochs differ in shape");
    if (!e.allFinite()) fail(Errc::NonFiniteValue, "epoch contains non-finite samples");
  }
  if (!(set.t0_offset < 0.0) || !(set.t0_offset + set.duration() > 0.0)) {
    fail(Errc::InvalidRange, "stimulus onset must fall strictly inside the epoch");
  }
  if (!kStimuli.contains(set.stimulus)) fail(Errc::InvalidRange, "unknown stimulus label '" + set.stimulus + "'");
  if (!kGroups.contains(set.group)) fail(Errc::InvalidRange, "unknown group label '" + set.group + "'");
}

EpochSet load_epochset(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.json";
  if (!fs::is_regular_file(manifest_path)) fail(Errc::MissingManifest, "no manifest.json in " + dir.string());
  const json m = parse_json_file(manifest_path, Errc::MissingManifest);

  EpochSet set;
  set.fs = get_field<double>(m, "fs", Errc::MissingManifest);
  set.t0_offset = get_field<double>(m, "t0_offset", Errc::MissingManifest);
  set.stimulus = get_field<std::string>(m, "stimulus", Errc::MissingManifest);
  set.group = get_field<std::string>(m, "group", Errc::MissingManifest);
  set.subject_id = get_field<std::string>(m, "subject_id", Errc::MissingManifest);
  const auto n_channels = get_field<long long>(m, "n_channels", Errc::MissingManifest);
  const auto n_samples = get_field<long long>(m, "n_samples", Errc::MissingManifest);
  const auto files = get_field<std::vector<std::string>>(m, "epochs", Errc::MissingManifest);
  if (n_channels < 1 || n_samples < 1) fail(Errc::ShapeMismatch, "manifest declares an empty epoch shape");

  const std::size_t n_values = static_cast<std::size_t>(n_channels) * static_cast<std::size_t>(n_samples);
  const std::size_t expected_bytes = kEpbMagic.size() + n_values * sizeof(float);
  std::vector<float> buf(n_values);
  for (const auto& rel : files) {
    const fs::path p = dir / rel;
    std::ifstream in(p, std::ios::binary);
    if (!in) fail(Errc::Io, "cannot open epoch file " + p.string());
    const auto size = fs::file_size(p);
    std::array<char, 4> magic{};
    in.read(magic.data(), magic.size());
    if (!in || magic != kEpbMagic) fail(Errc::BadMagic, p.string());
    if (size != expected_bytes) {
      fail(Errc::ShapeMismatch, p.string() + " has " + std::to_string(size) + " bytes, expected " +
                                    std::to_string(expected_bytes));
    }
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n_values * sizeof(float)));
    if (!in) fail(Errc::Io, "short read on " + p.string());
    Eigen::MatrixXd e(n_channels, n_samples);
    for (long long c = 0; c < n_channels; ++c) {
      for (long long t = 0; t < n_samples; ++t) {
        e(c, t) = static_cast<double>(buf[static_cast<std::size_t>(c * n_samples + t)]);
      }
    }
    set.epochs.push_back(std::move(e));
  }
  validate(set);
  return set;
}

void write_epochset(const EpochSet& set, const fs::path& dir) {
  validate(set);
  fs::create_directories(dir);
  json m;
  m["fs"] = set.fs;
  m["t0_offset"] = set.t0_offset;
  m["stimulus"] = set.stimulus;
  m["group"] = set.group;
  m["subject_id"] = set.subject_id;
  m["n_channels"] = set.n_channels();
  m["n_samples"] = set.n_samples();
  std::vector<std::string> names;
  const std::size_t nc = set.n_channels();
  const std::size_t ns = set.n_samples();
  std::vector<float> buf(nc * ns);
  for (std::size_t i = 0; i < set.n_epochs(); ++i) {
    std::ostringstream name;
    name << "epoch_" << std::setw(4) << std::setfill('0') << i << ".epb";
    names.push_back(name.str());
    const auto& e = set.epochs[i];
    for (std::size_t c = 0; c < nc; ++c) {
      for (std::size_t t = 0; t < ns; ++t) {
        buf[c * ns + t] = static_cast<float>(e(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(t)));
      }
    }
    std::ofstream out(dir / names.back(), std::ios::binary | std::ios::trunc);
    if (!out) fail(Errc::Io, "cannot write " + (dir / names.back()).string());
    out.write(kEpbMagic.data(), kEpbMagic.size());
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
  }
  m["epochs"] = names;
  std::ofstream out(dir / "manifest.json", std::ios::trunc);
  if (!out) fail(Errc::Io, "cannot write manifest in " + dir.string());
  out << m.dump(2) << '\n';
}

Eigen::MatrixXd read_matrix_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::Io, "cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (true) {
      while (p < end && *p == ' ') ++p;
      double v = 0.0;
      auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc{}) fail(Errc::RaggedCsv, path.string() + ":" + std::to_string(line_no) + ": bad number");
      row.push_back(v);
      p = next;
      while (p < end && *p == ' ') ++p;
      if (p == end) break;
      if (*p != ',') fail(Errc::RaggedCsv, path.string() + ":" + std::to_string(line_no) + ": expected ','");
      ++p;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      fail(Errc::RaggedCsv, path.string() + ":" + std::to_string(line_no) + ": row length differs");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail(Errc::RaggedCsv, path.string() + ": empty matrix");
  Eigen::MatrixXd m(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  }
  if (!m.allFinite()) fail(Errc::NonFiniteValue, path.string());
  return m;
}

std::string matrix_to_csv(const Eigen::MatrixXd& m, const std::vector<std::string>& col_names) {
  std::string out;
  if (!col_names.empty()) {
    for (std::size_t i = 0; i < col_names.size(); ++i) {
      if (i) out += ',';
      out += col_names[i];
    }
    out += '\n';
  }
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out += ',';
      append_double(out, m(r, c));
    }
    out += '\n';
  }
  return out;
}

LeadfieldModel load_leadfield(const fs::path& gain_csv, const fs::path& atlas_json) {
  LeadfieldModel lf;
  lf.gain = read_matrix_csv(gain_csv);
  const json atlas = parse_json_file(atlas_json, Errc::InvalidConfig);
  if (!atlas.contains("scouts") || !atlas["scouts"].is_array()) fail(Errc::InvalidConfig, "atlas needs a 'scouts' array");

  const std::size_t n_sources = lf.n_sources();
  std::vector<int> owner(n_sources, -1);
  std::set<std::string> seen_names;
  for (const auto& js : atlas["scouts"]) {
    Scout s;
    s.name = get_field<std::string>(js, "name", Errc::InvalidConfig);
    const auto idx = get_field<std::vector<long long>>(js, "sources", Errc::InvalidConfig);
    if (js.contains("lobe")) s.lobe = js["lobe"].get<std::string>();
    if (!seen_names.insert(s.name).second) fail(Errc::DuplicateName, "scout '" + s.name + "' listed twice");
    if (idx.empty()) fail(Errc::InvalidConfig, "scout '" + s.name + "' has no sources");
    for (long long i : idx) {
      if (i < 0 || static_cast<std::size_t>(i) >= n_sources) {
        fail(Errc::IndexOutOfRange, "scout '" + s.name + "' references source " + std::to_string(i) + " of " +
                                        std::to_string(n_sources));
      }
      auto& o = owner[static_cast<std::size_t>(i)];
      if (o >= 0) {
        fail(Errc::DuplicateSourceAssignment,
             "source " + std::to_string(i) + " in '" + s.name + "' and '" + lf.scouts[static_cast<std::size_t>(o)].name + "'");
      }
      o = static_cast<int>(lf.scouts.size());
      s.sources.push_back(static_cast<std::size_t>(i));
    }
    lf.scouts.push_back(std::move(s));
  }
  if (lf.scouts.empty()) fail(Errc::InvalidConfig, "atlas has no scouts");

  // Average-referenced gain can have rank at most n_channels - 1.
  const Eigen::MatrixXd centered = lf.gain.rowwise() - lf.gain.colwise().mean();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(centered * centered.transpose(), Eigen::EigenvaluesOnly);
  const double top = eig.eigenvalues().maxCoeff();
  const auto rank = (eig.eigenvalues().array() > 1e-10 * top).count();
  if (top <= 0.0 || rank < static_cast<Eigen::Index>(lf.n_channels()) - 1) {
    lf.warnings.push_back("average-referenced gain is rank deficient (rank " + std::to_string(rank) + " of " +
                          std::to_string(lf.n_channels() - 1) + ")");
  }
  return lf;
}

void write_leadfield(const LeadfieldModel& lf, const fs::path& gain_csv, const fs::path& atlas_json) {
  {
    std::ofstream out(gain_csv, std::ios::trunc);
    if (!out) fail(Errc::Io, "cannot write " + gain_csv.string());
    out << matrix_to_csv(lf.gain);
  }
  json atlas;
  atlas["scouts"] = json::array();
  for (const auto& s : lf.scouts) {
    json js{{"name", s.name}, {"sources", s.sources}};
    if (!s.lobe.empty()) js["lobe"] = s.lobe;
    atlas["scouts"].push_back(std::move(js));
  }
  std::ofstream out(atlas_json, std::ios::trunc);
  if (!out) fail(Errc::Io, "cannot write " + atlas_json.string());
  out << atlas.dump(2) << '\n';
}

void validate(const PipelineConfig& c) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) fail(Errc::InvalidRange, what);
  };
  require(c.band_lo > 0.0 && c.band_lo < c.band_hi, "need 0 < band_lo < band_hi");
  require(c.filter_order >= 2 && c.filter_order % 2 == 0, "filter_order must be even and >= 2");
  require(c.rho_th >= 0.0 && c.rho_th <= 1.0, "rho_th must lie in [0, 1]");
  require(c.baseline_window.first < c.baseline_window.second, "baseline_window must be non-empty");
  require(c.epoch_window.first < 0.0 && c.epoch_window.second > 0.0, "epoch_window must straddle stimulus onset");
  require(c.baseline_window.first >= c.epoch_window.first - 1e-9 && c.baseline_window.second <= c.epoch_window.second + 1e-9,
          "baseline_window must lie inside epoch_window");
  require(c.snr_assumed > 0.0, "snr_assumed must be positive");
  require(c.wavelet_fc > 0.0 && c.wavelet_fwhm > 0.0, "wavelet parameters must be positive");
  require(c.tf_freq_lo > 0.0 && c.tf_freq_lo <= c.tf_freq_hi && c.tf_freq_step > 0.0, "bad time-frequency grid");
  for (const auto& [name, band] : c.freq_bands) {
    require(band.first >= 0.0 && band.first < band.second, "band '" + name + "' must have lo < hi");
  }
  require(c.k_max >= 2, "k_max must be >= 2");
  require(c.n_init >= 1, "n_init must be >= 1");
  require(c.n_folds >= 2, "n_folds must be >= 2");
  require(c.n_trees >= 1, "n_trees must be >= 1");
  require(c.knn_k >= 1, "knn_k must be >= 1");
}

PipelineConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(Errc::InvalidConfig, e.what());
  }
  if (!j.is_object()) fail(Errc::InvalidConfig, "config must be a JSON object");

  PipelineConfig c;
  auto window = [](const json& v) {
    const auto p = v.get<std::vector<double>>();
    if (p.size() != 2) throw std::invalid_argument("window needs two numbers");
    return Window{p[0], p[1]};
  };
  for (const auto& [key, v] : j.items()) {
    try {
      if (key == "band_lo") c.band_lo = v.get<double>();
      else if (key == "band_hi") c.band_hi = v.get<double>();
      else if (key == "filter_order") c.filter_order = v.get<int>();
      else if (key == "rho_th") c.rho_th = v.get<double>();
      else if (key == "baseline_window") c.baseline_window = window(v);
      else if (key == "epoch_window") c.epoch_window = window(v);
      else if (key == "snr_assumed") c.snr_assumed = v.get<double>();
      else if (key == "wavelet_fc") c.wavelet_fc = v.get<double>();
      else if (key == "wavelet_fwhm") c.wavelet_fwhm = v.get<double>();
      else if (key == "tf_freq_lo") c.tf_freq_lo = v.get<double>();
      else if (key == "tf_freq_hi") c.tf_freq_hi = v.get<double>();
      else if (key == "tf_freq_step") c.tf_freq_step = v.get<double>();
      else if (key == "freq_bands") {
        c.freq_bands.clear();
        for (const auto& [name, b] : v.items()) c.freq_bands[name] = window(b);
      } else if (key == "k_max") c.k_max = v.get<int>();
      else if (key == "n_init") c.n_init = v.get<int>();
      else if (key == "n_folds") c.n_folds = v.get<int>();
      else if (key == "n_trees") c.n_trees = v.get<int>();
      else if (key == "knn_k") c.knn_k = v.get<int>();
      else if (key == "rng_seed") c.rng_seed = v.get<unsigned long long>();
      else fail(Errc::InvalidConfig, "unknown config key '" + key + "'");
    } catch (const json::exception& e) {
      fail(Errc::InvalidConfig, "bad value for '" + key + "': " + e.what());
    } catch (const std::invalid_argument& e) {
      fail(Errc::InvalidConfig, "bad value for '" + key + "': " + e.what());
    }
  }
  validate(c);
  return c;
}

PipelineConfig load_config(const fs::path& path) { return parse_config(read_file(path)); }

std::string config_to_json(const PipelineConfig& c) {
  json j;
  j["band_lo"] = c.band_lo;
  j["band_hi"] = c.band_hi;
  j["filter_order"] = c.filter_order;
  j["rho_th"] = c.rho_th;
  j["baseline_window"] = {c.baseline_window.first, c.baseline_window.second};
  j["epoch_window"] = {c.epoch_window.first, c.epoch_window.second};
  j["snr_assumed"] = c.snr_assumed;
  j["wavelet_fc"] = c.wavelet_fc;
  j["wavelet_fwhm"] = c.wavelet_fwhm;
  j["tf_freq_lo"] = c.tf_freq_lo;
  j["tf_freq_hi"] = c.tf_freq_hi;
  j["tf_freq_step"] = c.tf_freq_step;
  json bands = json::object();
  for (const auto& [name, b] : c.freq_bands) bands[name] = {b.first, b.second};
  j["freq_bands"] = bands;
  j["k_max"] = c.k_max;
  j["n_init"] = c.n_init;
  j["n_folds"] = c.n_folds;
  j["n_trees"] = c.n_trees;
  j["knn_k"] = c.knn_k;
  j["rng_seed"] = c.rng_seed;
  return j.dump(2);
}

}  // namespace cortigraph
