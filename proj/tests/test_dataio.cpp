#include "cortigraph/atlas.hpp"
#include "cortigraph/dataio.hpp"
#include "cortigraph/error.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace cortigraph;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("cortigraph_dataio_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

EpochSet random_set(std::size_t epochs, std::size_t channels, std::size_t samples, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 10.0);
  EpochSet s;
  s.fs = 500.0;
  s.t0_offset = -0.5;
  s.stimulus = "AV";
  s.group = "Y";
  s.subject_id = "s01";
  for (std::size_t e = 0; e < epochs; ++e) {
    Eigen::MatrixXd m(channels, samples);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = nd(rng);
    s.epochs.push_back(m);
  }
  return s;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return Errc::Io;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

}  // namespace

TEST_CASE("epoch set round trip keeps shape, labels and float32 payload") {
  const auto dir = scratch("roundtrip");
  const auto set = random_set(80, 31, 700, 1);
  write_epochset(set, dir);
  const auto back = load_epochset(dir);
  CHECK(back.n_epochs() == 80);
  CHECK(back.n_channels() == 31);
  CHECK(back.n_samples() == 700);
  CHECK(back.fs == 500.0);
  CHECK(back.t0_offset == -0.5);
  CHECK(back.stimulus == "AV");
  CHECK(back.group == "Y");
  CHECK(back.subject_id == "s01");
  double worst = 0.0;
  for (std::size_t e = 0; e < 80; ++e)
    worst = std::max(worst, (back.epochs[e] - set.epochs[e].cast<float>().cast<double>()).cwiseAbs().maxCoeff());
  CHECK(worst == 0.0);

  // Rewriting what was read gives identical bytes.
  const auto dir2 = scratch("roundtrip2");
  write_epochset(back, dir2);
  CHECK(slurp(dir / "epoch_0000.epb") == slurp(dir2 / "epoch_0000.epb"));
  CHECK(slurp(dir / "manifest.json") == slurp(dir2 / "manifest.json"));
}

TEST_CASE("loading failures") {
  SUBCASE("empty directory") {
    const auto dir = scratch("empty");
    CHECK(code_of([&] { load_epochset(dir); }) == Errc::MissingManifest);
  }
  SUBCASE("truncated epoch file") {
    const auto dir = scratch("trunc");
    write_epochset(random_set(2, 3, 400, 2), dir);
    const auto p = dir / "epoch_0001.epb";
    fs::resize_file(p, fs::file_size(p) - 4);
    CHECK(code_of([&] { load_epochset(dir); }) == Errc::ShapeMismatch);
  }
  SUBCASE("bad magic") {
    const auto dir = scratch("magic");
    write_epochset(random_set(1, 3, 400, 3), dir);
    {
      std::fstream f(dir / "epoch_0000.epb", std::ios::in | std::ios::out | std::ios::binary);
      f.write("XXXX", 4);
    }
    CHECK(code_of([&] { load_epochset(dir); }) == Errc::BadMagic);
  }
  SUBCASE("non-finite sample") {
    auto set = random_set(1, 3, 400, 4);
    set.epochs[0](1, 7) = std::numeric_limits<double>::quiet_NaN();
    CHECK(code_of([&] { validate(set); }) == Errc::NonFiniteValue);
  }
  SUBCASE("unknown labels") {
    auto set = random_set(1, 3, 400, 5);
    set.group = "Q";
    CHECK(code_of([&] { validate(set); }) == Errc::InvalidRange);
  }
}

TEST_CASE("leadfield with the 62 reference scouts") {
  const auto dir = scratch("leadfield");
  const auto names = atlas::mindboggle_scouts();
  REQUIRE(names.size() == 62);
  const std::size_t per = 3;
  LeadfieldModel lf;
  lf.gain = Eigen::MatrixXd::Random(31, Eigen::Index(62 * per));
  for (std::size_t s = 0; s < 62; ++s) lf.scouts.push_back({names[s], {s * per, s * per + 1, s * per + 2}, ""});
  write_leadfield(lf, dir / "leadfield.csv", dir / "atlas.json");
  const auto back = load_leadfield(dir / "leadfield.csv", dir / "atlas.json");
  CHECK(back.n_scouts() == 62);
  CHECK(back.n_channels() == 31);
  CHECK(back.n_sources() == 186);
  CHECK((back.gain - lf.gain).cwiseAbs().maxCoeff() == 0.0);
  CHECK(back.scout_names() == names);
}

TEST_CASE("atlas index checks") {
  const auto dir = scratch("atlas");
  write_text(dir / "g.csv", "1,2,3\n4,5,6\n");
  SUBCASE("index equal to n_sources") {
    write_text(dir / "a.json", R"({"scouts":[{"name":"x","sources":[0,3]}]})");
    CHECK(code_of([&] { load_leadfield(dir / "g.csv", dir / "a.json"); }) == Errc::IndexOutOfRange);
  }
  SUBCASE("shared source") {
    write_text(dir / "a.json", R"({"scouts":[{"name":"x","sources":[0,1]},{"name":"y","sources":[1,2]}]})");
    CHECK(code_of([&] { load_leadfield(dir / "g.csv", dir / "a.json"); }) == Errc::DuplicateSourceAssignment);
  }
  SUBCASE("ragged csv") {
    write_text(dir / "r.csv", "1,2,3\n4,5\n");
    write_text(dir / "a.json", R"({"scouts":[{"name":"x","sources":[0]}]})");
    CHECK(code_of([&] { load_leadfield(dir / "r.csv", dir / "a.json"); }) == Errc::RaggedCsv);
  }
}

TEST_CASE("configuration") {
  const auto c = parse_config("{}");
  CHECK(c.band_lo == 0.5);
  CHECK(c.band_hi == 40.0);
  CHECK(c.rho_th == 0.85);
  CHECK(c.n_folds == 10);
  CHECK(code_of([] { parse_config(R"({"rho_th": 1.5})"); }) == Errc::InvalidRange);
  CHECK(parse_config(R"({"n_folds": 10})").n_folds == 10);
  CHECK(parse_config(R"({"rho_th": 0.7, "k_max": 8})").k_max == 8);
  CHECK(code_of([] { parse_config(R"({"no_such_key": 1})"); }) == Errc::InvalidConfig);
  CHECK(code_of([] { parse_config("[1,2]"); }) == Errc::InvalidConfig);

  // Serialized config parses back to the same values.
  auto custom = c;
  custom.rho_th = 0.6;
  custom.freq_bands["alpha"] = {8.5, 12.5};
  const auto again = parse_config(config_to_json(custom));
  CHECK(again.rho_th == 0.6);
  CHECK(again.freq_bands.at("alpha").first == 8.5);
  CHECK(config_to_json(again) == config_to_json(custom));
}

TEST_CASE("matrix csv round trip is exact") {
  const auto dir = scratch("csv");
  Eigen::MatrixXd m = Eigen::MatrixXd::Random(4, 5) * 1e3;
  m(0, 0) = 1.0 / 3.0;
  write_text(dir / "m.csv", matrix_to_csv(m));
  CHECK(read_matrix_csv(dir / "m.csv") == m);
}
