#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "permsig/dataio.hpp"
#include "permsig/diagnostics.hpp"
#include "permsig/errors.hpp"
#include "permsig/pipeline.hpp"
#include "permsig/random.hpp"

using namespace permsig;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("permsig_test_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

}  // namespace

TEST_CASE("real formatting round-trips") {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.normal() * std::pow(10.0, rng.uniform(-20.0, 20.0));
    CHECK(parse_real(format_real(v)) == v);
  }
  CHECK(format_real(0.1) == "0.1");
  CHECK_THROWS_AS(parse_real("1.5x"), ValidationError);
  CHECK_THROWS_AS(parse_real(""), ValidationError);
}

TEST_CASE("csv traces") {
  std::istringstream in("t,x,y\n0,1,2\n10,3,4\n20,5,6.5\n");
  const auto t = read_trace(in, TraceFormat::csv_txy);
  CHECK(t.size() == 3);
  CHECK(t.y.back() == 6.5);

  std::istringstream bad("t,x,y\n0,1,2\n10,zz,4\n");
  try {
    read_trace(bad, TraceFormat::csv_txy);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  std::istringstream no_header("0,1,2\n1,2,3\n");
  CHECK_THROWS_AS(read_trace(no_header, TraceFormat::csv_txy), ParseError);
  std::istringstream short_trace("t,x,y\n0,1,2\n");
  CHECK_THROWS_AS(read_trace(short_trace, TraceFormat::csv_txy), LengthError);
}

TEST_CASE("mcyt_like traces ignore the extra channels") {
  std::istringstream in("# x y p az alt\n1 2 300 10 20\n3 4 310 11 21\n\n5 6 0 0 0\n");
  const auto t = read_trace(in, TraceFormat::mcyt_like);
  CHECK(t.x == std::vector<double>{1, 3, 5});
  CHECK(t.y == std::vector<double>{2, 4, 6});
  std::istringstream bad("1 2\n3\n");
  CHECK_THROWS_AS(read_trace(bad, TraceFormat::mcyt_like), ParseError);
}

TEST_CASE("trace write/load round trip is exact") {
  TempDir dir("trace");
  Rng rng(2);
  SignatureTrace t;
  for (int i = 0; i < 500; ++i) {
    t.x.push_back(rng.normal() * 1e3);
    t.y.push_back(rng.uniform() / 3.0);
  }
  save_trace(dir.path / "a.csv", t);
  const auto back = load_trace(dir.path / "a.csv", TraceFormat::csv_txy);
  CHECK(back.x == t.x);
  CHECK(back.y == t.y);
}

TEST_CASE("manifest validation") {
  TempDir dir("manifest");
  spit(dir.path / "g1.csv", "t,x,y\n0,0,0\n1,1,1\n");
  spit(dir.path / "f1.csv", "t,x,y\n0,0,0\n1,1,2\n");
  DatasetManifest m;
  m.root = dir.path;
  m.subjects = {{"s1", {"g1.csv"}, {"f1.csv"}}};
  CHECK_NOTHROW(m.validate());

  auto overlap = m;
  overlap.subjects[0].forgery_files.push_back("g1.csv");
  CHECK_THROWS_AS(overlap.validate(), ValidationError);

  auto twice = m;
  twice.subjects.push_back({"s2", {"g1.csv"}, {}});
  CHECK_THROWS_AS(twice.validate(), ValidationError);

  auto dup_subject = m;
  dup_subject.subjects.push_back({"s1", {}, {}});
  CHECK_THROWS_AS(dup_subject.validate(false), ValidationError);

  auto missing = m;
  missing.subjects[0].genuine_files.push_back("nope.csv");
  CHECK_THROWS_AS(missing.validate(), ValidationError);
  CHECK_NOTHROW(missing.validate(false));

  // Saved relative to the manifest's directory and reloaded.
  auto rel = m;
  rel.root = ".";
  save_manifest(dir.path / "manifest.json", rel);
  const auto loaded = load_manifest(dir.path / "manifest.json");
  REQUIRE(loaded.subjects.size() == 1);
  const auto entries = manifest_entries(loaded);
  REQUIRE(entries.size() == 2);
  CHECK(entries[1].label == Label::forgery);
  CHECK(entries[1].sample_index == 1);
  const auto t = load_entry(entries[1], loaded.format);
  CHECK(t.subject_id == "s1");
  CHECK(t.label == Label::forgery);
  CHECK(t.y.back() == 2.0);
}

TEST_CASE("feature CSV and JSON round trips") {
  Rng rng(3);
  std::vector<FeatureVector> fs_in;
  for (int i = 0; i < 20; ++i) {
    FeatureVector v;
    v.subject_id = "s" + std::to_string(i % 3);
    v.label = i % 2 ? Label::forgery : Label::genuine;
    v.sample_index = i + 1;
    FeaturePoint p;
    for (double& x : p) x = rng.uniform();
    v.set_values(p);
    fs_in.push_back(v);
  }
  std::stringstream csv;
  write_features_csv(csv, fs_in);
  CHECK(csv.str().rfind("subject_id,sample_index,label,h_x,c_x,f_x,h_y,c_y,f_y\n", 0) == 0);
  const auto from_csv = read_features_csv(csv);
  REQUIRE(from_csv.size() == fs_in.size());
  std::stringstream js;
  write_features_json(js, fs_in, {});
  const auto from_json = read_features_json(js);
  REQUIRE(from_json.size() == fs_in.size());
  for (std::size_t i = 0; i < fs_in.size(); ++i) {
    CHECK(from_csv[i].values() == fs_in[i].values());
    CHECK(from_csv[i].subject_id == fs_in[i].subject_id);
    CHECK(from_csv[i].label == fs_in[i].label);
    CHECK(from_csv[i].sample_index == fs_in[i].sample_index);
    CHECK(from_json[i].values() == fs_in[i].values());
  }

  std::stringstream empty;
  write_features_csv(empty, {});
  CHECK(read_features_csv(empty).empty());
}

TEST_CASE("model JSON round trip is lossless") {
  Rng rng(4);
  std::vector<FeaturePoint> pts(30);
  for (auto& p : pts) {
    for (double& v : p) v = 0.4 + 0.05 * rng.normal();
  }
  const OcSvmModel m = train(pts, {});
  const std::string text = model_to_json(m);
  const OcSvmModel back = model_from_json(text);
  CHECK(back.alphas == m.alphas);
  CHECK(back.support_vectors == m.support_vectors);
  CHECK(back.offset == m.offset);
  CHECK(back.config.nu == m.config.nu);
  CHECK(back.config.sigma_sq == m.config.sigma_sq);
  CHECK(back.training_size == m.training_size);
  CHECK(model_to_json(back) == text);
  for (const auto& p : pts) CHECK(decision_value(back, p) == decision_value(m, p));

  CHECK_THROWS_AS(model_from_json("{"), ParseError);
  std::string wrong = text;
  wrong.replace(wrong.find("\"h_x\""), 5, "\"zzz\"");
  CHECK_THROWS_AS(model_from_json(wrong), ValidationError);
}

TEST_CASE("parallelepiped JSON keeps dimension order") {
  ParallelepipedModel m;
  m.dimensions = {"mean_h_x", "sd_h_x", "mean_h_y", "sd_h_y"};
  m.boxes["H1"] = {{0.1, 0.2}, {0, 0.01}, {0.3, 0.4}, {0.001, 0.002}};
  m.boxes["H2"] = {{0.5, 0.6}, {0, 0.02}, {0.7, 0.8}, {0.003, 0.004}};
  const auto back = parallelepiped_from_json(parallelepiped_to_json(m));
  CHECK(back.dimensions == m.dimensions);
  REQUIRE(back.boxes.size() == 2);
  CHECK(back.boxes.at("H2")[2].min == 0.7);
  CHECK(back.boxes.at("H1")[3].max == 0.002);
}

TEST_CASE("synthetic generator") {
  SynthConfig c;
  c.n_subjects = 3;
  c.genuine_per_subject = 4;
  c.forgeries_per_subject = 2;
  const auto a = generate_synthetic(c);
  const auto b = generate_synthetic(c);
  REQUIRE(a.size() == 18);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].x == b[i].x);
    CHECK(a[i].y == b[i].y);
  }
  CHECK(a[0].subject_id == "s000");
  CHECK(a[4].label == Label::forgery);

  auto other = c;
  other.seed = c.seed + 1;
  CHECK(generate_synthetic(other)[0].x != a[0].x);

  auto still = c;
  still.genuine_jitter = 0.0;
  const auto z = generate_synthetic(still);
  for (int j = 1; j < 4; ++j) {
    CHECK(z[static_cast<std::size_t>(j)].x == z[0].x);
    CHECK(z[static_cast<std::size_t>(j)].y == z[0].y);
  }

  auto bad = c;
  bad.forgery_distortion = -1.0;
  CHECK_THROWS_AS(generate_synthetic(bad), ParameterError);
  bad = c;
  bad.n_subjects = 0;
  CHECK_THROWS_AS(generate_synthetic(bad), ParameterError);
}

TEST_CASE("synthetic dataset on disk is byte-identical across runs") {
  TempDir d1("synth1");
  TempDir d2("synth2");
  SynthConfig c;
  c.n_subjects = 2;
  c.genuine_per_subject = 3;
  c.forgeries_per_subject = 2;
  const auto m1 = write_synthetic_dataset(c, d1.path);
  const auto m2 = write_synthetic_dataset(c, d2.path);
  CHECK(slurp(m1) == slurp(m2));
  CHECK(slurp(d1.path / "s001" / "f02.csv") == slurp(d2.path / "s001" / "f02.csv"));

  const auto manifest = load_manifest(m1);
  FeatureOptions opt;
  opt.jobs = 2;
  const auto result = extract_features(manifest, opt);
  CHECK(result.failures.empty());
  CHECK(result.features.size() == 10);
  CHECK(result.features.front().subject_id == "s000");
  CHECK(result.features.front().label == Label::genuine);

  // A broken file is reported without stopping the run.
  spit(d1.path / "s000" / "g02.csv", "t,x,y\n0,1\n");
  const auto partial = extract_features(load_manifest(m1), opt);
  CHECK(partial.failures.size() == 1);
  CHECK(partial.features.size() == 9);
}
