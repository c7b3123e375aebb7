#include "permsig/dataio.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "permsig/errors.hpp"

namespace permsig {
namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr std::string_view kFeatureHeader =
    "subject_id,sample_index,label,h_x,c_x,f_x,h_y,c_y,f_y";
constexpr int kModelVersion = 1;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  for (;;) {
    const std::size_t next = line.find(sep, pos);
    out.push_back(trim(line.substr(pos, next == std::string_view::npos ? next : next - pos)));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

std::vector<std::string_view> split_whitespace(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < line.size()) {
    pos = line.find_first_not_of(" \t\r", pos);
    if (pos == std::string_view::npos) break;
    const std::size_t end = std::min(line.find_first_of(" \t\r", pos), line.size());
    out.push_back(line.substr(pos, end - pos));
    pos = end;
  }
  return out;
}

double parse_real_at(std::string_view text, std::size_t line) {
  try {
    return parse_real(text);
  } catch (const ValidationError& e) {
    throw ParseError("line " + std::to_string(line) + ": " + e.what(), line);
  }
}

int parse_int_at(std::string_view text, std::size_t line) {
  int v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ParseError("line " + std::to_string(line) + ": invalid integer '" + std::string(text) + "'",
                     line);
  }
  return v;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

json roc_json(std::span<const RocPoint> roc) {
  json arr = json::array();
  for (const auto& p : roc) arr.push_back({{"threshold", p.threshold}, {"far", p.far}, {"frr", p.frr}});
  return arr;
}

FeatureVector feature_from_json(const json& j) {
  FeatureVector fv;
  fv.subject_id = j.at("subject_id").get<std::string>();
  fv.sample_index = j.at("sample_index").get<int>();
  fv.label = parse_label(j.at("label").get<std::string>());
  FeaturePoint v{};
  for (std::size_t k = 0; k < kFeatureCount; ++k) v[k] = j.at(kFeatureNames[k]).get<double>();
  fv.set_values(v);
  return fv;
}

}  // namespace

std::string format_real(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_real(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ValidationError("invalid real '" + std::string(text) + "'");
  }
  return v;
}

TraceFormat parse_trace_format(std::string_view text) {
  if (text == "csv_txy") return TraceFormat::csv_txy;
  if (text == "mcyt_like") return TraceFormat::mcyt_like;
  throw ParameterError("unknown trace format '" + std::string(text) + "'");
}

std::string_view to_string(TraceFormat f) {
  return f == TraceFormat::csv_txy ? "csv_txy" : "mcyt_like";
}

SignatureTrace read_trace(std::istream& in, TraceFormat format) {
  SignatureTrace trace;
  std::string raw;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = trim(raw);
    if (format == TraceFormat::mcyt_like) {
      line = trim(line.substr(0, line.find('#')));
      if (line.empty()) continue;
      const auto cols = split_whitespace(line);
      if (cols.size() < 2) {
        throw ParseError("line " + std::to_string(line_no) + ": expected at least 2 columns",
                         line_no);
      }
      trace.x.push_back(parse_real_at(cols[0], line_no));
      trace.y.push_back(parse_real_at(cols[1], line_no));
      continue;
    }
    if (line.empty()) continue;
    const auto cols = split(line, ',');
    if (!header_seen) {
      if (cols.size() != 3 || cols[0] != "t" || cols[1] != "x" || cols[2] != "y") {
        throw ParseError("line " + std::to_string(line_no) + ": expected header 't,x,y'", line_no);
      }
      header_seen = true;
      continue;
    }
    if (cols.size() != 3) {
      throw ParseError("line " + std::to_string(line_no) + ": expected 3 columns, got " +
                           std::to_string(cols.size()),
                       line_no);
    }
    parse_real_at(cols[0], line_no);
    trace.x.push_back(parse_real_at(cols[1], line_no));
    trace.y.push_back(parse_real_at(cols[2], line_no));
  }
  if (trace.x.size() < 2) {
    throw LengthError("trace has " + std::to_string(trace.x.size()) + " rows; need at least 2");
  }
  return trace;
}

SignatureTrace load_trace(const fs::path& path, TraceFormat format) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open trace '" + path.string() + "'");
  try {
    return read_trace(in, format);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.line());
  } catch (const LengthError& e) {
    throw LengthError(path.string() + ": " + e.what());
  }
}

void write_trace(std::ostream& out, const SignatureTrace& trace) {
  trace.validate();
  out << "t,x,y\n";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    out << i * 10 << ',' << format_real(trace.x[i]) << ',' << format_real(trace.y[i]) << '\n';
  }
}

void save_trace(const fs::path& path, const SignatureTrace& trace) {
  std::ostringstream ss;
  write_trace(ss, trace);
  write_file(path, ss.str());
}

void DatasetManifest::validate(bool check_files) const {
  std::set<std::string> ids;
  std::set<fs::path> seen;
  for (const auto& s : subjects) {
    if (s.subject_id.empty()) throw ValidationError("manifest subject with empty id");
    if (!ids.insert(s.subject_id).second) {
      throw ValidationError("subject '" + s.subject_id + "' listed twice");
    }
    const std::set<std::string> genuine(s.genuine_files.begin(), s.genuine_files.end());
    for (const auto& f : s.forgery_files) {
      if (genuine.count(f)) {
        throw ValidationError("file '" + f + "' is listed as both genuine and forgery for subject '" +
                              s.subject_id + "'");
      }
    }
    for (const auto* list : {&s.genuine_files, &s.forgery_files}) {
      for (const auto& f : *list) {
        const fs::path p = (root / f).lexically_normal();
        if (!seen.insert(p).second) throw ValidationError("file '" + f + "' listed twice");
        if (check_files && !fs::exists(p)) {
          throw ValidationError("listed file '" + p.string() + "' does not exist");
        }
      }
    }
  }
}

std::vector<ManifestEntry> manifest_entries(const DatasetManifest& manifest) {
  std::vector<ManifestEntry> out;
  for (const auto& s : manifest.subjects) {
    int k = 0;
    for (const auto& f : s.genuine_files) out.push_back({manifest.root / f, s.subject_id, Label::genuine, ++k});
    k = 0;
    for (const auto& f : s.forgery_files) out.push_back({manifest.root / f, s.subject_id, Label::forgery, ++k});
  }
  return out;
}

DatasetManifest load_manifest(const fs::path& path, bool check_files) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what(), 0);
  }
  DatasetManifest m;
  try {
    m.format = parse_trace_format(j.value("format", std::string("csv_txy")));
    m.root = path.parent_path() / fs::path(j.value("root", std::string(".")));
    for (const auto& s : j.at("subjects")) {
      ManifestSubject subject;
      subject.subject_id = s.at("subject_id").get<std::string>();
      subject.genuine_files = s.value("genuine", std::vector<std::string>{});
      subject.forgery_files = s.value("forgery", std::vector<std::string>{});
      m.subjects.push_back(std::move(subject));
    }
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": malformed manifest: " + e.what());
  }
  m.validate(check_files);
  return m;
}

void save_manifest(const fs::path& path, const DatasetManifest& manifest) {
  json subjects = json::array();
  for (const auto& s : manifest.subjects) {
    subjects.push_back({{"subject_id", s.subject_id},
                        {"genuine", s.genuine_files},
                        {"forgery", s.forgery_files}});
  }
  const json j = {{"format", std::string(to_string(manifest.format))},
                  {"root", manifest.root.generic_string()},
                  {"subjects", subjects}};
  write_file(path, j.dump(2) + "\n");
}

SignatureTrace load_entry(const ManifestEntry& entry, TraceFormat format) {
  SignatureTrace t = load_trace(entry.path, format);
  t.subject_id = entry.subject_id;
  t.label = entry.label;
  t.sample_index = entry.sample_index;
  return t;
}

void write_features_csv(std::ostream& out, std::span<const FeatureVector> features) {
  out << kFeatureHeader << '\n';
  for (const auto& fv : features) {
    if (fv.subject_id.find_first_of(",\n\"") != std::string::npos) {
      throw ValidationError("subject id '" + fv.subject_id + "' cannot be written to CSV");
    }
    out << fv.subject_id << ',' << fv.sample_index << ',' << to_string(fv.label);
    for (double v : fv.values()) out << ',' << format_real(v);
    out << '\n';
  }
}

std::vector<FeatureVector> read_features_csv(std::istream& in) {
  std::vector<FeatureVector> out;
  std::string raw;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != kFeatureHeader) {
        throw ParseError("line " + std::to_string(line_no) + ": unexpected feature CSV header",
                         line_no);
      }
      header_seen = true;
      continue;
    }
    const auto cols = split(line, ',');
    if (cols.size() != 3 + kFeatureCount) {
      throw ParseError("line " + std::to_string(line_no) + ": expected 9 columns", line_no);
    }
    FeatureVector fv;
    fv.subject_id = std::string(cols[0]);
    fv.sample_index = parse_int_at(cols[1], line_no);
    try {
      fv.label = parse_label(cols[2]);
    } catch (const ValidationError& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what(), line_no);
    }
    FeaturePoint v{};
    for (std::size_t k = 0; k < kFeatureCount; ++k) v[k] = parse_real_at(cols[3 + k], line_no);
    fv.set_values(v);
    out.push_back(std::move(fv));
  }
  return out;
}

void write_features_json(std::ostream& out, std::span<const FeatureVector> features,
                         const FeatureRunInfo& info) {
  json rows = json::array();
  for (const auto& fv : features) {
    json r = {{"subject_id", fv.subject_id},
              {"sample_index", fv.sample_index},
              {"label", std::string(to_string(fv.label))}};
    const FeaturePoint v = fv.values();
    for (std::size_t k = 0; k < kFeatureCount; ++k) r[kFeatureNames[k]] = v[k];
    rows.push_back(std::move(r));
  }
  const json j = {{"config",
                   {{"dimension", info.ordinal.dimension},
                    {"lag", info.ordinal.lag},
                    {"resample_length", info.resample_length}}},
                  {"features", rows}};
  out << j.dump(2) << '\n';
}

std::vector<FeatureVector> read_features_json(std::istream& in) {
  std::vector<FeatureVector> out;
  try {
    const json j = json::parse(in);
    for (const auto& r : j.at("features")) out.push_back(feature_from_json(r));
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed feature JSON: ") + e.what(), 0);
  }
  return out;
}

std::vector<FeatureVector> load_features(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open features '" + path.string() + "'");
  return path.extension() == ".json" ? read_features_json(in) : read_features_csv(in);
}

std::string model_to_json(const OcSvmModel& model) {
  if (!model.trained()) throw StateError("cannot serialize an untrained model");
  json svs = json::array();
  for (const auto& sv : model.support_vectors) svs.push_back(sv);
  json schema = json::array();
  for (const char* name : kFeatureNames) schema.push_back(name);
  const json j = {{"version", kModelVersion},
                  {"nu", model.config.nu},
                  {"sigma_sq", model.config.sigma_sq},
                  {"b", model.offset},
                  {"support_vectors", svs},
                  {"alphas", model.alphas},
                  {"training_size", model.training_size},
                  {"feature_schema", schema}};
  return j.dump(2) + "\n";
}

OcSvmModel model_from_json(std::string_view text) {
  OcSvmModel model;
  try {
    const json j = json::parse(text);
    if (j.at("version").get<int>() != kModelVersion) {
      throw ValidationError("unsupported model version");
    }
    std::vector<std::string> schema = j.at("feature_schema").get<std::vector<std::string>>();
    if (!std::equal(schema.begin(), schema.end(), kFeatureNames.begin(), kFeatureNames.end())) {
      throw ValidationError("model feature schema does not match h_x,c_x,f_x,h_y,c_y,f_y");
    }
    model.config.nu = j.at("nu").get<double>();
    model.config.sigma_sq = j.at("sigma_sq").get<double>();
    model.offset = j.at("b").get<double>();
    model.support_vectors = j.at("support_vectors").get<std::vector<FeaturePoint>>();
    model.alphas = j.at("alphas").get<std::vector<double>>();
    model.training_size = j.at("training_size").get<std::size_t>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed model JSON: ") + e.what(), 0);
  }
  model.config.validate();
  if (model.alphas.size() != model.support_vectors.size()) {
    throw ValidationError("model has " + std::to_string(model.alphas.size()) + " alphas for " +
                          std::to_string(model.support_vectors.size()) + " support vectors");
  }
  if (model.training_size == 0 || model.support_vectors.empty()) {
    throw ValidationError("model has no training data");
  }
  return model;
}

void save_model(const fs::path& path, const OcSvmModel& model) {
  write_file(path, model_to_json(model));
}

OcSvmModel load_model(const fs::path& path) { return model_from_json(read_file(path)); }

std::string report_to_json(const EvaluationReport& report) {
  json subjects = json::array();
  for (const auto& s : report.subjects) {
    subjects.push_back({{"subject_id", s.subject_id},
                        {"acc", s.acc},
                        {"auc", s.auc},
                        {"eer", s.eer},
                        {"n_train", s.n_train},
                        {"n_test_genuine", s.n_test_genuine},
                        {"n_test_forgery", s.n_test_forgery}});
  }
  const auto& p = report.protocol;
  const json j = {{"acc", report.acc},
                  {"auc", report.auc},
                  {"eer", report.eer},
                  {"pooled_eer", report.pooled_eer},
                  {"protocol",
                   {{"n", p.n},
                    {"seed", p.seed},
                    {"subjects", p.subjects},
                    {"folds", p.folds},
                    {"nu", p.nu},
                    {"sigma_sq", p.sigma_sq},
                    {"aggregation", p.aggregation}}},
                  {"per_subject", subjects},
                  {"roc", roc_json(report.roc)}};
  return j.dump(2) + "\n";
}

void write_subject_rows_csv(std::ostream& out, std::span<const SubjectMetrics> rows) {
  out << "subject_id,acc,auc,eer,n_train,n_test_genuine,n_test_forgery\n";
  for (const auto& r : rows) {
    out << r.subject_id << ',' << format_real(r.acc) << ',' << format_real(r.auc) << ','
        << format_real(r.eer) << ',' << r.n_train << ',' << r.n_test_genuine << ','
        << r.n_test_forgery << '\n';
  }
}

void write_roc_csv(std::ostream& out, std::span<const RocPoint> roc) {
  out << "threshold,far,frr\n";
  for (const auto& p : roc) {
    out << format_real(p.threshold) << ',' << format_real(p.far) << ',' << format_real(p.frr) << '\n';
  }
}

std::string parallelepiped_to_json(const ParallelepipedModel& model) {
  json j = json::object();
  for (const auto& [cls, box] : model.boxes) {
    json dims = json::object();
    for (std::size_t k = 0; k < box.size(); ++k) {
      const std::string name = k < model.dimensions.size() ? model.dimensions[k] : "d" + std::to_string(k);
      dims[name] = {box[k].min, box[k].max};
    }
    j[cls] = std::move(dims);
  }
  return j.dump(2) + "\n";
}

ParallelepipedModel parallelepiped_from_json(std::string_view text) {
  ParallelepipedModel model;
  try {
    const json j = json::parse(text);
    // Dimension order is taken from the first class and must agree for
    // every class.
    for (const auto& [cls, dims] : j.items()) {
      std::vector<std::string> names;
      std::vector<Interval> box;
      for (const auto& [name, range] : dims.items()) {
        names.push_back(name);
        const auto mm = range.get<std::vector<double>>();
        if (mm.size() != 2 || mm[0] > mm[1]) throw ValidationError("bad interval for " + name);
        box.push_back({mm[0], mm[1]});
      }
      if (model.dimensions.empty()) {
        model.dimensions = names;
      } else if (names != model.dimensions) {
        throw ValidationError("class '" + cls + "' has different dimensions");
      }
      model.boxes[cls] = std::move(box);
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed parallelepiped JSON: ") + e.what(), 0);
  }
  return model;
}

void write_assignments_csv(std::ostream& out, const ClusterAssignment& assignment) {
  out << "subject_id,cluster\n";
  for (const auto& [id, cluster] : assignment) out << id << ',' << cluster << '\n';
}

}  // namespace permsig
