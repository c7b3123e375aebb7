// permsig: command-line front end.
//
// Machine-readable results go to stdout or to the named output files;
// diagnostics go to stderr. Exit status: 0 success, 1 fatal error,
// 2 partial failure (some inputs could not be processed).

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "permsig/cluster.hpp"
#include "permsig/dataio.hpp"
#include "permsig/diagnostics.hpp"
#include "permsig/errors.hpp"
#include "permsig/eval.hpp"
#include "permsig/ocsvm.hpp"
#include "permsig/pipeline.hpp"

namespace fs = std::filesystem;
using namespace permsig;

namespace {

constexpr int kExitFatal = 1;
constexpr int kExitPartial = 2;
constexpr std::uint64_t kDefaultSeed = 2016;

struct Common {
  int dimension = 5;
  int lag = 1;
  std::size_t resample_length = kDefaultResampleLength;
  double nu = 0.1;
  double sigma_sq = 10.0;
  std::optional<std::uint64_t> seed;
  bool strict = false;
  unsigned jobs = 1;

  std::uint64_t resolved_seed() const {
    if (seed) return *seed;
    if (const char* env = std::getenv("PERMSIG_SEED"); env && *env) {
      try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(env, &used);
        if (used == std::string_view(env).size()) return v;
      } catch (const std::exception&) {
      }
      throw ParameterError(std::string("PERMSIG_SEED is not an unsigned integer: '") + env + "'");
    }
    return kDefaultSeed;
  }

  FeatureOptions feature_options() const {
    FeatureOptions o;
    o.ordinal = {dimension, lag};
    o.ordinal.validate();
    o.resample_length = resample_length;
    o.jobs = jobs;
    return o;
  }

  OcSvmConfig model_config() const {
    OcSvmConfig c;
    c.nu = nu;
    c.sigma_sq = sigma_sq;
    c.validate();
    return c;
  }
};

// Writes to `path`, or to stdout when path is empty or "-".
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty() && path != "-") {
      if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
      file_.open(path, std::ios::binary);
      if (!file_) throw Error("cannot write '" + path + "'");
    }
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }
  void close() {
    if (file_.is_open()) {
      file_.close();
      if (!file_) throw Error("write failed");
    } else {
      std::cout.flush();
    }
  }

 private:
  std::ofstream file_;
};

void write_text(const std::string& path, const std::string& text) {
  Output out(path);
  out.stream() << text;
  out.close();
}

void require_format(const std::string& format) {
  if (format != "csv" && format != "json") throw ParameterError("--format must be csv or json");
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

// "subject_id,class" table with a header row.
std::map<std::string, std::string> load_classes(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open class table '" + path + "'");
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 2) throw ParseError(path + ": line " + std::to_string(line_no) + ": expected 2 columns", line_no);
    if (line_no == 1 && cells[0] == "subject_id") continue;
    if (!out.emplace(cells[0], cells[1]).second) {
      throw ValidationError(path + ": subject '" + cells[0] + "' assigned twice");
    }
  }
  return out;
}

std::map<std::string, std::vector<FeatureVector>> by_subject(const std::vector<FeatureVector>& features) {
  std::map<std::string, std::vector<FeatureVector>> out;
  for (const auto& fv : features) out[fv.subject_id].push_back(fv);
  return out;
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  std::string out_dir;
  SynthConfig config;
};

int cmd_synth(const SynthArgs& a, const Common& c) {
  SynthConfig cfg = a.config;
  cfg.seed = c.resolved_seed();
  const fs::path manifest = write_synthetic_dataset(cfg, a.out_dir);
  std::cout << manifest.generic_string() << '\n';
  return 0;
}

// ------------------------------------------------------------- features

struct FeaturesArgs {
  std::string manifest;
  std::string output;
  std::string format = "csv";
};

int cmd_features(const FeaturesArgs& a, const Common& c) {
  require_format(a.format);
  const DatasetManifest manifest = load_manifest(a.manifest, false);
  const FeatureOptions opt = c.feature_options();
  const ManifestFeatures result = extract_features(manifest, opt);

  Output out(a.output);
  if (a.format == "json") {
    write_features_json(out.stream(), result.features, {opt.ordinal, opt.resample_length});
  } else {
    write_features_csv(out.stream(), result.features);
  }
  out.close();

  if (!result.failures.empty()) {
    std::cerr << result.failures.size() << " of "
              << result.failures.size() + result.features.size() << " files failed:\n";
    for (const auto& f : result.failures) std::cerr << "  " << f.path.generic_string() << ": " << f.message << '\n';
    return kExitPartial;
  }
  return 0;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string features;
  std::string out_dir;
  std::size_t train_size = 0;  // 0: every genuine sample
  std::vector<std::string> subjects;
};

int cmd_train(const TrainArgs& a, const Common& c) {
  const auto grouped = by_subject(load_features(a.features));
  const OcSvmConfig cfg = c.model_config();
  const std::uint64_t seed = c.resolved_seed();
  fs::create_directories(a.out_dir);

  std::vector<std::string> wanted = a.subjects;
  if (wanted.empty()) {
    for (const auto& [id, rows] : grouped) wanted.push_back(id);
  }
  std::cout << "subject_id,model,n_train,support_vectors,offset\n";
  int failed = 0;
  for (const auto& id : wanted) {
    try {
      if (id.empty() || id.find_first_of("/\\") != std::string::npos || id == "." || id == "..") {
        throw ValidationError("subject id '" + id + "' cannot name a model file");
      }
      const auto it = grouped.find(id);
      if (it == grouped.end()) throw ValidationError("no features for subject '" + id + "'");
      std::vector<FeatureVector> genuine;
      for (const auto& fv : it->second) {
        if (fv.label == Label::genuine) genuine.push_back(fv);
      }
      std::stable_sort(genuine.begin(), genuine.end(),
                       [](const FeatureVector& x, const FeatureVector& y) { return x.sample_index < y.sample_index; });
      std::vector<FeaturePoint> samples;
      if (a.train_size > 0) {
        for (std::size_t k : enrollment_indices(genuine.size(), a.train_size, seed, id)) {
          samples.push_back(genuine[k].values());
        }
      } else {
        for (const auto& fv : genuine) samples.push_back(fv.values());
      }
      const OcSvmModel model = train(samples, cfg);
      const fs::path path = fs::path(a.out_dir) / (id + ".json");
      save_model(path, model);
      std::cout << id << ',' << path.generic_string() << ',' << samples.size() << ','
                << model.support_vectors.size() << ',' << format_real(model.offset) << '\n';
    } catch (const Error& e) {
      if (c.strict) throw;
      std::cerr << "subject " << id << ": " << e.what() << '\n';
      ++failed;
    }
  }
  if (failed > 0 && failed == static_cast<int>(wanted.size())) return kExitFatal;
  return failed > 0 ? kExitPartial : 0;
}

// --------------------------------------------------------------- verify

struct VerifyArgs {
  std::string model;
  std::string features;
  std::vector<std::string> traces;
  std::string trace_format = "csv_txy";
  std::string subject;
  std::string output;
  std::string format = "csv";
};

int cmd_verify(const VerifyArgs& a, const Common& c) {
  require_format(a.format);
  if (a.features.empty() == a.traces.empty()) {
    throw ParameterError("verify needs exactly one of --features or --trace");
  }
  const OcSvmModel model = load_model(a.model);

  struct Row {
    std::string probe;
    std::string subject_id;
    int sample_index = 0;
    std::string label;
    DecisionResult result;
  };
  std::vector<Row> rows;
  int failed = 0;
  if (!a.features.empty()) {
    for (const auto& fv : load_features(a.features)) {
      if (!a.subject.empty() && fv.subject_id != a.subject) continue;
      rows.push_back({a.features, fv.subject_id, fv.sample_index, std::string(to_string(fv.label)),
                      decide(model, fv.values())});
    }
  } else {
    const TraceFormat fmt = parse_trace_format(a.trace_format);
    const FeatureOptions opt = c.feature_options();
    for (const auto& path : a.traces) {
      try {
        const FeatureVector fv = extract_features(load_trace(path, fmt), opt);
        rows.push_back({path, a.subject, 0, "", decide(model, fv.values())});
      } catch (const Error& e) {
        if (c.strict) throw;
        std::cerr << path << ": " << e.what() << '\n';
        ++failed;
      }
    }
  }

  Output out(a.output);
  if (a.format == "json") {
    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
      j.push_back({{"probe", r.probe},
                   {"subject_id", r.subject_id},
                   {"sample_index", r.sample_index},
                   {"label", r.label},
                   {"raw_score", r.result.raw_score},
                   {"verdict", std::string(to_string(r.result.verdict))}});
    }
    out.stream() << j.dump(2) << '\n';
  } else {
    out.stream() << "probe,subject_id,sample_index,label,raw_score,verdict\n";
    for (const auto& r : rows) {
      out.stream() << r.probe << ',' << r.subject_id << ',' << r.sample_index << ',' << r.label << ','
                   << format_real(r.result.raw_score) << ',' << to_string(r.result.verdict) << '\n';
    }
  }
  out.close();
  if (failed > 0) return rows.empty() ? kExitFatal : kExitPartial;
  return 0;
}

// ------------------------------------------------------------- evaluate

struct EvaluateArgs {
  std::string features;
  std::size_t train_size = 5;
  std::vector<double> sigma_grid;
  int folds = 5;
  std::string classes;
  std::string output;
  std::string subjects_csv;
  std::string roc_csv;
  std::string format = "json";
};

int cmd_evaluate(const EvaluateArgs& a, const Common& c) {
  require_format(a.format);
  const auto features = load_features(a.features);
  ProtocolOptions opt;
  opt.n = a.train_size;
  opt.model = c.model_config();
  opt.seed = c.resolved_seed();
  opt.sigma_sq_grid = a.sigma_grid;
  opt.folds = a.folds;
  opt.jobs = c.jobs;

  auto write_tables = [&](const EvaluationReport& r) {
    if (!a.subjects_csv.empty()) {
      Output out(a.subjects_csv);
      write_subject_rows_csv(out.stream(), r.subjects);
      out.close();
    }
    if (!a.roc_csv.empty()) {
      Output out(a.roc_csv);
      write_roc_csv(out.stream(), r.roc);
      out.close();
    }
  };

  if (a.classes.empty()) {
    const EvaluationReport r = run_protocol(features, opt);
    if (a.format == "json") {
      write_text(a.output, report_to_json(r));
    } else {
      Output out(a.output);
      write_subject_rows_csv(out.stream(), r.subjects);
      out.close();
    }
    write_tables(r);
    return 0;
  }

  const auto reports = run_protocol_by_class(features, load_classes(a.classes), opt);
  if (a.format == "json") {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [cls, r] : reports) j[cls] = nlohmann::ordered_json::parse(report_to_json(r));
    write_text(a.output, j.dump(2) + "\n");
  } else {
    Output out(a.output);
    out.stream() << "class,acc,auc,eer,pooled_eer,subjects\n";
    for (const auto& [cls, r] : reports) {
      out.stream() << cls << ',' << format_real(r.acc) << ',' << format_real(r.auc) << ','
                   << format_real(r.eer) << ',' << format_real(r.pooled_eer) << ',' << r.subjects.size()
                   << '\n';
    }
    out.close();
  }
  return 0;
}

// -------------------------------------------------------------- cluster

struct ClusterArgs {
  std::string features;
  std::string selection = "h_x,h_y";
  std::string metric = "euclidean";
  std::string linkage = "average";
  std::size_t k = 0;
  std::optional<double> height;
  std::string newick;
  std::string assignments;
  std::string summaries_csv;
  std::string classes;
  std::string parallelepiped;
  std::string classification;
  bool compare = false;
};

int cmd_cluster(const ClusterArgs& a) {
  const auto features = load_features(a.features);
  const auto summaries = summarize_genuine(features, parse_feature_selection(a.selection));
  const Metric metric = parse_metric(a.metric);
  const Linkage linkage = parse_linkage(a.linkage);
  const Dendrogram tree = hierarchical_cluster(summaries, metric, linkage);

  const bool want_cut = a.k > 0 || a.height.has_value();
  if (a.k > 0 && a.height) throw ParameterError("use either --k or --height, not both");

  // Without an explicit destination the Newick tree goes to stdout, unless a
  // cut was requested, in which case the assignment table does.
  if (!a.newick.empty() || !want_cut) write_text(a.newick, to_newick(tree) + "\n");
  if (want_cut) {
    const ClusterAssignment assignment =
        a.k > 0 ? cut_dendrogram(tree, a.k) : cut_dendrogram_at_height(tree, *a.height);
    Output out(a.assignments);
    write_assignments_csv(out.stream(), assignment);
    out.close();
    if (a.compare) {
      std::set<int> clusters;
      for (const auto& [id, cluster] : assignment) clusters.insert(cluster);
      const auto agreement = compare_metrics(summaries, linkage, clusters.size());
      std::cerr << "metric agreement at k=" << clusters.size() << ": "
                << (agreement.all_agree ? "yes" : "no") << '\n';
    }
  }

  if (!a.summaries_csv.empty()) {
    Output out(a.summaries_csv);
    out.stream() << "subject_id";
    for (const auto& n : summaries.front().names) out.stream() << ',' << n;
    out.stream() << '\n';
    for (const auto& s : summaries) {
      out.stream() << s.subject_id;
      for (double v : s.values) out.stream() << ',' << format_real(v);
      out.stream() << '\n';
    }
    out.close();
  }

  if (!a.classes.empty()) {
    const auto classes = load_classes(a.classes);
    std::vector<LabeledSummary> labeled;
    for (const auto& s : summaries) {
      const auto it = classes.find(s.subject_id);
      if (it != classes.end()) labeled.push_back({it->second, s});
    }
    const ParallelepipedModel model = parallelepiped_fit(labeled);
    if (!a.parallelepiped.empty()) write_text(a.parallelepiped, parallelepiped_to_json(model) + "\n");
    if (!a.classification.empty()) {
      Output out(a.classification);
      out.stream() << "subject_id,class,predicted\n";
      for (const auto& s : summaries) {
        const auto it = classes.find(s.subject_id);
        const auto predicted = parallelepiped_classify(model, s.values);
        out.stream() << s.subject_id << ',' << (it == classes.end() ? "" : it->second) << ','
                     << predicted.value_or("") << '\n';
      }
      out.close();
    }
  }
  return 0;
}

void add_feature_flags(CLI::App* app, Common& c) {
  app->add_option("--dimension", c.dimension, "Embedding dimension D")->capture_default_str();
  app->add_option("--lag", c.lag, "Embedding delay tau")->capture_default_str();
  app->add_option("--resample-length", c.resample_length, "Resampled trace length M")->capture_default_str();
}

void add_model_flags(CLI::App* app, Common& c) {
  app->add_option("--nu", c.nu, "One-class SVM nu")->capture_default_str();
  app->add_option("--sigma-sq", c.sigma_sq, "RBF kernel width sigma^2")->capture_default_str();
}

void add_run_flags(CLI::App* app, Common& c) {
  app->add_option("--seed", c.seed, "Random seed (falls back to $PERMSIG_SEED, then 2016)");
  app->add_flag("--strict", c.strict, "Treat warnings as errors");
  app->add_option("--jobs", c.jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online signature verification with ordinal-pattern quantifiers"};
  app.require_subcommand(1);
  Common common;

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Write a synthetic dataset (traces + manifest.json)");
  s->add_option("--out", synth.out_dir, "Output directory")->required();
  s->add_option("--subjects", synth.config.n_subjects)->capture_default_str();
  s->add_option("--genuine", synth.config.genuine_per_subject)->capture_default_str();
  s->add_option("--forgeries", synth.config.forgeries_per_subject)->capture_default_str();
  s->add_option("--harmonics", synth.config.harmonics)->capture_default_str();
  s->add_option("--jitter", synth.config.genuine_jitter)->capture_default_str();
  s->add_option("--distortion", synth.config.forgery_distortion)->capture_default_str();
  add_run_flags(s, common);

  FeaturesArgs feat;
  auto* f = app.add_subcommand("features", "Preprocess and quantify every trace in a manifest");
  f->add_option("manifest", feat.manifest, "Dataset manifest (JSON)")->required();
  f->add_option("-o,--output", feat.output, "Output file (default stdout)");
  f->add_option("--format", feat.format, "csv or json")->capture_default_str();
  add_feature_flags(f, common);
  add_run_flags(f, common);

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train one model per subject on genuine features");
  t->add_option("features", tr.features, "Feature file (.csv or .json)")->required();
  t->add_option("--out-dir", tr.out_dir, "Directory for <subject>.json models")->required();
  t->add_option("--train-size", tr.train_size, "Genuine samples per model (0 = all)")->capture_default_str();
  t->add_option("--subject", tr.subjects, "Restrict to these subjects");
  add_model_flags(t, common);
  add_run_flags(t, common);

  VerifyArgs ver;
  auto* v = app.add_subcommand("verify", "Score probes against a trained model");
  v->add_option("model", ver.model, "Model JSON")->required();
  v->add_option("--features", ver.features, "Probe feature file");
  v->add_option("--trace", ver.traces, "Probe trace file(s)");
  v->add_option("--trace-format", ver.trace_format, "csv_txy or mcyt_like")->capture_default_str();
  v->add_option("--subject", ver.subject, "Only probes of this subject (feature input)");
  v->add_option("-o,--output", ver.output, "Output file (default stdout)");
  v->add_option("--format", ver.format, "csv or json")->capture_default_str();
  add_feature_flags(v, common);
  add_run_flags(v, common);

  EvaluateArgs ev;
  auto* e = app.add_subcommand("evaluate", "Run the enrollment/verification protocol");
  e->add_option("features", ev.features, "Feature file (.csv or .json)")->required();
  e->add_option("--train-size", ev.train_size, "Enrollment size n")->capture_default_str();
  e->add_option("--sigma-grid", ev.sigma_grid, "Choose sigma^2 per subject by cross validation")
      ->delimiter(',');
  e->add_option("--folds", ev.folds, "Cross-validation folds")->capture_default_str();
  e->add_option("--classes", ev.classes, "subject_id,class table for per-class reports");
  e->add_option("-o,--output", ev.output, "Report file (default stdout)");
  e->add_option("--subjects-csv", ev.subjects_csv, "Per-subject metrics CSV");
  e->add_option("--roc-csv", ev.roc_csv, "Pooled ROC CSV");
  e->add_option("--format", ev.format, "json (report) or csv (per-subject rows)")->capture_default_str();
  add_model_flags(e, common);
  add_run_flags(e, common);

  ClusterArgs cl;
  auto* c = app.add_subcommand("cluster", "Cluster subjects by genuine feature statistics");
  c->add_option("features", cl.features, "Feature file (.csv or .json)")->required();
  c->add_option("--select", cl.selection, "Features to summarize, e.g. h_x,h_y or all")->capture_default_str();
  c->add_option("--metric", cl.metric, "euclidean, manhattan or maximum")->capture_default_str();
  c->add_option("--linkage", cl.linkage, "average, complete or single")->capture_default_str();
  c->add_option("--k", cl.k, "Cut into k clusters");
  c->add_option("--height", cl.height, "Cut at a relative height in [0,1]");
  c->add_option("--newick", cl.newick, "Newick output file");
  c->add_option("--assignments", cl.assignments, "Cluster assignment CSV");
  c->add_option("--summaries-csv", cl.summaries_csv, "Per-subject mean/SD table");
  c->add_option("--classes", cl.classes, "subject_id,class table for the parallelepiped classifier");
  c->add_option("--parallelepiped", cl.parallelepiped, "Parallelepiped model JSON");
  c->add_option("--classification", cl.classification, "Parallelepiped classification CSV");
  c->add_flag("--compare-metrics", cl.compare, "Report whether all metrics give the same cut");
  add_run_flags(c, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::CallForAllHelp& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return kExitFatal;
  }

  std::optional<ScopedWarningHandler> strict;
  if (common.strict) {
    strict.emplace([](const std::string& msg) { throw ValidationError("warning treated as error: " + msg); });
  }

  try {
    if (*s) return cmd_synth(synth, common);
    if (*f) return cmd_features(feat, common);
    if (*t) return cmd_train(tr, common);
    if (*v) return cmd_verify(ver, common);
    if (*e) return cmd_evaluate(ev, common);
    if (*c) return cmd_cluster(cl);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitFatal;
  }
  return kExitFatal;
}
