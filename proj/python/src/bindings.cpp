#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "permsig/cluster.hpp"
#include "permsig/dataio.hpp"
#include "permsig/errors.hpp"
#include "permsig/eval.hpp"
#include "permsig/ocsvm.hpp"
#include "permsig/ordinal.hpp"
#include "permsig/pipeline.hpp"
#include "permsig/preprocess.hpp"
#include "permsig/quantifiers.hpp"

namespace py = pybind11;
using namespace permsig;

namespace {

SignatureTrace make_trace(std::vector<double> x, std::vector<double> y) {
  SignatureTrace t;
  t.x = std::move(x);
  t.y = std::move(y);
  t.validate();
  return t;
}

std::vector<ScoredSample> make_scored(const std::vector<double>& scores, const std::vector<bool>& genuine) {
  if (scores.size() != genuine.size()) throw LengthError("scores and labels differ in length");
  std::vector<ScoredSample> out;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out.push_back({scores[i], genuine[i] ? Label::genuine : Label::forgery, ""});
  }
  return out;
}

py::dict feature_dict(const FeatureVector& f) {
  py::dict d;
  d["subject_id"] = f.subject_id;
  d["label"] = std::string(to_string(f.label));
  d["sample_index"] = f.sample_index;
  const auto v = f.values();
  for (std::size_t k = 0; k < kFeatureNames.size(); ++k) d[py::str(std::string(kFeatureNames[k]))] = v[k];
  return d;
}

FeatureVector feature_from_dict(const py::dict& d) {
  FeatureVector f;
  f.subject_id = d["subject_id"].cast<std::string>();
  f.label = parse_label(d["label"].cast<std::string>());
  f.sample_index = d.contains("sample_index") ? d["sample_index"].cast<int>() : 0;
  FeaturePoint p;
  for (std::size_t k = 0; k < kFeatureNames.size(); ++k) p[k] = d[py::str(std::string(kFeatureNames[k]))].cast<double>();
  f.set_values(p);
  return f;
}

}  // namespace

PYBIND11_MODULE(_permsig, m) {
  m.doc() = "Ordinal-pattern signature features, one-class SVM verification and evaluation";

  static py::exception<Error> base_error(m, "PermsigError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(base_error, e.what());
    }
  });

  // ordinal
  m.def("pattern_of_window", [](const std::vector<double>& w) {
    const Permutation p = pattern_of_window(w);
    return std::vector<int>(p.begin(), p.end());
  }, py::arg("window"));
  m.def("lehmer_rank", [](const std::vector<int>& p) { return lehmer_rank(p); }, py::arg("permutation"));
  m.def("bandt_pompe_pdf", [](const std::vector<double>& x, int dimension, int lag) {
    return bandt_pompe_pdf(x, {dimension, lag}).probabilities;
  }, py::arg("series"), py::arg("dimension") = 5, py::arg("lag") = 1);

  // quantifiers
  m.def("shannon_entropy", [](const std::vector<double>& p) { return shannon_entropy(p); }, py::arg("p"));
  m.def("normalized_entropy", [](const std::vector<double>& p) { return normalized_entropy(p); }, py::arg("p"));
  m.def("fisher_information", [](const std::vector<double>& p) { return fisher_information(p); }, py::arg("p"));
  m.def("jensen_shannon_disequilibrium",
        [](const std::vector<double>& p) { return jensen_shannon_disequilibrium(p); }, py::arg("p"));
  m.def("statistical_complexity", [](const std::vector<double>& p) { return statistical_complexity(p); },
        py::arg("p"));
  m.def("quantify", [](const std::vector<double>& p) {
    const auto q = quantify(p);
    return py::make_tuple(q.entropy, q.complexity, q.fisher);
  }, py::arg("p"), "(entropy, complexity, fisher) of a distribution");
  m.attr("FEATURE_NAMES") = [] {
    py::list names;
    for (auto n : kFeatureNames) names.append(std::string(n));
    return py::tuple(names);
  }();

  // preprocessing and features
  m.def("preprocess", [](std::vector<double> x, std::vector<double> y, std::size_t length) {
    const auto t = preprocess(make_trace(std::move(x), std::move(y)), length);
    return py::make_tuple(t.x, t.y);
  }, py::arg("x"), py::arg("y"), py::arg("length") = kDefaultResampleLength);
  m.def("extract_features", [](std::vector<double> x, std::vector<double> y, int dimension, int lag,
                               std::size_t resample_length) {
    FeatureOptions opt;
    opt.ordinal = {dimension, lag};
    opt.resample_length = resample_length;
    return feature_dict(extract_features(make_trace(std::move(x), std::move(y)), opt));
  }, py::arg("x"), py::arg("y"), py::arg("dimension") = 5, py::arg("lag") = 1,
     py::arg("resample_length") = kDefaultResampleLength,
     "Preprocess a raw trace and return its six quantifiers");

  // one-class SVM
  py::class_<OcSvmModel>(m, "OcSvmModel")
      .def_property_readonly("offset", [](const OcSvmModel& mo) { return mo.offset; })
      .def_property_readonly("alphas", [](const OcSvmModel& mo) { return mo.alphas; })
      .def_property_readonly("support_vectors", [](const OcSvmModel& mo) { return mo.support_vectors; })
      .def_property_readonly("training_size", [](const OcSvmModel& mo) { return mo.training_size; })
      .def_property_readonly("kkt_residual", [](const OcSvmModel& mo) { return mo.kkt_residual; })
      .def("decision_value", [](const OcSvmModel& mo, const FeaturePoint& z) { return decision_value(mo, z); },
           py::arg("z"))
      .def("is_genuine",
           [](const OcSvmModel& mo, const FeaturePoint& z) { return decide(mo, z).verdict == Verdict::genuine; },
           py::arg("z"))
      .def("to_json", [](const OcSvmModel& mo) { return model_to_json(mo); })
      .def_static("from_json", [](const std::string& text) { return model_from_json(text); }, py::arg("text"));
  m.def("train", [](const std::vector<FeaturePoint>& samples, double nu, double sigma_sq, double tolerance) {
    OcSvmConfig cfg;
    cfg.nu = nu;
    cfg.sigma_sq = sigma_sq;
    cfg.tolerance = tolerance;
    return train(samples, cfg);
  }, py::arg("samples"), py::arg("nu") = 0.1, py::arg("sigma_sq") = 10.0, py::arg("tolerance") = 1e-6);
  m.def("rbf_kernel", [](const FeaturePoint& a, const FeaturePoint& b, double s2) { return rbf_kernel(a, b, s2); },
        py::arg("a"), py::arg("b"), py::arg("sigma_sq") = 10.0);

  // metrics
  m.def("accuracy", [](const std::vector<double>& s, const std::vector<bool>& g) { return accuracy(make_scored(s, g)); },
        py::arg("scores"), py::arg("genuine"));
  m.def("auc", [](const std::vector<double>& s, const std::vector<bool>& g) { return auc(make_scored(s, g)); },
        py::arg("scores"), py::arg("genuine"));
  m.def("eer", [](const std::vector<double>& s, const std::vector<bool>& g) { return eer(make_scored(s, g)); },
        py::arg("scores"), py::arg("genuine"));
  m.def("roc_curve", [](const std::vector<double>& s, const std::vector<bool>& g) {
    py::list out;
    for (const auto& p : roc_curve(make_scored(s, g))) out.append(py::make_tuple(p.threshold, p.far, p.frr));
    return out;
  }, py::arg("scores"), py::arg("genuine"), "List of (threshold, far, frr)");
  m.def("run_protocol_json", [](const py::list& features, std::size_t n, std::uint64_t seed, double nu,
                                double sigma_sq, unsigned jobs) {
    std::vector<FeatureVector> data;
    for (const auto& item : features) data.push_back(feature_from_dict(item.cast<py::dict>()));
    ProtocolOptions opt;
    opt.n = n;
    opt.seed = seed;
    opt.model.nu = nu;
    opt.model.sigma_sq = sigma_sq;
    opt.jobs = jobs;
    py::gil_scoped_release release;
    return report_to_json(run_protocol(data, opt));
  }, py::arg("features"), py::arg("n") = 5, py::arg("seed") = 2016, py::arg("nu") = 0.1,
     py::arg("sigma_sq") = 10.0, py::arg("jobs") = 1);

  // clustering
  py::class_<Dendrogram>(m, "Dendrogram")
      .def_property_readonly("leaves", [](const Dendrogram& d) { return d.leaves; })
      .def_property_readonly("heights", [](const Dendrogram& d) {
        std::vector<double> h;
        for (const auto& mg : d.merges) h.push_back(mg.height);
        return h;
      })
      .def("to_newick", [](const Dendrogram& d) { return to_newick(d); })
      .def("cut", [](const Dendrogram& d, std::size_t k) { return cut_dendrogram(d, k); }, py::arg("k"))
      .def("cut_at_height", [](const Dendrogram& d, double h) { return cut_dendrogram_at_height(d, h); },
           py::arg("relative_height"));
  m.def("hierarchical_cluster", [](const std::map<std::string, std::vector<double>>& points,
                                   const std::string& metric, const std::string& linkage) {
    std::vector<SubjectSummary> s;
    for (const auto& [id, v] : points) s.push_back({id, v, {}});
    return hierarchical_cluster(s, parse_metric(metric), parse_linkage(linkage));
  }, py::arg("points"), py::arg("metric") = "euclidean", py::arg("linkage") = "average");

  // data
  m.def("load_trace", [](const std::filesystem::path& path, const std::string& format) {
    const auto t = load_trace(path, parse_trace_format(format));
    return py::make_tuple(t.x, t.y);
  }, py::arg("path"), py::arg("format") = "csv_txy");
  m.def("load_features", [](const std::filesystem::path& path) {
    py::list out;
    for (const auto& f : load_features(path)) out.append(feature_dict(f));
    return out;
  }, py::arg("path"));
  m.def("write_synthetic_dataset", [](const std::filesystem::path& dir, std::size_t subjects, std::size_t genuine,
                                      std::size_t forgeries, std::uint64_t seed) {
    SynthConfig c;
    c.n_subjects = subjects;
    c.genuine_per_subject = genuine;
    c.forgeries_per_subject = forgeries;
    c.seed = seed;
    return write_synthetic_dataset(c, dir);
  }, py::arg("directory"), py::arg("subjects") = 20, py::arg("genuine") = 25, py::arg("forgeries") = 25,
     py::arg("seed") = 2016, "Returns the manifest path");
  m.def("extract_manifest_features", [](const std::filesystem::path& manifest, int dimension, int lag,
                                        std::size_t resample_length, unsigned jobs) {
    FeatureOptions opt;
    opt.ordinal = {dimension, lag};
    opt.resample_length = resample_length;
    opt.jobs = jobs;
    ManifestFeatures r;
    {
      py::gil_scoped_release release;
      r = extract_features(load_manifest(manifest), opt);
    }
    py::list feats;
    for (const auto& f : r.features) feats.append(feature_dict(f));
    py::list failures;
    for (const auto& f : r.failures) failures.append(py::make_tuple(f.path, f.message));
    return py::make_tuple(feats, failures);
  }, py::arg("manifest"), py::arg("dimension") = 5, py::arg("lag") = 1,
     py::arg("resample_length") = kDefaultResampleLength, py::arg("jobs") = 1,
     "Returns (features, failures)");
}
