#pragma once

// File formats
// ------------
//   trace csv_txy    header "t,x,y", one row of three reals per sample
//   trace mcyt_like  whitespace table "x y [pressure azimuth altitude ...]";
//                    only the first two columns are read, '#' starts a comment
//   manifest         JSON {"format", "root", "subjects": [{"subject_id",
//                    "genuine": [paths], "forgery": [paths]}]}; paths are
//                    relative to root, root relative to the manifest file
//   features         CSV subject_id,sample_index,label,h_x,c_x,f_x,h_y,c_y,f_y
//                    or JSON {"config": {...}, "features": [...]}
//   model            JSON {version, nu, sigma_sq, b, support_vectors, alphas,
//                    training_size, feature_schema}
//
// Every real is written with the shortest decimal form that round-trips.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "permsig/cluster.hpp"
#include "permsig/eval.hpp"
#include "permsig/ocsvm.hpp"
#include "permsig/ordinal.hpp"
#include "permsig/preprocess.hpp"
#include "permsig/quantifiers.hpp"

namespace permsig {

std::string format_real(double v);
/// Strict full-string parse; throws ValidationError.
double parse_real(std::string_view text);

enum class TraceFormat { csv_txy, mcyt_like };
TraceFormat parse_trace_format(std::string_view text);
std::string_view to_string(TraceFormat f);

SignatureTrace read_trace(std::istream& in, TraceFormat format);
SignatureTrace load_trace(const std::filesystem::path& path, TraceFormat format);
void write_trace(std::ostream& out, const SignatureTrace& trace);
void save_trace(const std::filesystem::path& path, const SignatureTrace& trace);

struct ManifestSubject {
  std::string subject_id;
  std::vector<std::string> genuine_files;
  std::vector<std::string> forgery_files;
};

struct DatasetManifest {
  std::filesystem::path root;
  std::vector<ManifestSubject> subjects;
  TraceFormat format = TraceFormat::csv_txy;

  /// Throws ValidationError on duplicate files/subjects or overlapping lists,
  /// and (when check_files) on listed files that do not exist.
  void validate(bool check_files = true) const;
};

struct ManifestEntry {
  std::filesystem::path path;
  std::string subject_id;
  Label label = Label::genuine;
  int sample_index = 0;  // 1-based position within its list
};

/// All listed files, subjects in manifest order, genuine before forgery.
std::vector<ManifestEntry> manifest_entries(const DatasetManifest& manifest);

DatasetManifest load_manifest(const std::filesystem::path& path, bool check_files = true);
/// `root` is stored as given (usually "." next to the manifest).
void save_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);

/// Loads and labels the trace of one manifest entry.
SignatureTrace load_entry(const ManifestEntry& entry, TraceFormat format);

struct FeatureRunInfo {
  OrdinalConfig ordinal;
  std::size_t resample_length = kDefaultResampleLength;
};

void write_features_csv(std::ostream& out, std::span<const FeatureVector> features);
std::vector<FeatureVector> read_features_csv(std::istream& in);
void write_features_json(std::ostream& out, std::span<const FeatureVector> features,
                         const FeatureRunInfo& info);
std::vector<FeatureVector> read_features_json(std::istream& in);
/// Dispatches on extension (.json -> JSON, otherwise CSV).
std::vector<FeatureVector> load_features(const std::filesystem::path& path);

std::string model_to_json(const OcSvmModel& model);
OcSvmModel model_from_json(std::string_view text);
void save_model(const std::filesystem::path& path, const OcSvmModel& model);
OcSvmModel load_model(const std::filesystem::path& path);

std::string report_to_json(const EvaluationReport& report);
void write_subject_rows_csv(std::ostream& out, std::span<const SubjectMetrics> rows);
void write_roc_csv(std::ostream& out, std::span<const RocPoint> roc);

std::string parallelepiped_to_json(const ParallelepipedModel& model);
ParallelepipedModel parallelepiped_from_json(std::string_view text);
void write_assignments_csv(std::ostream& out, const ClusterAssignment& assignment);

struct SynthConfig {
  std::size_t n_subjects = 20;
  std::size_t genuine_per_subject = 25;
  std::size_t forgeries_per_subject = 25;
  std::size_t harmonics = 4;
  double genuine_jitter = 0.02;
  double forgery_distortion = 0.03;
  std::uint64_t seed = 2016;

  void validate() const;
};

/// Raw (unpreprocessed) traces: subjects "s000".., genuine then forgery,
/// sample_index 1-based. A pure function of the config.
std::vector<SignatureTrace> generate_synthetic(const SynthConfig& config);

/// Writes generate_synthetic output as csv_txy files plus manifest.json under
/// `directory`; returns the manifest path.
std::filesystem::path write_synthetic_dataset(const SynthConfig& config,
                                              const std::filesystem::path& directory);

}  // namespace permsig
