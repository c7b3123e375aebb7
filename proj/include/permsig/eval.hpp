#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "permsig/ocsvm.hpp"
#include "permsig/quantifiers.hpp"

namespace permsig {

/// Higher scores are more genuine; a score >= 0 is an acceptance.
struct ScoredSample {
  double raw_score = 0.0;
  Label true_label = Label::genuine;
  std::string subject_id;
};

struct RocPoint {
  double threshold = 0.0;
  double far = 0.0;  // forgeries with score >= threshold
  double frr = 0.0;  // genuines with score < threshold
};

double accuracy(std::span<const ScoredSample> scored);

/// Mann-Whitney probability that a genuine outscores a forgery (ties 1/2).
double auc(std::span<const ScoredSample> scored);

/// Operating points at every distinct observed score, ascending threshold,
/// followed by a final point above the largest score (FAR 0, FRR 1).
std::vector<RocPoint> roc_curve(std::span<const ScoredSample> scored);

/// Area under the ROC (true-accept vs false-accept) by the trapezoid rule.
double roc_area(std::span<const RocPoint> roc);

/// Equal error rate at the first sign change of FAR - FRR along the
/// ascending-threshold ROC, linearly interpolated between the bracketing
/// points.
double eer(std::span<const ScoredSample> scored);
double eer_from_roc(std::span<const RocPoint> roc);

struct SubjectMetrics {
  std::string subject_id;
  double acc = 0.0;
  double auc = 0.0;
  double eer = 0.0;
  std::size_t n_train = 0;
  std::size_t n_test_genuine = 0;
  std::size_t n_test_forgery = 0;
};

struct ProtocolParameters {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::size_t subjects = 0;
  int folds = 5;
  double nu = 0.1;
  double sigma_sq = 10.0;
  std::string aggregation = "unweighted mean over subjects";
};

/// acc/auc/eer are unweighted means over subjects. `roc` and `pooled_eer`
/// describe all scores pooled across subjects.
struct EvaluationReport {
  double acc = 0.0;
  double auc = 0.0;
  double eer = 0.0;
  double pooled_eer = 0.0;
  std::vector<RocPoint> roc;
  std::vector<SubjectMetrics> subjects;
  ProtocolParameters protocol;
  std::vector<ScoredSample> scores;
};

struct ProtocolOptions {
  std::size_t n = 5;
  OcSvmConfig model;
  std::uint64_t seed = 0;
  /// When non-empty, sigma_sq is chosen per subject by k-fold cross
  /// validation over the enrollment samples (needs n >= folds).
  std::vector<double> sigma_sq_grid;
  int folds = 5;
  unsigned jobs = 1;
};

/// Ascending indices of the n genuine samples (out of genuine_count, in
/// sample_index order) enrolled for a subject under the given seed.
std::vector<std::size_t> enrollment_indices(std::size_t genuine_count, std::size_t n,
                                            std::uint64_t seed, const std::string& subject_id);

/// Per subject: draws n genuine vectors for enrollment (seeded per subject),
/// trains a model on them, and scores the remaining genuines and all
/// forgeries. Subjects are processed in sorted id order.
EvaluationReport run_protocol(std::span<const FeatureVector> dataset,
                              const ProtocolOptions& options);

/// run_protocol restricted to each class's subjects. Classes listed in
/// `class_names` with no subjects are skipped with a warning.
std::map<std::string, EvaluationReport> run_protocol_by_class(
    std::span<const FeatureVector> dataset,
    const std::map<std::string, std::string>& class_of_subject,
    const ProtocolOptions& options, const std::vector<std::string>& class_names = {});

}  // namespace permsig
