#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "permsig/quantifiers.hpp"

namespace permsig {

/// Indices into the canonical feature order (h_x, c_x, f_x, h_y, c_y, f_y).
using FeatureSelection = std::vector<std::size_t>;

/// Entropy of X and Y, the default for per-quantifier clustering.
FeatureSelection default_feature_selection();
FeatureSelection all_features();
/// Parses a comma-separated list of feature names ("h_x,h_y") or "all".
FeatureSelection parse_feature_selection(std::string_view text);

/// Mean and sample SD of each selected feature, interleaved:
/// values = (mean_f1, sd_f1, mean_f2, sd_f2, ...).
struct SubjectSummary {
  std::string subject_id;
  std::vector<double> values;
  std::vector<std::string> names;  // "mean_h_x", "sd_h_x", ...
};

SubjectSummary summarize_subject(std::span<const FeatureVector> features,
                                 const FeatureSelection& selection = default_feature_selection());

/// Summaries of every subject's genuine vectors, in sorted subject order.
std::vector<SubjectSummary> summarize_genuine(std::span<const FeatureVector> dataset,
                                              const FeatureSelection& selection = default_feature_selection());

enum class Metric { euclidean, manhattan, maximum };
enum class Linkage { average, complete, single };

Metric parse_metric(std::string_view text);
Linkage parse_linkage(std::string_view text);
std::string_view to_string(Metric m);
std::string_view to_string(Linkage l);

double distance(std::span<const double> a, std::span<const double> b, Metric metric);

/// Agglomerative merge tree. Leaves are nodes 0..L-1 (in input order); the
/// k-th merge creates node L+k.
struct Dendrogram {
  struct Merge {
    std::size_t left = 0;
    std::size_t right = 0;
    double height = 0.0;
    std::size_t size = 0;
  };
  std::vector<std::string> leaves;
  std::vector<Merge> merges;
  Metric metric = Metric::euclidean;
  Linkage linkage = Linkage::average;

  double root_height() const { return merges.empty() ? 0.0 : merges.back().height; }
};

/// Among equal distances the pair whose smallest member ids compare
/// lexicographically smallest is merged first.
Dendrogram hierarchical_cluster(std::span<const SubjectSummary> summaries,
                                Metric metric = Metric::euclidean,
                                Linkage linkage = Linkage::average);

/// subject id -> cluster number. Clusters are numbered 0.. in order of their
/// lexicographically smallest member.
using ClusterAssignment = std::map<std::string, int>;

ClusterAssignment cut_dendrogram(const Dendrogram& dendrogram, std::size_t k);
/// Cut at a height relative to the root (0 = leaves, 1 = root): merges whose
/// normalized height is <= `relative_height` are kept.
ClusterAssignment cut_dendrogram_at_height(const Dendrogram& dendrogram, double relative_height);

/// Newick text; branch length = parent merge height - child merge height.
std::string to_newick(const Dendrogram& dendrogram);

/// Whether the k-cluster partitions agree across all three metrics.
struct MetricAgreement {
  std::map<Metric, ClusterAssignment> assignments;
  bool all_agree = false;
};
MetricAgreement compare_metrics(std::span<const SubjectSummary> summaries, Linkage linkage,
                                std::size_t k);

struct Interval {
  double min = 0.0;
  double max = 0.0;
};

struct ParallelepipedModel {
  std::vector<std::string> dimensions;
  std::map<std::string, std::vector<Interval>> boxes;
};

struct LabeledSummary {
  std::string class_name;
  SubjectSummary summary;
};

ParallelepipedModel parallelepiped_fit(std::span<const LabeledSummary> training);

/// The class whose box contains the point; overlaps go to the smallest-volume
/// box (then the smaller class name). nullopt when outside every box.
std::optional<std::string> parallelepiped_classify(const ParallelepipedModel& model,
                                                   std::span<const double> point);

}  // namespace permsig
