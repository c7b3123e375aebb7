#include "permsig/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <set>
#include <thread>

#include "permsig/diagnostics.hpp"
#include "permsig/errors.hpp"
#include "permsig/random.hpp"

namespace permsig {
namespace {

struct ClassCounts {
  std::size_t genuine = 0;
  std::size_t forgery = 0;
};

ClassCounts count_labels(std::span<const ScoredSample> scored) {
  ClassCounts c;
  for (const auto& s : scored) {
    if (!std::isfinite(s.raw_score)) throw ValidationError("non-finite score");
    (s.true_label == Label::genuine ? c.genuine : c.forgery) += 1;
  }
  return c;
}

ClassCounts require_both_labels(std::span<const ScoredSample> scored, const char* metric) {
  const ClassCounts c = count_labels(scored);
  if (c.genuine == 0 || c.forgery == 0) {
    throw UndefinedMetricError(std::string(metric) +
                               " needs at least one genuine and one forgery score");
  }
  return c;
}

struct SubjectData {
  std::vector<FeatureVector> genuine;
  std::vector<FeatureVector> forgery;
};

std::map<std::string, SubjectData> group_by_subject(std::span<const FeatureVector> dataset) {
  std::map<std::string, SubjectData> out;
  for (const auto& fv : dataset) {
    auto& d = out[fv.subject_id];
    (fv.label == Label::genuine ? d.genuine : d.forgery).push_back(fv);
  }
  auto by_index = [](const FeatureVector& a, const FeatureVector& b) {
    return a.sample_index < b.sample_index;
  };
  for (auto& [id, d] : out) {
    std::stable_sort(d.genuine.begin(), d.genuine.end(), by_index);
    std::stable_sort(d.forgery.begin(), d.forgery.end(), by_index);
  }
  return out;
}

struct SubjectOutcome {
  SubjectMetrics metrics;
  std::vector<ScoredSample> scores;
};

SubjectOutcome evaluate_subject(const std::string& id, const SubjectData& data,
                                const ProtocolOptions& options) {
  const auto enrolled = enrollment_indices(data.genuine.size(), options.n, options.seed, id);
  std::vector<bool> is_enrolled(data.genuine.size(), false);
  for (std::size_t k : enrolled) is_enrolled[k] = true;

  std::vector<FeaturePoint> train_set;
  for (std::size_t k : enrolled) train_set.push_back(data.genuine[k].values());

  OcSvmConfig cfg = options.model;
  if (!options.sigma_sq_grid.empty()) {
    cfg.sigma_sq = cross_validate_sigma(train_set, cfg, options.sigma_sq_grid, options.folds,
                                        derive_seed(options.seed ^ 0x5eed, id));
  }
  const OcSvmModel model = train(train_set, cfg);

  SubjectOutcome out;
  for (std::size_t k = 0; k < data.genuine.size(); ++k) {
    if (is_enrolled[k]) continue;
    out.scores.push_back({decision_value(model, data.genuine[k].values()), Label::genuine, id});
  }
  for (const auto& fv : data.forgery) {
    out.scores.push_back({decision_value(model, fv.values()), Label::forgery, id});
  }
  out.metrics.subject_id = id;
  out.metrics.acc = accuracy(out.scores);
  out.metrics.auc = auc(out.scores);
  out.metrics.eer = eer(out.scores);
  out.metrics.n_train = options.n;
  out.metrics.n_test_genuine = data.genuine.size() - options.n;
  out.metrics.n_test_forgery = data.forgery.size();
  return out;
}

}  // namespace

std::vector<std::size_t> enrollment_indices(std::size_t genuine_count, std::size_t n,
                                            std::uint64_t seed, const std::string& subject_id) {
  if (n > genuine_count) {
    throw ProtocolError("subject '" + subject_id + "' has " + std::to_string(genuine_count) +
                            " genuine samples; cannot enroll " + std::to_string(n),
                        subject_id);
  }
  std::vector<std::size_t> order(genuine_count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(seed, subject_id));
  rng.shuffle(std::span<std::size_t>(order));
  order.resize(n);
  std::sort(order.begin(), order.end());
  return order;
}

double accuracy(std::span<const ScoredSample> scored) {
  if (scored.empty()) throw ValidationError("accuracy of an empty score set");
  count_labels(scored);
  std::size_t correct = 0;
  for (const auto& s : scored) {
    const bool accepted = s.raw_score >= 0.0;
    if (accepted == (s.true_label == Label::genuine)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(scored.size());
}

double auc(std::span<const ScoredSample> scored) {
  const ClassCounts c = require_both_labels(scored, "AUC");
  std::vector<std::size_t> idx(scored.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return scored[a].raw_score < scored[b].raw_score; });
  // Sum of mid-ranks of genuine scores (ranks 1-based, ties averaged).
  double genuine_rank_sum = 0.0;
  for (std::size_t start = 0; start < idx.size();) {
    std::size_t end = start;
    while (end < idx.size() && scored[idx[end]].raw_score == scored[idx[start]].raw_score) ++end;
    const double mid_rank = 0.5 * static_cast<double>(start + 1 + end);
    for (std::size_t k = start; k < end; ++k) {
      if (scored[idx[k]].true_label == Label::genuine) genuine_rank_sum += mid_rank;
    }
    start = end;
  }
  const auto ng = static_cast<double>(c.genuine);
  const auto nf = static_cast<double>(c.forgery);
  const double u = genuine_rank_sum - ng * (ng + 1.0) / 2.0;
  return u / (ng * nf);
}

std::vector<RocPoint> roc_curve(std::span<const ScoredSample> scored) {
  const ClassCounts c = require_both_labels(scored, "ROC");
  std::vector<std::pair<double, Label>> sorted;
  sorted.reserve(scored.size());
  for (const auto& s : scored) sorted.emplace_back(s.raw_score, s.true_label);
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  const auto ng = static_cast<double>(c.genuine);
  const auto nf = static_cast<double>(c.forgery);
  std::vector<RocPoint> roc;
  std::size_t genuine_below = 0;
  std::size_t forgery_below = 0;
  for (std::size_t start = 0; start < sorted.size();) {
    const double t = sorted[start].first;
    roc.push_back({t, (nf - static_cast<double>(forgery_below)) / nf,
                   static_cast<double>(genuine_below) / ng});
    std::size_t end = start;
    while (end < sorted.size() && sorted[end].first == t) {
      (sorted[end].second == Label::genuine ? genuine_below : forgery_below) += 1;
      ++end;
    }
    start = end;
  }
  roc.push_back({std::nextafter(sorted.back().first, std::numeric_limits<double>::infinity()),
                 0.0, 1.0});
  return roc;
}

double roc_area(std::span<const RocPoint> roc) {
  double area = 0.0;
  for (std::size_t k = 0; k + 1 < roc.size(); ++k) {
    const double width = roc[k].far - roc[k + 1].far;
    area += width * 0.5 * ((1.0 - roc[k].frr) + (1.0 - roc[k + 1].frr));
  }
  return area;
}

double eer_from_roc(std::span<const RocPoint> roc) {
  if (roc.empty()) throw UndefinedMetricError("EER of an empty ROC");
  double prev_diff = roc.front().far - roc.front().frr;
  if (prev_diff <= 0.0) return roc.front().far;
  for (std::size_t k = 1; k < roc.size(); ++k) {
    const double diff = roc[k].far - roc[k].frr;
    if (diff == 0.0) return roc[k].far;
    if (diff < 0.0) {
      const double w = prev_diff / (prev_diff - diff);
      return roc[k - 1].far + w * (roc[k].far - roc[k - 1].far);
    }
    prev_diff = diff;
  }
  return roc.back().far;
}

double eer(std::span<const ScoredSample> scored) { return eer_from_roc(roc_curve(scored)); }

EvaluationReport run_protocol(std::span<const FeatureVector> dataset,
                              const ProtocolOptions& options) {
  options.model.validate();
  if (options.n < 2) throw ParameterError("enrollment size n must be >= 2");
  const auto subjects = group_by_subject(dataset);
  if (subjects.empty()) throw InsufficientDataError("dataset has no subjects");
  for (const auto& [id, data] : subjects) {
    if (data.genuine.size() <= options.n) {
      throw ProtocolError("subject '" + id + "' has " + std::to_string(data.genuine.size()) +
                              " genuine samples; need more than n = " + std::to_string(options.n),
                          id);
    }
    if (data.forgery.empty()) throw ProtocolError("subject '" + id + "' has no forgeries", id);
  }

  std::vector<const std::pair<const std::string, SubjectData>*> items;
  for (const auto& entry : subjects) items.push_back(&entry);
  std::vector<SubjectOutcome> outcomes(items.size());
  std::vector<std::exception_ptr> failures(items.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < items.size(); k = next++) {
      try {
        outcomes[k] = evaluate_subject(items[k]->first, items[k]->second, options);
      } catch (...) {
        failures[k] = std::current_exception();
      }
    }
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(options.jobs, static_cast<unsigned>(items.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  EvaluationReport report;
  for (auto& o : outcomes) {
    report.acc += o.metrics.acc;
    report.auc += o.metrics.auc;
    report.eer += o.metrics.eer;
    report.subjects.push_back(o.metrics);
    report.scores.insert(report.scores.end(), o.scores.begin(), o.scores.end());
  }
  const auto count = static_cast<double>(outcomes.size());
  report.acc /= count;
  report.auc /= count;
  report.eer /= count;
  report.roc = roc_curve(report.scores);
  report.pooled_eer = eer_from_roc(report.roc);
  report.protocol.n = options.n;
  report.protocol.seed = options.seed;
  report.protocol.subjects = outcomes.size();
  report.protocol.folds = options.folds;
  report.protocol.nu = options.model.nu;
  report.protocol.sigma_sq = options.model.sigma_sq;
  return report;
}

std::map<std::string, EvaluationReport> run_protocol_by_class(
    std::span<const FeatureVector> dataset,
    const std::map<std::string, std::string>& class_of_subject, const ProtocolOptions& options,
    const std::vector<std::string>& class_names) {
  std::map<std::string, std::vector<FeatureVector>> members;
  for (const auto& fv : dataset) {
    const auto it = class_of_subject.find(fv.subject_id);
    if (it == class_of_subject.end()) {
      throw ProtocolError("subject '" + fv.subject_id + "' has no class assignment", fv.subject_id);
    }
    members[it->second].push_back(fv);
  }
  std::set<std::string> classes(class_names.begin(), class_names.end());
  for (const auto& [subject, cls] : class_of_subject) classes.insert(cls);

  std::map<std::string, EvaluationReport> out;
  for (const auto& cls : classes) {
    const auto it = members.find(cls);
    if (it == members.end() || it->second.empty()) {
      warn("class '" + cls + "' has no subjects in the dataset; skipped");
      continue;
    }
    out.emplace(cls, run_protocol(it->second, options));
  }
  return out;
}

}  // namespace permsig
