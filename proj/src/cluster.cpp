#include "permsig/cluster.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <set>

#include "permsig/errors.hpp"

namespace permsig {
namespace {

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string newick_label(const std::string& name) {
  const bool plain = !name.empty() && name.find_first_of(" \t\n()[]':;,") == std::string::npos;
  if (plain) return name;
  std::string out = "'";
  for (char c : name) {
    if (c == '\'') out += '\'';
    out += c;
  }
  return out + "'";
}

// Union-find over leaves after applying the first `count` merges.
std::vector<std::size_t> leaf_groups(const Dendrogram& d, std::size_t count) {
  const std::size_t n = d.leaves.size();
  std::vector<std::size_t> parent(n + d.merges.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  std::function<std::size_t(std::size_t)> find = [&](std::size_t v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t node = n + k;
    parent[find(d.merges[k].left)] = node;
    parent[find(d.merges[k].right)] = node;
  }
  std::vector<std::size_t> group(n);
  for (std::size_t i = 0; i < n; ++i) group[i] = find(i);
  return group;
}

ClusterAssignment label_groups(const Dendrogram& d, const std::vector<std::size_t>& group) {
  std::vector<std::size_t> leaf_order(d.leaves.size());
  std::iota(leaf_order.begin(), leaf_order.end(), std::size_t{0});
  std::sort(leaf_order.begin(), leaf_order.end(),
            [&](std::size_t a, std::size_t b) { return d.leaves[a] < d.leaves[b]; });
  std::map<std::size_t, int> number;
  ClusterAssignment out;
  for (std::size_t leaf : leaf_order) {
    const auto [it, inserted] = number.emplace(group[leaf], static_cast<int>(number.size()));
    out[d.leaves[leaf]] = it->second;
  }
  return out;
}

}  // namespace

FeatureSelection default_feature_selection() { return {0, 3}; }

FeatureSelection all_features() { return {0, 1, 2, 3, 4, 5}; }

FeatureSelection parse_feature_selection(std::string_view text) {
  if (text == "all") return all_features();
  FeatureSelection out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    const std::string_view name = text.substr(pos, comma - pos);
    const auto it = std::find_if(kFeatureNames.begin(), kFeatureNames.end(),
                                 [&](const char* n) { return name == n; });
    if (it == kFeatureNames.end()) {
      throw ParameterError("unknown feature '" + std::string(name) + "'");
    }
    out.push_back(static_cast<std::size_t>(it - kFeatureNames.begin()));
    pos = comma + 1;
  }
  return out;
}

SubjectSummary summarize_subject(std::span<const FeatureVector> features,
                                 const FeatureSelection& selection) {
  if (features.size() < 2) {
    throw InsufficientDataError("subject summary needs at least 2 signatures");
  }
  if (selection.empty()) throw ParameterError("empty feature selection");
  SubjectSummary s;
  s.subject_id = features.front().subject_id;
  const auto n = static_cast<double>(features.size());
  for (std::size_t f : selection) {
    if (f >= kFeatureCount) throw ParameterError("feature index out of range");
    double mean = 0.0;
    for (const auto& fv : features) mean += fv.values()[f];
    mean /= n;
    double ss = 0.0;
    for (const auto& fv : features) {
      const double d = fv.values()[f] - mean;
      ss += d * d;
    }
    s.values.push_back(mean);
    s.values.push_back(std::sqrt(ss / (n - 1.0)));
    s.names.push_back(std::string("mean_") + kFeatureNames[f]);
    s.names.push_back(std::string("sd_") + kFeatureNames[f]);
  }
  return s;
}

std::vector<SubjectSummary> summarize_genuine(std::span<const FeatureVector> dataset,
                                              const FeatureSelection& selection) {
  std::map<std::string, std::vector<FeatureVector>> by_subject;
  for (const auto& fv : dataset) {
    if (fv.label == Label::genuine) by_subject[fv.subject_id].push_back(fv);
  }
  std::vector<SubjectSummary> out;
  for (const auto& [id, vectors] : by_subject) out.push_back(summarize_subject(vectors, selection));
  return out;
}

Metric parse_metric(std::string_view text) {
  if (text == "euclidean") return Metric::euclidean;
  if (text == "manhattan") return Metric::manhattan;
  if (text == "maximum") return Metric::maximum;
  throw ParameterError("unknown metric '" + std::string(text) + "'");
}

Linkage parse_linkage(std::string_view text) {
  if (text == "average") return Linkage::average;
  if (text == "complete") return Linkage::complete;
  if (text == "single") return Linkage::single;
  throw ParameterError("unknown linkage '" + std::string(text) + "'");
}

std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::euclidean: return "euclidean";
    case Metric::manhattan: return "manhattan";
    case Metric::maximum: return "maximum";
  }
  return "?";
}

std::string_view to_string(Linkage l) {
  switch (l) {
    case Linkage::average: return "average";
    case Linkage::complete: return "complete";
    case Linkage::single: return "single";
  }
  return "?";
}

double distance(std::span<const double> a, std::span<const double> b, Metric metric) {
  if (a.size() != b.size()) throw LengthError("points differ in dimension");
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = std::abs(a[k] - b[k]);
    switch (metric) {
      case Metric::euclidean: acc += d * d; break;
      case Metric::manhattan: acc += d; break;
      case Metric::maximum: acc = std::max(acc, d); break;
    }
  }
  return metric == Metric::euclidean ? std::sqrt(acc) : acc;
}

Dendrogram hierarchical_cluster(std::span<const SubjectSummary> summaries, Metric metric,
                                Linkage linkage) {
  const std::size_t n = summaries.size();
  if (n < 2) throw InsufficientDataError("clustering needs at least 2 summaries");
  std::set<std::string> ids;
  for (const auto& s : summaries) {
    if (!ids.insert(s.subject_id).second) {
      throw ValidationError("duplicate subject id '" + s.subject_id + "'");
    }
    if (s.values.size() != summaries.front().values.size()) {
      throw LengthError("summaries differ in dimension");
    }
  }

  Dendrogram d;
  d.metric = metric;
  d.linkage = linkage;
  for (const auto& s : summaries) d.leaves.push_back(s.subject_id);

  struct Cluster {
    std::size_t node;
    std::size_t size;
    std::string min_id;
  };
  std::vector<Cluster> active;
  for (std::size_t i = 0; i < n; ++i) active.push_back({i, 1, summaries[i].subject_id});
  std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      dist[i][j] = dist[j][i] = distance(summaries[i].values, summaries[j].values, metric);
    }
  }

  // Tie-break key of a pair: (smaller min id, larger min id).
  auto key = [&](std::size_t a, std::size_t b) {
    const std::string& x = active[a].min_id;
    const std::string& y = active[b].min_id;
    return x < y ? std::pair(x, y) : std::pair(y, x);
  };

  while (active.size() > 1) {
    std::size_t best_a = 0;
    std::size_t best_b = 1;
    for (std::size_t a = 0; a < active.size(); ++a) {
      for (std::size_t b = a + 1; b < active.size(); ++b) {
        const double dab = dist[a][b];
        const double dbest = dist[best_a][best_b];
        if (dab < dbest || (dab == dbest && key(a, b) < key(best_a, best_b))) {
          best_a = a;
          best_b = b;
        }
      }
    }
    if (active[best_b].min_id < active[best_a].min_id) std::swap(best_a, best_b);
    const Cluster& ca = active[best_a];
    const Cluster& cb = active[best_b];
    const double height = dist[best_a][best_b];
    d.merges.push_back({ca.node, cb.node, height, ca.size + cb.size});

    const auto na = static_cast<double>(ca.size);
    const auto nb = static_cast<double>(cb.size);
    std::vector<double> merged(active.size(), 0.0);
    for (std::size_t k = 0; k < active.size(); ++k) {
      if (k == best_a || k == best_b) continue;
      switch (linkage) {
        case Linkage::average:
          merged[k] = (na * dist[best_a][k] + nb * dist[best_b][k]) / (na + nb);
          break;
        case Linkage::complete: merged[k] = std::max(dist[best_a][k], dist[best_b][k]); break;
        case Linkage::single: merged[k] = std::min(dist[best_a][k], dist[best_b][k]); break;
      }
    }
    // Merged cluster replaces slot best_a; slot best_b is removed.
    active[best_a] = {n + d.merges.size() - 1, ca.size + cb.size,
                      std::min(ca.min_id, cb.min_id)};
    for (std::size_t k = 0; k < active.size(); ++k) {
      dist[best_a][k] = dist[k][best_a] = merged[k];
    }
    dist[best_a][best_a] = 0.0;
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(best_b));
    dist.erase(dist.begin() + static_cast<std::ptrdiff_t>(best_b));
    for (auto& row : dist) row.erase(row.begin() + static_cast<std::ptrdiff_t>(best_b));
  }
  return d;
}

ClusterAssignment cut_dendrogram(const Dendrogram& dendrogram, std::size_t k) {
  const std::size_t n = dendrogram.leaves.size();
  if (k < 1 || k > n) {
    throw ParameterError("cluster count must be in [1, " + std::to_string(n) + "]");
  }
  return label_groups(dendrogram, leaf_groups(dendrogram, n - k));
}

ClusterAssignment cut_dendrogram_at_height(const Dendrogram& dendrogram, double relative_height) {
  if (!(relative_height >= 0.0 && relative_height <= 1.0)) {
    throw ParameterError("relative cut height must be in [0, 1]");
  }
  const double root = dendrogram.root_height();
  std::size_t count = 0;
  while (count < dendrogram.merges.size()) {
    const double h = root > 0.0 ? dendrogram.merges[count].height / root : 0.0;
    if (h > relative_height) break;
    ++count;
  }
  return label_groups(dendrogram, leaf_groups(dendrogram, count));
}

std::string to_newick(const Dendrogram& dendrogram) {
  const std::size_t n = dendrogram.leaves.size();
  if (n == 0) return ";";
  if (dendrogram.merges.empty()) return newick_label(dendrogram.leaves.front()) + ";";
  auto height_of = [&](std::size_t node) {
    return node < n ? 0.0 : dendrogram.merges[node - n].height;
  };
  std::function<std::string(std::size_t)> emit = [&](std::size_t node) -> std::string {
    if (node < n) return newick_label(dendrogram.leaves[node]);
    const auto& m = dendrogram.merges[node - n];
    return "(" + emit(m.left) + ":" + format_number(m.height - height_of(m.left)) + "," +
           emit(m.right) + ":" + format_number(m.height - height_of(m.right)) + ")";
  };
  return emit(n + dendrogram.merges.size() - 1) + ";";
}

MetricAgreement compare_metrics(std::span<const SubjectSummary> summaries, Linkage linkage,
                                std::size_t k) {
  MetricAgreement out;
  for (Metric m : {Metric::euclidean, Metric::manhattan, Metric::maximum}) {
    out.assignments[m] = cut_dendrogram(hierarchical_cluster(summaries, m, linkage), k);
  }
  const auto& ref = out.assignments.at(Metric::euclidean);
  out.all_agree = std::all_of(out.assignments.begin(), out.assignments.end(),
                              [&](const auto& entry) { return entry.second == ref; });
  return out;
}

ParallelepipedModel parallelepiped_fit(std::span<const LabeledSummary> training) {
  if (training.empty()) throw InsufficientDataError("parallelepiped fit needs training summaries");
  ParallelepipedModel model;
  model.dimensions = training.front().summary.names;
  const std::size_t dims = training.front().summary.values.size();
  for (const auto& item : training) {
    if (item.summary.values.size() != dims) throw LengthError("summaries differ in dimension");
    for (double v : item.summary.values) {
      if (!std::isfinite(v)) throw ValidationError("non-finite summary value");
    }
    auto [it, fresh] = model.boxes.try_emplace(item.class_name);
    auto& box = it->second;
    if (fresh) {
      for (double v : item.summary.values) box.push_back({v, v});
      continue;
    }
    for (std::size_t k = 0; k < dims; ++k) {
      box[k].min = std::min(box[k].min, item.summary.values[k]);
      box[k].max = std::max(box[k].max, item.summary.values[k]);
    }
  }
  return model;
}

std::optional<std::string> parallelepiped_classify(const ParallelepipedModel& model,
                                                   std::span<const double> point) {
  std::optional<std::string> best;
  double best_volume = std::numeric_limits<double>::infinity();
  for (const auto& [name, box] : model.boxes) {
    if (box.size() != point.size()) throw LengthError("point and model differ in dimension");
    bool inside = true;
    double volume = 1.0;
    for (std::size_t k = 0; k < box.size(); ++k) {
      if (point[k] < box[k].min || point[k] > box[k].max) {
        inside = false;
        break;
      }
      volume *= box[k].max - box[k].min;
    }
    // Boxes are visited in name order, so equal volumes keep the smaller name.
    if (inside && volume < best_volume) {
      best = name;
      best_volume = volume;
    } else if (inside && !best) {
      best = name;
      best_volume = volume;
    }
  }
  return best;
}

}  // namespace permsig
