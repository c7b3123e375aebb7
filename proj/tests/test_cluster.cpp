#include <doctest.h>

#include <cmath>
#include <set>

#include "oracles.hpp"
#include "permsig/cluster.hpp"
#include "permsig/errors.hpp"
#include "permsig/random.hpp"

using namespace permsig;

namespace {

SubjectSummary point(const std::string& id, std::vector<double> values) {
  SubjectSummary s;
  s.subject_id = id;
  s.values = std::move(values);
  for (std::size_t k = 0; k < s.values.size(); ++k) s.names.push_back("d" + std::to_string(k));
  return s;
}

FeatureVector fv(const std::string& id, int index, double fill) {
  FeatureVector v;
  v.subject_id = id;
  v.sample_index = index;
  FeaturePoint p;
  p.fill(fill);
  v.set_values(p);
  return v;
}

// Three well separated 4-D blobs of `per` subjects each; subject ids are
// shuffled so blob membership is not visible in the names.
std::vector<SubjectSummary> three_blobs(std::uint64_t seed, std::size_t per,
                                        std::map<std::string, int>& truth) {
  Rng rng(seed);
  const std::vector<std::vector<double>> centres{{0, 0, 0, 0}, {5, 5, 0, 0}, {0, 5, 5, 5}};
  std::vector<std::size_t> labels(3 * per);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = i;
  rng.shuffle(std::span<std::size_t>(labels));
  std::vector<SubjectSummary> out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int blob = static_cast<int>(i / per);
    std::vector<double> v = centres[static_cast<std::size_t>(blob)];
    for (double& x : v) x += 0.3 * rng.normal();
    const std::string id = "u" + std::to_string(100 + labels[i]);
    truth[id] = blob;
    out.push_back(point(id, v));
  }
  return out;
}

std::set<std::string> leaves_under(const Dendrogram& d, std::size_t node) {
  const std::size_t n = d.leaves.size();
  if (node < n) return {d.leaves[node]};
  auto l = leaves_under(d, d.merges[node - n].left);
  auto r = leaves_under(d, d.merges[node - n].right);
  l.insert(r.begin(), r.end());
  return l;
}

}  // namespace

TEST_CASE("feature selection parsing") {
  CHECK(default_feature_selection() == FeatureSelection{0, 3});
  CHECK(parse_feature_selection("h_x,h_y") == FeatureSelection{0, 3});
  CHECK(parse_feature_selection("all") == all_features());
  CHECK(parse_feature_selection("f_y,c_x") == FeatureSelection{5, 1});
  CHECK_THROWS_AS(parse_feature_selection("h_z"), ParameterError);
  CHECK_THROWS_AS(parse_metric("cosine"), ParameterError);
  CHECK_THROWS_AS(parse_linkage("ward"), ParameterError);
  CHECK(parse_metric("manhattan") == Metric::manhattan);
  CHECK(parse_linkage("single") == Linkage::single);
}

TEST_CASE("summarize_subject") {
  const std::vector<FeatureVector> same{fv("a", 1, 0.3), fv("a", 2, 0.3), fv("a", 3, 0.3)};
  const auto s = summarize_subject(same, all_features());
  REQUIRE(s.values.size() == 12);
  for (std::size_t k = 0; k < 6; ++k) {
    CHECK(s.values[2 * k] == doctest::Approx(0.3));
    CHECK(s.values[2 * k + 1] == 0.0);
  }
  CHECK(s.names[0] == "mean_h_x");
  CHECK(s.names[1] == "sd_h_x");

  const std::vector<FeatureVector> two{fv("b", 1, 0.0), fv("b", 2, 1.0)};
  const auto t = summarize_subject(two);
  REQUIRE(t.values.size() == 4);
  CHECK(t.values[0] == 0.5);
  CHECK(t.values[1] == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
  CHECK(t.names == std::vector<std::string>{"mean_h_x", "sd_h_x", "mean_h_y", "sd_h_y"});

  CHECK_THROWS_AS(summarize_subject(std::vector<FeatureVector>{fv("c", 1, 0.1)}), InsufficientDataError);
}

TEST_CASE("summarize_genuine ignores forgeries and sorts subjects") {
  std::vector<FeatureVector> data{fv("z", 1, 0.2), fv("z", 2, 0.4), fv("a", 1, 0.1), fv("a", 2, 0.1)};
  auto forged = fv("z", 1, 9.0);
  forged.label = Label::forgery;
  data.push_back(forged);
  const auto s = summarize_genuine(data);
  REQUIRE(s.size() == 2);
  CHECK(s[0].subject_id == "a");
  CHECK(s[1].values[0] == doctest::Approx(0.3));
}

TEST_CASE("distances") {
  const std::vector<double> a{0, 0};
  const std::vector<double> b{3, -4};
  CHECK(distance(a, b, Metric::euclidean) == 5.0);
  CHECK(distance(a, b, Metric::manhattan) == 7.0);
  CHECK(distance(a, b, Metric::maximum) == 4.0);
}

TEST_CASE("small dendrograms") {
  const std::vector<SubjectSummary> two{point("p", {0, 0}), point("q", {3, 4})};
  const auto d2 = hierarchical_cluster(two);
  REQUIRE(d2.merges.size() == 1);
  CHECK(d2.merges[0].height == 5.0);
  CHECK(to_newick(d2) == "(p:5,q:5);");

  const std::vector<SubjectSummary> three{point("c", {10}), point("a", {0}), point("b", {1})};
  const auto d3 = hierarchical_cluster(three);
  REQUIRE(d3.merges.size() == 2);
  CHECK(leaves_under(d3, 3) == std::set<std::string>{"a", "b"});
  CHECK(d3.merges[0].height == 1.0);
  CHECK(d3.merges[1].height == 9.5);  // average of 10 and 9
  CHECK(to_newick(d3) == "((a:1,b:1):8.5,c:9.5);");

  // Numbering follows each cluster's smallest member, not input order.
  CHECK(cut_dendrogram(d3, 3) == ClusterAssignment{{"a", 0}, {"b", 1}, {"c", 2}});
  CHECK(cut_dendrogram(d3, 2) == ClusterAssignment{{"a", 0}, {"b", 0}, {"c", 1}});
  CHECK(cut_dendrogram(d3, 1) == ClusterAssignment{{"a", 0}, {"b", 0}, {"c", 0}});
  CHECK_THROWS_AS(cut_dendrogram(d3, 0), ParameterError);
  CHECK_THROWS_AS(cut_dendrogram(d3, 4), ParameterError);
  CHECK(cut_dendrogram_at_height(d3, 0.5) == cut_dendrogram(d3, 2));
  CHECK(cut_dendrogram_at_height(d3, 1.0) == cut_dendrogram(d3, 1));
  CHECK(cut_dendrogram_at_height(d3, 0.0) == cut_dendrogram(d3, 3));

  CHECK_THROWS_AS(hierarchical_cluster(std::vector<SubjectSummary>{point("a", {0}), point("a", {1})}),
                  ValidationError);
  CHECK_THROWS_AS(hierarchical_cluster(std::vector<SubjectSummary>{point("a", {0})}), InsufficientDataError);
}

TEST_CASE("equal distances merge the lexicographically smallest pair") {
  // Square: all four sides tie.
  const std::vector<SubjectSummary> sq{point("d", {1, 1}), point("c", {0, 1}), point("b", {1, 0}),
                                       point("a", {0, 0})};
  const auto d = hierarchical_cluster(sq);
  CHECK(leaves_under(d, 4) == std::set<std::string>{"a", "b"});
  CHECK(leaves_under(d, 5) == std::set<std::string>{"c", "d"});
}

TEST_CASE("merge sequence matches the brute-force agglomeration") {
  for (const std::string linkage : {"average", "complete", "single"}) {
    std::map<std::string, int> truth;
    const auto s = three_blobs(21, 6, truth);
    const auto d = hierarchical_cluster(s, Metric::euclidean, parse_linkage(linkage));
    std::vector<std::string> ids;
    std::vector<std::vector<double>> pts;
    for (const auto& x : s) {
      ids.push_back(x.subject_id);
      pts.push_back(x.values);
    }
    const auto naive = oracle::naive_agglomerate(ids, pts, linkage);
    REQUIRE(naive.size() == d.merges.size());
    for (std::size_t k = 0; k < naive.size(); ++k) {
      const auto l = leaves_under(d, d.merges[k].left);
      const auto r = leaves_under(d, d.merges[k].right);
      CHECK(l == std::set<std::string>(naive[k].left.begin(), naive[k].left.end()));
      CHECK(r == std::set<std::string>(naive[k].right.begin(), naive[k].right.end()));
      CHECK(d.merges[k].height == doctest::Approx(naive[k].height).epsilon(1e-12));
    }
  }
}

TEST_CASE("three blobs are recovered at k = 3") {
  std::map<std::string, int> truth;
  const auto s = three_blobs(33, 8, truth);
  const auto a = cut_dendrogram(hierarchical_cluster(s), 3);
  std::map<int, int> blob_to_cluster;
  for (const auto& [id, c] : a) {
    const auto [it, fresh] = blob_to_cluster.emplace(truth.at(id), c);
    CHECK(it->second == c);
  }
  CHECK(blob_to_cluster.size() == 3);
  const auto agreement = compare_metrics(s, Linkage::average, 3);
  CHECK(agreement.all_agree);
  for (int run = 0; run < 10; ++run) CHECK(cut_dendrogram(hierarchical_cluster(s), 3) == a);
}

TEST_CASE("newick quoting and heights") {
  const std::vector<SubjectSummary> s{point("it's", {0}), point("x y", {0.25})};
  CHECK(to_newick(hierarchical_cluster(s)) == "('it''s':0.25,'x y':0.25);");
}

TEST_CASE("parallelepiped classifier") {
  const std::vector<LabeledSummary> train{{"big", point("a", {0, 0})},
                                          {"big", point("b", {10, 10})},
                                          {"small", point("c", {4, 4})},
                                          {"small", point("d", {6, 6})},
                                          {"side", point("e", {20, 0})},
                                          {"side", point("f", {22, 1})}};
  const auto m = parallelepiped_fit(train);
  for (const auto& t : train) CHECK(parallelepiped_classify(m, t.summary.values) == t.class_name);
  CHECK(parallelepiped_classify(m, std::vector<double>{5, 5}) == "small");  // nested: smaller wins
  CHECK(parallelepiped_classify(m, std::vector<double>{1, 9}) == "big");
  CHECK(!parallelepiped_classify(m, std::vector<double>{-1, 5}).has_value());
  CHECK(m.dimensions == std::vector<std::string>{"d0", "d1"});
  CHECK(m.boxes.at("big")[0].min == 0.0);
  CHECK(m.boxes.at("big")[0].max == 10.0);
  CHECK_THROWS_AS(parallelepiped_classify(m, std::vector<double>{1}), LengthError);
}
