#include "permsig/quantifiers.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "permsig/errors.hpp"

namespace permsig {
namespace {

constexpr double kNormalizationTolerance = 1e-9;
constexpr double kTinyProbability = 1e-300;

double plogp(double p) { return p < kTinyProbability ? 0.0 : p * std::log(p); }

void require_support(std::size_t n) {
  if (n < 2) throw ValidationError("distribution needs support size N >= 2");
}

// S[(P+Pe)/2] - S[P]/2 - S[Pe]/2, without validation.
double js_divergence_unchecked(std::span<const double> p) {
  const auto n = static_cast<double>(p.size());
  const double pe = 1.0 / n;
  double mixed = 0.0;
  double own = 0.0;
  for (double v : p) {
    mixed -= plogp(0.5 * (v + pe));
    own -= plogp(v);
  }
  return mixed - 0.5 * own - 0.5 * std::log(n);
}

}  // namespace

void validate_distribution(std::span<const double> p) {
  if (p.empty()) throw ValidationError("empty probability vector");
  double sum = 0.0;
  for (double v : p) {
    if (!std::isfinite(v) || v < 0.0) {
      throw ValidationError("probability entries must be finite and non-negative");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > kNormalizationTolerance) {
    throw ValidationError("probabilities sum to " + std::to_string(sum) + ", not 1");
  }
}

double shannon_entropy(std::span<const double> p) {
  validate_distribution(p);
  double s = 0.0;
  for (double v : p) s -= plogp(v);
  return std::max(s, 0.0);
}

double normalized_entropy(std::span<const double> p) {
  validate_distribution(p);
  require_support(p.size());
  const double h = shannon_entropy(p) / std::log(static_cast<double>(p.size()));
  return std::clamp(h, 0.0, 1.0);
}

double fisher_information(std::span<const double> p) {
  validate_distribution(p);
  require_support(p.size());
  const std::size_t n = p.size();
  // Exact test: a count-derived delta has probability exactly 1.
  const bool delta_at_end =
      (p.front() == 1.0 && std::all_of(p.begin() + 1, p.end(), [](double v) { return v == 0.0; })) ||
      (p.back() == 1.0 && std::all_of(p.begin(), p.end() - 1, [](double v) { return v == 0.0; }));
  const double f0 = delta_at_end ? 1.0 : 0.5;
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double d = std::sqrt(p[i + 1]) - std::sqrt(p[i]);
    sum += d * d;
  }
  return std::clamp(f0 * sum, 0.0, 1.0);
}

double jensen_shannon_divergence(std::span<const double> p) {
  validate_distribution(p);
  require_support(p.size());
  return std::max(js_divergence_unchecked(p), 0.0);
}

double disequilibrium_normalizer(std::size_t n) {
  require_support(n);
  std::vector<double> delta(n, 0.0);
  delta[0] = 1.0;
  return 1.0 / js_divergence_unchecked(delta);
}

double jensen_shannon_disequilibrium(std::span<const double> p) {
  const double j = jensen_shannon_divergence(p);
  return std::clamp(disequilibrium_normalizer(p.size()) * j, 0.0, 1.0);
}

double statistical_complexity(std::span<const double> p) {
  return jensen_shannon_disequilibrium(p) * normalized_entropy(p);
}

QuantifierTriple quantify(std::span<const double> p) {
  return {normalized_entropy(p), statistical_complexity(p), fisher_information(p)};
}

void FeatureVector::set_values(const FeaturePoint& v) {
  h_x = v[0];
  c_x = v[1];
  f_x = v[2];
  h_y = v[3];
  c_y = v[4];
  f_y = v[5];
}

FeatureVector quantify_signature(const SignatureTrace& trace, const OrdinalConfig& config) {
  trace.validate();
  const QuantifierTriple qx = quantify(bandt_pompe_pdf(trace.x, config).probabilities);
  const QuantifierTriple qy = quantify(bandt_pompe_pdf(trace.y, config).probabilities);
  FeatureVector fv;
  fv.h_x = qx.entropy;
  fv.c_x = qx.complexity;
  fv.f_x = qx.fisher;
  fv.h_y = qy.entropy;
  fv.c_y = qy.complexity;
  fv.f_y = qy.fisher;
  fv.subject_id = trace.subject_id;
  fv.label = trace.label;
  fv.sample_index = trace.sample_index;
  return fv;
}

}  // namespace permsig
