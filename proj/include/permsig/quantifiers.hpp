#pragma once

// Information-theory quantifiers of a discrete probability distribution,
// all in natural-log units:
//
//   S[P]   = -sum p ln p                          (Shannon entropy, 0 ln 0 = 0)
//   H[P]   = S[P] / ln N                          (normalized entropy)
//   F[P]   = F0 * sum_{i} (sqrt p_{i+1} - sqrt p_i)^2
//            F0 = 1 for a delta at the first or last index, 1/2 otherwise
//   J[P]   = S[(P+Pe)/2] - S[P]/2 - S[Pe]/2        (Jensen-Shannon vs uniform Pe)
//   Q[P]   = J[P] / J[delta]                      (disequilibrium, in [0,1])
//   C[P]   = Q[P] * H[P]                          (statistical complexity)
//
// Fisher information depends on the index order; distributions produced by
// bandt_pompe_pdf are indexed in Lehmer order.

#include <array>
#include <cstddef>
#include <span>
#include <string>

#include "permsig/ordinal.hpp"
#include "permsig/preprocess.hpp"

namespace permsig {

/// Throws ValidationError on negative/non-finite entries or when the sum
/// deviates from 1 by more than 1e-9.
void validate_distribution(std::span<const double> p);

double shannon_entropy(std::span<const double> p);
double normalized_entropy(std::span<const double> p);
double fisher_information(std::span<const double> p);

/// Raw Jensen-Shannon divergence between p and the uniform distribution.
double jensen_shannon_divergence(std::span<const double> p);
/// Q0 = 1 / J[delta, Pe] for support size N >= 2.
double disequilibrium_normalizer(std::size_t n);
double jensen_shannon_disequilibrium(std::span<const double> p);
double statistical_complexity(std::span<const double> p);

struct QuantifierTriple {
  double entropy = 0.0;
  double complexity = 0.0;
  double fisher = 0.0;
};

QuantifierTriple quantify(std::span<const double> p);

inline constexpr std::size_t kFeatureCount = 6;
inline constexpr std::array<const char*, kFeatureCount> kFeatureNames = {
    "h_x", "c_x", "f_x", "h_y", "c_y", "f_y"};

using FeaturePoint = std::array<double, kFeatureCount>;

struct FeatureVector {
  double h_x = 0, c_x = 0, f_x = 0;
  double h_y = 0, c_y = 0, f_y = 0;
  std::string subject_id;
  Label label = Label::genuine;
  int sample_index = 0;

  /// Features in canonical order (h_x, c_x, f_x, h_y, c_y, f_y).
  FeaturePoint values() const { return {h_x, c_x, f_x, h_y, c_y, f_y}; }
  void set_values(const FeaturePoint& v);
};

/// Ordinal distribution and quantifiers of each axis of a preprocessed trace.
FeatureVector quantify_signature(const SignatureTrace& trace, const OrdinalConfig& config);

}  // namespace permsig
