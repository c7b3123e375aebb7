#pragma once

// Ordinal-pattern (Bandt-Pompe) symbolization of scalar time series.
//
// Pattern convention
// ------------------
// A window of D samples taken at lag tau ending at time s is listed in
// chronological order, position 0 being the oldest sample x[s-(D-1)tau] and
// position D-1 the most recent x[s]. Its ordinal pattern is the permutation
// of positions that sorts the window into ascending order:
//
//     window   (1, 4, 3, 2)       positions 0 1 2 3
//     ascending 1 < 2 < 3 < 4  -> positions 0 3 2 1  -> pattern [0321]
//
// Equal values keep chronological order (the older sample is taken as the
// smaller one), so every window maps to exactly one pattern.
//
// Patterns are indexed by their rank in lexicographic order (Lehmer code).
// The strictly increasing window has pattern (0,1,...,D-1), rank 0; the
// strictly decreasing window has pattern (D-1,...,0), rank D!-1. Monotone
// series therefore put all their mass on an endpoint index of the
// distribution.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace permsig {

inline constexpr int kMinEmbeddingDimension = 2;
inline constexpr int kMaxEmbeddingDimension = 8;

struct OrdinalConfig {
  int dimension = 5;  // D
  int lag = 1;        // tau

  /// Throws ParameterError unless 2 <= D <= 8 and tau >= 1.
  void validate() const;
  /// D!
  std::size_t pattern_count() const;
  /// (D-1)*tau + 1, the shortest series producing one window.
  std::size_t min_series_length() const;

  friend bool operator==(const OrdinalConfig&, const OrdinalConfig&) = default;
};

using Permutation = std::vector<int>;

struct OrdinalDistribution {
  std::vector<double> probabilities;       // length D!, Lehmer order
  std::vector<std::uint64_t> counts;       // raw pattern counts, same order
  OrdinalConfig config;
  std::size_t window_count = 0;            // M - (D-1)*tau
};

/// n! for 0 <= n <= 20.
std::uint64_t factorial(int n);

/// Ordinal pattern of a single window of D values (D within supported range).
Permutation pattern_of_window(std::span<const double> window);

/// Lexicographic rank of a permutation of {0..D-1}.
std::size_t lehmer_rank(std::span<const int> permutation);

/// Inverse of lehmer_rank.
Permutation lehmer_unrank(std::size_t rank, int dimension);

/// Pattern histogram over all windows of the series, normalized by the
/// number of windows. Warns when the series is shorter than 10*D!.
OrdinalDistribution bandt_pompe_pdf(std::span<const double> series,
                                    const OrdinalConfig& config);

}  // namespace permsig
