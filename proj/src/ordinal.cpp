#include "permsig/ordinal.hpp"

#include <array>
#include <cmath>
#include <string>

#include "permsig/diagnostics.hpp"
#include "permsig/errors.hpp"

namespace permsig {
namespace {

constexpr std::array<std::uint64_t, 21> kFactorials = [] {
  std::array<std::uint64_t, 21> f{};
  f[0] = 1;
  for (std::size_t i = 1; i < f.size(); ++i) f[i] = f[i - 1] * i;
  return f;
}();

// Stable ascending argsort of D strided values by insertion sort.
// Equal values keep chronological order.
void sort_positions(const double* x, std::size_t lag, int dimension,
                    std::array<int, kMaxEmbeddingDimension>& order) {
  for (int i = 0; i < dimension; ++i) {
    int j = i;
    const double v = x[static_cast<std::size_t>(i) * lag];
    while (j > 0 && x[static_cast<std::size_t>(order[j - 1]) * lag] > v) {
      order[j] = order[j - 1];
      --j;
    }
    order[j] = i;
  }
}

std::size_t rank_of_order(const std::array<int, kMaxEmbeddingDimension>& order,
                          int dimension) {
  std::size_t rank = 0;
  for (int i = 0; i < dimension; ++i) {
    int smaller_after = 0;
    for (int j = i + 1; j < dimension; ++j) {
      if (order[j] < order[i]) ++smaller_after;
    }
    rank += static_cast<std::size_t>(smaller_after) *
            kFactorials[static_cast<std::size_t>(dimension - 1 - i)];
  }
  return rank;
}

void check_dimension(int dimension) {
  if (dimension < kMinEmbeddingDimension || dimension > kMaxEmbeddingDimension) {
    throw ParameterError("embedding dimension must be in [2, 8], got " +
                         std::to_string(dimension));
  }
}

}  // namespace

void OrdinalConfig::validate() const {
  check_dimension(dimension);
  if (lag < 1) {
    throw ParameterError("time lag must be >= 1, got " + std::to_string(lag));
  }
}

std::size_t OrdinalConfig::pattern_count() const {
  return static_cast<std::size_t>(factorial(dimension));
}

std::size_t OrdinalConfig::min_series_length() const {
  return static_cast<std::size_t>(dimension - 1) * static_cast<std::size_t>(lag) + 1;
}

std::uint64_t factorial(int n) {
  if (n < 0 || n > 20) throw ParameterError("factorial argument out of range");
  return kFactorials[static_cast<std::size_t>(n)];
}

Permutation pattern_of_window(std::span<const double> window) {
  const int dimension = static_cast<int>(window.size());
  if (dimension < kMinEmbeddingDimension || dimension > kMaxEmbeddingDimension) {
    throw LengthError("window length must be in [2, 8], got " +
                      std::to_string(window.size()));
  }
  std::array<int, kMaxEmbeddingDimension> order{};
  sort_positions(window.data(), 1, dimension, order);
  return Permutation(order.begin(), order.begin() + dimension);
}

std::size_t lehmer_rank(std::span<const int> permutation) {
  const int n = static_cast<int>(permutation.size());
  if (n < 1 || n > 20) throw ValidationError("permutation length out of range");
  std::vector<bool> seen(permutation.size(), false);
  for (int v : permutation) {
    if (v < 0 || v >= n || seen[static_cast<std::size_t>(v)]) {
      throw ValidationError("not a permutation of {0.." + std::to_string(n - 1) + "}");
    }
    seen[static_cast<std::size_t>(v)] = true;
  }
  std::size_t rank = 0;
  for (int i = 0; i < n; ++i) {
    int smaller_after = 0;
    for (int j = i + 1; j < n; ++j) {
      if (permutation[static_cast<std::size_t>(j)] < permutation[static_cast<std::size_t>(i)]) {
        ++smaller_after;
      }
    }
    rank += static_cast<std::size_t>(smaller_after) * kFactorials[static_cast<std::size_t>(n - 1 - i)];
  }
  return rank;
}

Permutation lehmer_unrank(std::size_t rank, int dimension) {
  if (dimension < 1 || dimension > 20) throw ParameterError("dimension out of range");
  if (rank >= kFactorials[static_cast<std::size_t>(dimension)]) {
    throw ParameterError("rank exceeds D!-1");
  }
  std::vector<int> items(static_cast<std::size_t>(dimension));
  for (int i = 0; i < dimension; ++i) items[static_cast<std::size_t>(i)] = i;
  Permutation out;
  out.reserve(items.size());
  for (int i = dimension - 1; i >= 0; --i) {
    const std::uint64_t f = kFactorials[static_cast<std::size_t>(i)];
    const std::size_t digit = rank / f;
    rank %= f;
    out.push_back(items[digit]);
    items.erase(items.begin() + static_cast<std::ptrdiff_t>(digit));
  }
  return out;
}

OrdinalDistribution bandt_pompe_pdf(std::span<const double> series,
                                    const OrdinalConfig& config) {
  config.validate();
  const std::size_t span_len = config.min_series_length();
  if (series.size() < span_len) {
    throw LengthError("series of length " + std::to_string(series.size()) +
                      " is shorter than (D-1)*tau+1 = " + std::to_string(span_len));
  }
  for (double v : series) {
    if (!std::isfinite(v)) throw ValidationError("series contains a non-finite value");
  }
  const std::size_t n_patterns = config.pattern_count();
  if (series.size() < 10 * n_patterns) {
    warn("series length " + std::to_string(series.size()) +
         " is below 10*D! = " + std::to_string(10 * n_patterns) +
         "; ordinal statistics may be unreliable");
  }

  OrdinalDistribution out;
  out.config = config;
  out.window_count = series.size() - span_len + 1;
  out.counts.assign(n_patterns, 0);

  const auto lag = static_cast<std::size_t>(config.lag);
  std::array<int, kMaxEmbeddingDimension> order{};
  for (std::size_t start = 0; start < out.window_count; ++start) {
    sort_positions(series.data() + start, lag, config.dimension, order);
    ++out.counts[rank_of_order(order, config.dimension)];
  }

  out.probabilities.resize(n_patterns);
  const auto total = static_cast<double>(out.window_count);
  for (std::size_t k = 0; k < n_patterns; ++k) {
    out.probabilities[k] = static_cast<double>(out.counts[k]) / total;
  }
  return out;
}

}  // namespace permsig
