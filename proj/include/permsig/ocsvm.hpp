#pragma once

// One-class SVM (nu formulation) with a Gaussian RBF kernel.
//
// Training solves the dual
//
//     minimize   1/2 a^T K a
//     subject to 0 <= a_i <= 1/(nu N),  sum a_i = 1
//
// by pairwise coordinate descent on the maximal violating pair. The decision
// value of a probe z is sum_i a_i K(z, z_i) - b; values >= 0 are accepted.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "permsig/quantifiers.hpp"

namespace permsig {

struct OcSvmConfig {
  double nu = 0.1;
  double sigma_sq = 10.0;
  double tolerance = 1e-6;
  std::uint64_t max_iterations = 10'000'000;

  void validate() const;
};

/// exp(-||a - b||^2 / (2 sigma_sq)).
double rbf_kernel(std::span<const double> a, std::span<const double> b, double sigma_sq);

enum class Verdict { genuine, suspicious };
std::string_view to_string(Verdict verdict);

struct DecisionResult {
  double raw_score = 0.0;
  Verdict verdict = Verdict::suspicious;
};

struct OcSvmModel {
  std::vector<FeaturePoint> support_vectors;
  std::vector<double> alphas;
  double offset = 0.0;  // b
  OcSvmConfig config;
  std::size_t training_size = 0;
  /// Max KKT violation of the dual at termination.
  double kkt_residual = 0.0;
  std::uint64_t iterations = 0;

  bool trained() const noexcept { return training_size > 0; }
};

/// Trains on N >= 2 finite samples. Throws InsufficientDataError,
/// ValidationError, or ConvergenceError (carrying the KKT residual).
OcSvmModel train(std::span<const FeaturePoint> samples, const OcSvmConfig& config);

/// Solution of the dual over all training samples, including zero
/// multipliers. Exposed for diagnostics and oracle checks.
struct DualSolution {
  std::vector<double> alphas;
  double offset = 0.0;
  double kkt_residual = 0.0;
  std::uint64_t iterations = 0;
};
DualSolution solve_dual(std::span<const FeaturePoint> samples, const OcSvmConfig& config);

/// Dual objective 1/2 a^T K a.
double dual_objective(std::span<const FeaturePoint> samples, std::span<const double> alphas,
                      double sigma_sq);

double decision_value(const OcSvmModel& model, const FeaturePoint& z);
DecisionResult decide(const OcSvmModel& model, const FeaturePoint& z);

/// Fold index (0..folds-1) of each of n samples, from a seeded shuffle.
std::vector<int> assign_folds(std::size_t n, int folds, std::uint64_t seed);

/// Mean held-out acceptance rate per grid value (same order as the grid).
std::vector<double> cross_validation_acceptance(std::span<const FeaturePoint> samples,
                                                const OcSvmConfig& base,
                                                std::span<const double> sigma_sq_grid,
                                                int folds, std::uint64_t seed);

/// Grid value whose mean held-out acceptance is closest to 1 - nu; ties go
/// to the earlier grid entry.
double cross_validate_sigma(std::span<const FeaturePoint> samples, const OcSvmConfig& base,
                            std::span<const double> sigma_sq_grid, int folds = 5,
                            std::uint64_t seed = 0);

}  // namespace permsig
