#include "permsig/ocsvm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "permsig/errors.hpp"
#include "permsig/random.hpp"

namespace permsig {
namespace {

constexpr double kMinCurvature = 1e-12;

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double d2 = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    d2 += d * d;
  }
  return d2;
}

double kernel(const FeaturePoint& a, const FeaturePoint& b, double sigma_sq) {
  return std::exp(-squared_distance(a, b) / (2.0 * sigma_sq));
}

void check_samples(std::span<const FeaturePoint> samples) {
  if (samples.size() < 2) {
    throw InsufficientDataError("one-class SVM needs at least 2 training samples, got " +
                                std::to_string(samples.size()));
  }
  for (const auto& s : samples) {
    for (double v : s) {
      if (!std::isfinite(v)) throw ValidationError("training sample has a non-finite feature");
    }
  }
}

// Decision sums over the positive multipliers in index order; the offset is
// computed with the same summation so training points score consistently.
double weighted_kernel_sum(std::span<const FeaturePoint> points, std::span<const double> alphas,
                           const FeaturePoint& z, double sigma_sq) {
  double s = 0.0;
  for (std::size_t j = 0; j < points.size(); ++j) {
    if (alphas[j] > 0.0) s += alphas[j] * kernel(z, points[j], sigma_sq);
  }
  return s;
}

}  // namespace

void OcSvmConfig::validate() const {
  if (!(nu > 0.0 && nu <= 1.0)) throw ParameterError("nu must be in (0, 1]");
  if (!(sigma_sq > 0.0) || !std::isfinite(sigma_sq)) {
    throw ParameterError("sigma_sq must be positive and finite");
  }
  if (!(tolerance > 0.0)) throw ParameterError("solver tolerance must be positive");
  if (max_iterations == 0) throw ParameterError("max_iterations must be positive");
}

double rbf_kernel(std::span<const double> a, std::span<const double> b, double sigma_sq) {
  if (a.size() != b.size()) throw LengthError("kernel arguments differ in dimension");
  if (!(sigma_sq > 0.0)) throw ParameterError("sigma_sq must be positive");
  for (double v : a) {
    if (!std::isfinite(v)) throw ValidationError("non-finite kernel argument");
  }
  for (double v : b) {
    if (!std::isfinite(v)) throw ValidationError("non-finite kernel argument");
  }
  return std::exp(-squared_distance(a, b) / (2.0 * sigma_sq));
}

std::string_view to_string(Verdict verdict) {
  return verdict == Verdict::genuine ? "genuine" : "suspicious";
}

DualSolution solve_dual(std::span<const FeaturePoint> samples, const OcSvmConfig& config) {
  config.validate();
  check_samples(samples);
  const std::size_t n = samples.size();
  const double upper = 1.0 / (config.nu * static_cast<double>(n));

  std::vector<double> gram(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    gram[i * n + i] = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double k = kernel(samples[i], samples[j], config.sigma_sq);
      gram[i * n + j] = k;
      gram[j * n + i] = k;
    }
  }

  DualSolution sol;
  sol.alphas.assign(n, 0.0);
  double remaining = 1.0;
  for (std::size_t i = 0; i < n && remaining > 0.0; ++i) {
    sol.alphas[i] = std::min(upper, remaining);
    remaining -= sol.alphas[i];
  }
  auto& alpha = sol.alphas;

  std::vector<double> grad(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (alpha[i] == 0.0) continue;
    for (std::size_t k = 0; k < n; ++k) grad[k] += alpha[i] * gram[k * n + i];
  }

  for (;;) {
    // i may grow (alpha_i < C); j may shrink (alpha_j > 0).
    std::size_t up = n;
    std::size_t low = n;
    double g_up = std::numeric_limits<double>::infinity();
    double g_low = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
      if (alpha[k] < upper && grad[k] < g_up) {
        g_up = grad[k];
        up = k;
      }
      if (alpha[k] > 0.0 && grad[k] > g_low) {
        g_low = grad[k];
        low = k;
      }
    }
    const double gap = (up == n || low == n) ? 0.0 : g_low - g_up;
    sol.kkt_residual = std::max(gap, 0.0);
    if (gap <= config.tolerance) break;
    if (sol.iterations >= config.max_iterations) {
      throw ConvergenceError("one-class SVM did not converge within " +
                                 std::to_string(config.max_iterations) +
                                 " pair updates (KKT residual " +
                                 std::to_string(sol.kkt_residual) + ")",
                             sol.kkt_residual);
    }
    ++sol.iterations;

    const double curvature = std::max(
        gram[up * n + up] + gram[low * n + low] - 2.0 * gram[up * n + low], kMinCurvature);
    double step = gap / curvature;
    const double room_up = upper - alpha[up];
    const double room_low = alpha[low];
    if (step >= room_up || step >= room_low) {
      step = std::min(room_up, room_low);
      if (room_up <= room_low) {
        alpha[up] = upper;
        alpha[low] = room_up == room_low ? 0.0 : alpha[low] - step;
      } else {
        alpha[low] = 0.0;
        alpha[up] += step;
      }
    } else {
      alpha[up] += step;
      alpha[low] -= step;
    }
    for (std::size_t k = 0; k < n; ++k) {
      grad[k] += step * (gram[k * n + up] - gram[k * n + low]);
    }
  }

  // Offset from freshly summed gradients. With free multipliers, b is the
  // smallest gradient over all non-bound samples: KKT puts it within the
  // solver tolerance of the optimal offset, and every free support vector
  // then scores >= 0 exactly. With every multiplier bound, b is the midpoint
  // of the KKT-feasible interval.
  double free_min = std::numeric_limits<double>::infinity();
  double at_upper = -std::numeric_limits<double>::infinity();
  double at_zero = std::numeric_limits<double>::infinity();
  bool any_free = false;
  for (std::size_t i = 0; i < n; ++i) {
    const double g = weighted_kernel_sum(samples, alpha, samples[i], config.sigma_sq);
    if (alpha[i] > 0.0 && alpha[i] < upper) {
      any_free = true;
      free_min = std::min(free_min, g);
    } else if (alpha[i] >= upper) {
      at_upper = std::max(at_upper, g);
    } else {
      at_zero = std::min(at_zero, g);
    }
  }
  if (any_free) {
    sol.offset = std::min(free_min, at_zero);
  } else if (std::isfinite(at_upper) && std::isfinite(at_zero)) {
    sol.offset = 0.5 * (at_upper + at_zero);
  } else {
    sol.offset = std::isfinite(at_upper) ? at_upper : at_zero;
  }
  return sol;
}

OcSvmModel train(std::span<const FeaturePoint> samples, const OcSvmConfig& config) {
  DualSolution sol = solve_dual(samples, config);
  OcSvmModel model;
  model.config = config;
  model.training_size = samples.size();
  model.offset = sol.offset;
  model.kkt_residual = sol.kkt_residual;
  model.iterations = sol.iterations;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (sol.alphas[i] > 0.0) {
      model.support_vectors.push_back(samples[i]);
      model.alphas.push_back(sol.alphas[i]);
    }
  }
  return model;
}

double dual_objective(std::span<const FeaturePoint> samples, std::span<const double> alphas,
                      double sigma_sq) {
  if (alphas.size() != samples.size()) throw LengthError("alphas and samples differ in length");
  double obj = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    for (std::size_t j = 0; j < samples.size(); ++j) {
      obj += alphas[i] * alphas[j] * kernel(samples[i], samples[j], sigma_sq);
    }
  }
  return 0.5 * obj;
}

double decision_value(const OcSvmModel& model, const FeaturePoint& z) {
  if (!model.trained()) throw StateError("one-class SVM model is not trained");
  return weighted_kernel_sum(model.support_vectors, model.alphas, z, model.config.sigma_sq) -
         model.offset;
}

DecisionResult decide(const OcSvmModel& model, const FeaturePoint& z) {
  DecisionResult r;
  r.raw_score = decision_value(model, z);
  r.verdict = r.raw_score >= 0.0 ? Verdict::genuine : Verdict::suspicious;
  return r;
}

std::vector<int> assign_folds(std::size_t n, int folds, std::uint64_t seed) {
  if (folds < 2) throw ParameterError("need at least 2 folds");
  if (n < static_cast<std::size_t>(folds)) {
    throw InsufficientDataError("fewer samples (" + std::to_string(n) + ") than folds (" +
                                std::to_string(folds) + ")");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  std::vector<int> fold(n);
  for (std::size_t k = 0; k < n; ++k) fold[order[k]] = static_cast<int>(k % static_cast<std::size_t>(folds));
  return fold;
}

std::vector<double> cross_validation_acceptance(std::span<const FeaturePoint> samples,
                                                const OcSvmConfig& base,
                                                std::span<const double> sigma_sq_grid,
                                                int folds, std::uint64_t seed) {
  if (sigma_sq_grid.empty()) throw ParameterError("sigma_sq grid is empty");
  const std::vector<int> fold = assign_folds(samples.size(), folds, seed);
  std::vector<double> scores;
  scores.reserve(sigma_sq_grid.size());
  for (double sigma_sq : sigma_sq_grid) {
    OcSvmConfig cfg = base;
    cfg.sigma_sq = sigma_sq;
    double total = 0.0;
    for (int f = 0; f < folds; ++f) {
      std::vector<FeaturePoint> fit;
      std::vector<FeaturePoint> held;
      for (std::size_t i = 0; i < samples.size(); ++i) {
        (fold[i] == f ? held : fit).push_back(samples[i]);
      }
      const OcSvmModel model = train(fit, cfg);
      std::size_t accepted = 0;
      for (const auto& z : held) {
        if (decide(model, z).verdict == Verdict::genuine) ++accepted;
      }
      total += static_cast<double>(accepted) / static_cast<double>(held.size());
    }
    scores.push_back(total / folds);
  }
  return scores;
}

double cross_validate_sigma(std::span<const FeaturePoint> samples, const OcSvmConfig& base,
                            std::span<const double> sigma_sq_grid, int folds,
                            std::uint64_t seed) {
  if (sigma_sq_grid.empty()) throw ParameterError("sigma_sq grid is empty");
  if (sigma_sq_grid.size() == 1) return sigma_sq_grid.front();
  const std::vector<double> scores =
      cross_validation_acceptance(samples, base, sigma_sq_grid, folds, seed);
  const double target = 1.0 - base.nu;
  std::size_t best = 0;
  for (std::size_t k = 1; k < scores.size(); ++k) {
    if (std::abs(scores[k] - target) < std::abs(scores[best] - target)) best = k;
  }
  return sigma_sq_grid[best];
}

}  // namespace permsig
