#include "permsig/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <optional>
#include <thread>
#include <tuple>

namespace permsig {
namespace {

// Runs task(i) for i in [0, count) on up to `jobs` threads.
template <typename Task>
void parallel_for(std::size_t count, unsigned jobs, Task task) {
  const unsigned workers = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(count)));
  std::atomic<std::size_t> next{0};
  auto run = [&] {
    for (std::size_t i = next++; i < count; i = next++) task(i);
  };
  if (workers <= 1) {
    run();
    return;
  }
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < workers; ++t) pool.emplace_back(run);
}

}  // namespace

FeatureVector extract_features(const SignatureTrace& raw, const FeatureOptions& options) {
  return quantify_signature(preprocess(raw, options.resample_length), options.ordinal);
}

std::vector<FeatureVector> extract_features(std::span<const SignatureTrace> raw,
                                            const FeatureOptions& options) {
  options.ordinal.validate();
  std::vector<FeatureVector> out(raw.size());
  std::vector<std::exception_ptr> errors(raw.size());
  parallel_for(raw.size(), options.jobs, [&](std::size_t i) {
    try {
      out[i] = extract_features(raw[i], options);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  });
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

ManifestFeatures extract_features(const DatasetManifest& manifest, const FeatureOptions& options) {
  options.ordinal.validate();
  const std::vector<ManifestEntry> entries = manifest_entries(manifest);
  std::vector<std::optional<FeatureVector>> results(entries.size());
  std::vector<std::string> messages(entries.size());
  parallel_for(entries.size(), options.jobs, [&](std::size_t i) {
    try {
      results[i] = extract_features(load_entry(entries[i], manifest.format), options);
    } catch (const std::exception& e) {
      messages[i] = e.what();
    }
  });
  ManifestFeatures out;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (results[i]) {
      out.features.push_back(std::move(*results[i]));
    } else {
      out.failures.push_back({entries[i].path, messages[i]});
    }
  }
  sort_features(out.features);
  return out;
}

void sort_features(std::vector<FeatureVector>& features) {
  std::stable_sort(features.begin(), features.end(), [](const FeatureVector& a, const FeatureVector& b) {
    return std::tie(a.subject_id, a.label, a.sample_index) <
           std::tie(b.subject_id, b.label, b.sample_index);
  });
}

}  // namespace permsig
