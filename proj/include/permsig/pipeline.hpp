#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "permsig/dataio.hpp"
#include "permsig/ordinal.hpp"
#include "permsig/preprocess.hpp"
#include "permsig/quantifiers.hpp"

namespace permsig {

struct FeatureOptions {
  OrdinalConfig ordinal;
  std::size_t resample_length = kDefaultResampleLength;
  unsigned jobs = 1;
};

/// preprocess + quantify_signature.
FeatureVector extract_features(const SignatureTrace& raw, const FeatureOptions& options);

/// Extracts every trace on a pool of `options.jobs` workers. Results are in
/// input order. The first failure (in input order) is rethrown.
std::vector<FeatureVector> extract_features(std::span<const SignatureTrace> raw,
                                            const FeatureOptions& options);

struct FileFailure {
  std::filesystem::path path;
  std::string message;
};

struct ManifestFeatures {
  std::vector<FeatureVector> features;  // sorted by subject, label, index
  std::vector<FileFailure> failures;
};

/// Loads and extracts every manifest entry; failing files are collected
/// instead of aborting the run.
ManifestFeatures extract_features(const DatasetManifest& manifest, const FeatureOptions& options);

/// Sort key used for all feature outputs: subject, genuine before forgery,
/// sample index.
void sort_features(std::vector<FeatureVector>& features);

}  // namespace permsig
