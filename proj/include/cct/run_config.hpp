#pragma once

#include "cct/data.hpp"
#include "cct/experiment.hpp"

#include <json.hpp>

#include <optional>
#include <string>

namespace cct {

enum class DatasetKind { blobs, idx, embedding_csv };

struct DatasetSource {
  DatasetKind kind = DatasetKind::blobs;
  double test_fraction = 0.2;
  BlobSpec blobs;
  bool blobs_seed_fixed = false;  // explicit blob seed in the config file
  std::string images_path;
  std::string labels_path;
  std::string csv_path;
};

struct OutputConfig {
  std::string dir = "out";
  bool plot = true;
};

struct RunConfig {
  DatasetSource dataset;
  ExperimentConfig experiment;
  OutputConfig output;
};

/// Parses and validates a run configuration. Violations are collected and
/// reported together in one ConfigError rather than first-error-only.
RunConfig parse_run_config(const std::string& path);

/// Normalized view of a config with defaults filled in; keys are emitted in
/// sorted order so the echo is stable.
nlohmann::json normalized_config(const RunConfig& config);

/// Materializes the configured dataset, splitting blobs and freshly loaded
/// files with the configured test fraction.
LabeledDataset build_dataset(const RunConfig& config);

}  // namespace cct
