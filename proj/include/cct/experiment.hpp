#pragma once

#include "cct/data.hpp"
#include "cct/detector.hpp"
#include "cct/head_growth.hpp"
#include "cct/nn.hpp"
#include "cct/types.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cct {

struct ExperimentConfig {
  int n_init = 3;
  int n_incr = 1;
  int n_total = 6;

  double ct_a = 10.0;
  double ct_bias = 0.0;
  std::optional<double> ct_a_init_override;

  int replay_per_class = 20;
  TrainConfig initial_train{0.1, 40, 32, 0};
  TrainConfig retrain{0.05, 30, 32, 0};
  HeadGrowthParams head_growth;
  std::vector<Index> hidden_dims = {64, 64};

  // When set, the base accuracy fed to the threshold is re-measured on the
  // full known test set after every iteration instead of staying fixed at the
  // initial model's value.
  bool remeasure_a_init = false;
  // When set, the incremental class schedule is a seeded permutation of the
  // dataset's class order.
  std::optional<std::uint64_t> class_order_seed;

  std::uint64_t seed = 0;
};

struct IterationState {
  Classifier model;
  std::vector<int> known_classes;    // schedule order
  std::vector<int> unknown_classes;  // schedule order, not yet learned
  int iteration = 1;                 // 1-based index of the next iteration
  double a_init = 1.0;
  std::vector<int> node_to_class;    // output node -> dataset class id
};

struct IterationReport {
  int iteration = 0;
  double ct_value = 0.0;
  int tested_count = 0;
  int known_pool_count = 0;              // pool samples drawn from known classes
  int flagged_unknown_count = 0;
  int false_unknown_count = 0;           // known-class samples flagged unknown
  std::vector<int> caught_per_cluster;
  std::vector<int> thin_clusters;        // clusters with fewer than 3 samples
  int replay_sample_count = 0;
  int retrain_sample_count = 0;
  double post_accuracy = 0.0;
  std::vector<int> cluster_to_truth_map; // evaluation-only association
};

struct RunLog {
  ExperimentConfig config;
  std::vector<IterationReport> iterations;
  std::optional<double> ila;  // empty when no iterations ran
  IterationState final_state;
};

/// ceil((n_total - n_init) / n_incr): how many increments the schedule runs.
int planned_iterations(const ExperimentConfig& config);

struct TestPool {
  Matrix features;
  std::vector<int> truth_labels;   // evaluation bookkeeping only
  std::vector<char> from_known;    // parallel to rows
};

struct LabeledSubset {
  Matrix features;
  std::vector<int> labels;
};

/// Raised when an iteration catches fewer samples than it needs clusters;
/// carries the partial diagnostic instead of inventing data.
class IterationAbort : public std::runtime_error {
 public:
  IterationAbort(std::string message, IterationReport diagnostic)
      : std::runtime_error(std::move(message)), report(std::move(diagnostic)) {}
  IterationReport report;
};

/// Trains the initial model on the first n_init scheduled classes and
/// measures the base accuracy on their test splits.
IterationState initial_train(const LabeledDataset& dataset, const ExperimentConfig& config);

/// Known-class test splits plus the full train splits of the next batch of
/// unknown classes, deterministically shuffled.
TestPool build_test_pool(const IterationState& state, const LabeledDataset& dataset,
                         const ExperimentConfig& config);

/// Up to replay_per_class training samples per known class, drawn without
/// replacement; labels are the dataset class ids.
LabeledSubset sample_replay(const LabeledDataset& dataset,
                            const std::vector<int>& known_classes,
                            int replay_per_class, std::uint64_t seed);

/// One increment: prime, test, detect, cluster, grow the head, retrain on the
/// caught samples plus replay data, and measure accuracy over all now-known
/// classes.
std::pair<IterationState, IterationReport> run_iteration(const IterationState& state,
                                                         const LabeledDataset& dataset,
                                                         const ExperimentConfig& config);

RunLog run_experiment(const LabeledDataset& dataset, const ExperimentConfig& config);

/// Control run: the same schedule, but every iteration retrains a fresh model
/// on all training data of all known classes with true labels.
RunLog full_retrain_baseline(const LabeledDataset& dataset, const ExperimentConfig& config);

/// Test-split accuracy over the given classes with predictions mapped through
/// node_to_class.
double evaluate_accuracy(const Classifier& model, const std::vector<int>& node_to_class,
                         const LabeledDataset& dataset, const std::vector<int>& classes);

}  // namespace cct
