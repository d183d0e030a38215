#include "cct/experiment.hpp"

#include "cct/clustering.hpp"
#include "cct/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>

namespace cct {

namespace {

// Sub-stream roles for deriving per-iteration seeds from the experiment seed.
enum SeedRole : std::uint64_t {
  kSeedInitWeights = 0,
  kSeedInitTrain = 1,
  kSeedPool = 2,
  kSeedReplay = 3,
  kSeedCluster = 4,
  kSeedRetrain = 5,
  kSeedSchedule = 6,
  kSeedBaseline = 7,
};

std::uint64_t iter_seed(const ExperimentConfig& config, SeedRole role, int iteration) {
  return mix_seed(config.seed, (static_cast<std::uint64_t>(iteration) << 4) | role);
}

std::vector<int> class_schedule(const LabeledDataset& dataset,
                                const ExperimentConfig& config) {
  std::vector<int> schedule = dataset.class_ids;
  if (config.class_order_seed.has_value()) {
    std::mt19937_64 rng(*config.class_order_seed);
    std::shuffle(schedule.begin(), schedule.end(), rng);
  }
  return schedule;
}

void validate(const LabeledDataset& dataset, const ExperimentConfig& config) {
  if (config.n_init < 1 || config.n_incr < 1 || config.n_total < config.n_init) {
    throw std::invalid_argument("experiment: need 1 <= n_init <= n_total and n_incr >= 1");
  }
  if (static_cast<int>(dataset.class_ids.size()) < config.n_total) {
    throw std::invalid_argument("experiment: dataset has fewer classes than n_total");
  }
  if (config.ct_a_init_override.has_value() &&
      (*config.ct_a_init_override <= 0.0 || *config.ct_a_init_override > 1.0)) {
    throw std::invalid_argument("experiment: ct a_init override must be in (0, 1]");
  }
  const std::vector<int> schedule = class_schedule(dataset, config);
  for (int i = 0; i < config.n_total; ++i) {
    const ClassSplit& split = dataset.split_for(schedule[static_cast<std::size_t>(i)]);
    if (split.train.empty() || split.test.empty()) {
      throw std::invalid_argument("experiment: class " + std::to_string(split.class_id) +
                                  " is missing a train or test split");
    }
  }
}

LabeledSubset gather_test_subset(const LabeledDataset& dataset,
                                 const std::vector<int>& classes) {
  std::vector<Index> rows;
  std::vector<int> labels;
  for (int class_id : classes) {
    for (Index idx : dataset.split_for(class_id).test) {
      rows.push_back(idx);
      labels.push_back(class_id);
    }
  }
  return {gather_rows(dataset.features, rows), std::move(labels)};
}

// node -> class associations established so far, inverted; the first node
// trained for a class wins when clustering mapped two nodes to it.
std::unordered_map<int, int> class_to_node(const std::vector<int>& node_to_class) {
  std::unordered_map<int, int> inverse;
  for (std::size_t node = 0; node < node_to_class.size(); ++node) {
    inverse.emplace(node_to_class[node], static_cast<int>(node));
  }
  return inverse;
}

}  // namespace

int planned_iterations(const ExperimentConfig& config) {
  return static_cast<int>(
      std::ceil(static_cast<double>(config.n_total - config.n_init) /
                static_cast<double>(config.n_incr)));
}

double evaluate_accuracy(const Classifier& model, const std::vector<int>& node_to_class,
                         const LabeledDataset& dataset, const std::vector<int>& classes) {
  const LabeledSubset subset = gather_test_subset(dataset, classes);
  const std::vector<int> nodes = predict(model, subset.features);
  std::vector<int> mapped(nodes.size(), -1);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto node = static_cast<std::size_t>(nodes[i]);
    if (node < node_to_class.size()) {
      mapped[i] = node_to_class[node];
    }
  }
  return accuracy(mapped, subset.labels);
}

IterationState initial_train(const LabeledDataset& dataset, const ExperimentConfig& config) {
  validate(dataset, config);
  const std::vector<int> schedule = class_schedule(dataset, config);

  IterationState state;
  state.known_classes.assign(schedule.begin(), schedule.begin() + config.n_init);
  state.unknown_classes.assign(schedule.begin() + config.n_init,
                               schedule.begin() + config.n_total);
  state.node_to_class = state.known_classes;
  state.iteration = 1;

  std::vector<Index> rows;
  std::vector<int> labels;
  for (int node = 0; node < config.n_init; ++node) {
    for (Index idx : dataset.split_for(state.known_classes[static_cast<std::size_t>(node)]).train) {
      rows.push_back(idx);
      labels.push_back(node);
    }
  }

  Classifier model = make_classifier(dataset.dim(), config.hidden_dims, config.n_init,
                                     iter_seed(config, kSeedInitWeights, 0));
  TrainConfig train_config = config.initial_train;
  train_config.seed = iter_seed(config, kSeedInitTrain, 0);
  state.model = train(model, gather_rows(dataset.features, rows), labels, train_config).model;

  state.a_init = config.ct_a_init_override.value_or(
      evaluate_accuracy(state.model, state.node_to_class, dataset, state.known_classes));
  return state;
}

TestPool build_test_pool(const IterationState& state, const LabeledDataset& dataset,
                         const ExperimentConfig& config) {
  if (state.unknown_classes.empty()) {
    throw std::invalid_argument("test pool: no unknown classes remain");
  }
  const int n_new = std::min<int>(config.n_incr,
                                  static_cast<int>(state.unknown_classes.size()));

  std::vector<Index> rows;
  std::vector<int> truth;
  std::vector<char> from_known;
  for (int class_id : state.known_classes) {
    for (Index idx : dataset.split_for(class_id).test) {
      rows.push_back(idx);
      truth.push_back(class_id);
      from_known.push_back(1);
    }
  }
  for (int i = 0; i < n_new; ++i) {
    const int class_id = state.unknown_classes[static_cast<std::size_t>(i)];
    for (Index idx : dataset.split_for(class_id).train) {
      rows.push_back(idx);
      truth.push_back(class_id);
      from_known.push_back(0);
    }
  }

  std::vector<std::size_t> order(rows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(iter_seed(config, kSeedPool, state.iteration));
  std::shuffle(order.begin(), order.end(), rng);

  TestPool pool;
  pool.features.resize(static_cast<Index>(rows.size()), dataset.dim());
  pool.truth_labels.resize(rows.size());
  pool.from_known.resize(rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    pool.features.row(static_cast<Index>(i)) = dataset.features.row(rows[order[i]]);
    pool.truth_labels[i] = truth[order[i]];
    pool.from_known[i] = from_known[order[i]];
  }
  return pool;
}

LabeledSubset sample_replay(const LabeledDataset& dataset,
                            const std::vector<int>& known_classes,
                            int replay_per_class, std::uint64_t seed) {
  if (replay_per_class < 0) {
    throw std::invalid_argument("replay: replay_per_class must be >= 0");
  }
  std::mt19937_64 rng(seed);
  std::vector<Index> rows;
  std::vector<int> labels;
  for (int class_id : known_classes) {
    std::vector<Index> pool = dataset.split_for(class_id).train;
    std::shuffle(pool.begin(), pool.end(), rng);
    const std::size_t take =
        std::min<std::size_t>(pool.size(), static_cast<std::size_t>(replay_per_class));
    for (std::size_t i = 0; i < take; ++i) {
      rows.push_back(pool[i]);
      labels.push_back(class_id);
    }
  }
  return {gather_rows(dataset.features, rows), std::move(labels)};
}

std::pair<IterationState, IterationReport> run_iteration(const IterationState& state,
                                                         const LabeledDataset& dataset,
                                                         const ExperimentConfig& config) {
  if (state.unknown_classes.empty()) {
    throw std::invalid_argument("run_iteration: no unknown classes remain");
  }
  const int k_before = state.model.class_count;
  const int n_new = std::min<int>(config.n_incr,
                                  static_cast<int>(state.unknown_classes.size()));

  IterationReport report;
  report.iteration = state.iteration;

  const Classifier primed = add_priming_node(state.model, config.head_growth);
  report.ct_value = compute_ct({config.n_incr, state.iteration, config.ct_a,
                                state.a_init, config.ct_bias});

  const TestPool pool = build_test_pool(state, dataset, config);
  report.tested_count = static_cast<int>(pool.features.rows());
  for (char flag : pool.from_known) {
    report.known_pool_count += flag ? 1 : 0;
  }

  const DetectionResult detection = detect_unknowns(primed, pool.features, report.ct_value);
  report.flagged_unknown_count = static_cast<int>(detection.unknown_samples.size());
  for (Index idx : detection.unknown_samples) {
    if (pool.from_known[static_cast<std::size_t>(idx)]) {
      ++report.false_unknown_count;
    }
  }

  if (report.flagged_unknown_count < n_new) {
    std::ostringstream message;
    message << "iteration " << state.iteration << ": caught "
            << report.flagged_unknown_count << " unknown samples but needs at least "
            << n_new << " to form clusters";
    throw IterationAbort(message.str(), report);
  }

  const Matrix caught = gather_rows(pool.features, detection.unknown_samples);
  const Matrix caught_embeddings = forward(primed, caught).penultimate;
  const ClusterAssignment clusters = spectral_cluster(
      caught_embeddings, n_new, iter_seed(config, kSeedCluster, state.iteration));

  report.caught_per_cluster.assign(static_cast<std::size_t>(n_new), 0);
  for (int cluster : clusters.labels) {
    ++report.caught_per_cluster[static_cast<std::size_t>(cluster)];
  }
  for (int c = 0; c < n_new; ++c) {
    if (report.caught_per_cluster[static_cast<std::size_t>(c)] < 3) {
      report.thin_clusters.push_back(c);
    }
  }

  // Caught samples are labeled purely by cluster index; truth labels never
  // reach the retraining path for them.
  const Classifier grown = instantiate_class_nodes(primed, n_new, config.head_growth);
  std::vector<Matrix> train_blocks;
  std::vector<int> train_labels;
  train_blocks.push_back(caught);
  for (std::size_t i = 0; i < clusters.labels.size(); ++i) {
    train_labels.push_back(k_before + clusters.labels[i]);
  }

  const LabeledSubset replay =
      sample_replay(dataset, state.known_classes, config.replay_per_class,
                    iter_seed(config, kSeedReplay, state.iteration));
  const std::unordered_map<int, int> node_of = class_to_node(state.node_to_class);
  std::vector<Index> replay_rows;
  for (std::size_t i = 0; i < replay.labels.size(); ++i) {
    const auto it = node_of.find(replay.labels[i]);
    if (it == node_of.end()) {
      continue;  // class never got a node (clustering mis-mapped it earlier)
    }
    replay_rows.push_back(static_cast<Index>(i));
    train_labels.push_back(it->second);
  }
  train_blocks.push_back(gather_rows(replay.features, replay_rows));
  report.replay_sample_count = static_cast<int>(replay_rows.size());

  Matrix train_x(caught.rows() + static_cast<Index>(replay_rows.size()), dataset.dim());
  train_x.topRows(caught.rows()) = train_blocks[0];
  train_x.bottomRows(static_cast<Index>(replay_rows.size())) = train_blocks[1];
  report.retrain_sample_count = static_cast<int>(train_x.rows());

  TrainConfig retrain_config = config.retrain;
  retrain_config.seed = iter_seed(config, kSeedRetrain, state.iteration);
  IterationState next = state;
  next.model = train(grown, train_x, train_labels, retrain_config).model;

  // Majority vote of the caught samples' truth per cluster, ties to the lower
  // class id; used for evaluation and for labeling future replay data.
  report.cluster_to_truth_map.assign(static_cast<std::size_t>(n_new), -1);
  std::vector<std::map<int, int>> votes(static_cast<std::size_t>(n_new));
  for (std::size_t i = 0; i < clusters.labels.size(); ++i) {
    const Index pool_idx = detection.unknown_samples[i];
    ++votes[static_cast<std::size_t>(clusters.labels[i])]
           [pool.truth_labels[static_cast<std::size_t>(pool_idx)]];
  }
  for (int c = 0; c < n_new; ++c) {
    int best_class = -1;
    int best_count = -1;
    for (const auto& [class_id, count] : votes[static_cast<std::size_t>(c)]) {
      if (count > best_count) {  // map order makes ties favor the lower id
        best_count = count;
        best_class = class_id;
      }
    }
    report.cluster_to_truth_map[static_cast<std::size_t>(c)] = best_class;
    next.node_to_class.push_back(best_class);
  }

  next.known_classes.insert(next.known_classes.end(), state.unknown_classes.begin(),
                            state.unknown_classes.begin() + n_new);
  next.unknown_classes.erase(next.unknown_classes.begin(),
                             next.unknown_classes.begin() + n_new);
  next.iteration = state.iteration + 1;

  report.post_accuracy =
      evaluate_accuracy(next.model, next.node_to_class, dataset, next.known_classes);
  if (config.remeasure_a_init) {
    next.a_init = report.post_accuracy;
  }
  return {std::move(next), report};
}

RunLog run_experiment(const LabeledDataset& dataset, const ExperimentConfig& config) {
  IterationState state = initial_train(dataset, config);
  RunLog log;
  log.config = config;

  const int iterations = planned_iterations(config);
  for (int l = 0; l < iterations; ++l) {
    auto [next, report] = run_iteration(state, dataset, config);
    state = std::move(next);
    log.iterations.push_back(std::move(report));
  }

  if (!log.iterations.empty()) {
    std::vector<double> series;
    series.reserve(log.iterations.size());
    for (const IterationReport& report : log.iterations) {
      series.push_back(report.post_accuracy);
    }
    log.ila = ila(series);
  }
  log.final_state = std::move(state);
  return log;
}

RunLog full_retrain_baseline(const LabeledDataset& dataset, const ExperimentConfig& config) {
  validate(dataset, config);
  const int iterations = planned_iterations(config);
  if (iterations == 0) {
    throw std::invalid_argument("full retrain baseline: no iterations (n_init == n_total)");
  }

  const std::vector<int> schedule = class_schedule(dataset, config);
  RunLog log;
  log.config = config;

  for (int l = 1; l <= iterations; ++l) {
    const int known_count =
        std::min(config.n_total, config.n_init + l * config.n_incr);
    const std::vector<int> known(schedule.begin(), schedule.begin() + known_count);

    std::vector<Index> rows;
    std::vector<int> labels;
    for (int node = 0; node < known_count; ++node) {
      for (Index idx : dataset.split_for(known[static_cast<std::size_t>(node)]).train) {
        rows.push_back(idx);
        labels.push_back(node);
      }
    }

    Classifier model =
        make_classifier(dataset.dim(), config.hidden_dims, known_count,
                        mix_seed(config.seed, (static_cast<std::uint64_t>(l) << 4) | kSeedBaseline));
    TrainConfig train_config = config.initial_train;
    train_config.seed = mix_seed(config.seed,
                                 (static_cast<std::uint64_t>(l) << 4) | kSeedInitTrain);
    model = train(model, gather_rows(dataset.features, rows), labels, train_config).model;

    IterationReport report;
    report.iteration = l;
    report.retrain_sample_count = static_cast<int>(rows.size());
    report.post_accuracy = evaluate_accuracy(model, known, dataset, known);
    report.tested_count = 0;
    log.iterations.push_back(std::move(report));

    if (l == iterations) {
      log.final_state.model = std::move(model);
      log.final_state.known_classes = known;
      log.final_state.node_to_class = known;
      log.final_state.iteration = l + 1;
    }
  }

  std::vector<double> series;
  for (const IterationReport& report : log.iterations) {
    series.push_back(report.post_accuracy);
  }
  log.ila = ila(series);
  return log;
}

}  // namespace cct
