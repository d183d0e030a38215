#include "cct/run_config.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

namespace cct {

namespace {

using nlohmann::json;

class Violations {
 public:
  void add(const std::string& message) { messages_.push_back(message); }
  bool empty() const { return messages_.empty(); }
  [[noreturn]] void raise() const {
    std::ostringstream out;
    out << "invalid configuration:";
    for (const std::string& message : messages_) {
      out << "\n  - " << message;
    }
    throw ConfigError(out.str());
  }

 private:
  std::vector<std::string> messages_;
};

template <typename T>
T get_or(const json& node, const char* key, T fallback) {
  if (node.contains(key)) {
    return node.at(key).get<T>();
  }
  return fallback;
}

void parse_train_block(const json& node, const char* name, TrainConfig& out,
                       Violations& violations) {
  out.learning_rate = get_or(node, "learning_rate", out.learning_rate);
  out.epochs = get_or(node, "epochs", out.epochs);
  out.batch_size = get_or(node, "batch_size", out.batch_size);
  if (out.learning_rate <= 0.0) {
    violations.add(std::string(name) + ".learning_rate must be positive");
  }
  if (out.epochs < 1) {
    violations.add(std::string(name) + ".epochs must be >= 1");
  }
  if (out.batch_size < 1) {
    violations.add(std::string(name) + ".batch_size must be >= 1");
  }
}

void check_path_exists(const std::string& path, const char* key, Violations& violations) {
  if (path.empty()) {
    violations.add(std::string("dataset.") + key + " is required for this dataset kind");
  } else if (!std::filesystem::exists(path)) {
    violations.add(std::string("dataset.") + key + " does not exist: " + path);
  }
}

}  // namespace

RunConfig parse_run_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) {
    throw ConfigError("cannot open config file: " + path);
  }
  json root;
  try {
    root = json::parse(is);
  } catch (const json::parse_error& error) {
    throw ConfigError(std::string("config is not valid JSON: ") + error.what());
  }

  Violations violations;
  RunConfig config;
  try {
    if (!root.contains("dataset")) {
      violations.add("dataset block is required");
    } else {
      const json& ds = root.at("dataset");
      const std::string kind = get_or<std::string>(ds, "kind", "");
      if (kind == "blobs") {
        config.dataset.kind = DatasetKind::blobs;
      } else if (kind == "idx") {
        config.dataset.kind = DatasetKind::idx;
      } else if (kind == "embedding_csv") {
        config.dataset.kind = DatasetKind::embedding_csv;
      } else {
        violations.add("dataset.kind must be one of blobs | idx | embedding_csv");
      }
      config.dataset.test_fraction = get_or(ds, "test_fraction", 0.2);
      if (config.dataset.test_fraction <= 0.0 || config.dataset.test_fraction >= 1.0) {
        violations.add("dataset.test_fraction must lie in (0, 1)");
      }

      const int kind_blocks = static_cast<int>(ds.contains("blobs")) +
                              static_cast<int>(ds.contains("images") || ds.contains("labels")) +
                              static_cast<int>(ds.contains("path"));
      if (kind_blocks > 1) {
        violations.add("dataset must describe exactly one source kind");
      }

      if (config.dataset.kind == DatasetKind::blobs) {
        if (!ds.contains("blobs")) {
          violations.add("dataset.blobs block is required for kind = blobs");
        } else {
          const json& blobs = ds.at("blobs");
          BlobSpec& spec = config.dataset.blobs;
          spec.n_classes = get_or(blobs, "n_classes", spec.n_classes);
          spec.per_class = get_or(blobs, "per_class", spec.per_class);
          spec.dim = get_or(blobs, "dim", spec.dim);
          spec.center_separation = get_or(blobs, "center_separation", spec.center_separation);
          spec.cluster_std = get_or(blobs, "cluster_std", spec.cluster_std);
          if (blobs.contains("seed")) {
            spec.seed = blobs.at("seed").get<std::uint64_t>();
            config.dataset.blobs_seed_fixed = true;
          }
          if (spec.n_classes < 1) violations.add("dataset.blobs.n_classes must be >= 1");
          if (spec.per_class < 2) violations.add("dataset.blobs.per_class must be >= 2");
          if (spec.dim < 1) violations.add("dataset.blobs.dim must be >= 1");
          if (spec.center_separation <= 0.0) {
            violations.add("dataset.blobs.center_separation must be positive");
          }
          if (spec.cluster_std <= 0.0) {
            violations.add("dataset.blobs.cluster_std must be positive");
          }
        }
      } else if (config.dataset.kind == DatasetKind::idx) {
        config.dataset.images_path = get_or<std::string>(ds, "images", "");
        config.dataset.labels_path = get_or<std::string>(ds, "labels", "");
        check_path_exists(config.dataset.images_path, "images", violations);
        check_path_exists(config.dataset.labels_path, "labels", violations);
      } else if (config.dataset.kind == DatasetKind::embedding_csv) {
        config.dataset.csv_path = get_or<std::string>(ds, "path", "");
        check_path_exists(config.dataset.csv_path, "path", violations);
      }
    }

    if (!root.contains("experiment")) {
      violations.add("experiment block is required");
    } else {
      const json& ex = root.at("experiment");
      ExperimentConfig& cfg = config.experiment;
      cfg.n_init = get_or(ex, "n_init", cfg.n_init);
      cfg.n_incr = get_or(ex, "n_incr", cfg.n_incr);
      cfg.n_total = get_or(ex, "n_total", cfg.n_total);
      cfg.replay_per_class = get_or(ex, "replay_per_class", cfg.replay_per_class);
      cfg.seed = get_or<std::uint64_t>(ex, "seed", cfg.seed);
      cfg.remeasure_a_init = get_or(ex, "remeasure_a_init", cfg.remeasure_a_init);
      if (ex.contains("class_order_seed")) {
        cfg.class_order_seed = ex.at("class_order_seed").get<std::uint64_t>();
      }
      if (ex.contains("hidden_dims")) {
        cfg.hidden_dims.clear();
        for (const auto& width : ex.at("hidden_dims")) {
          cfg.hidden_dims.push_back(width.get<Index>());
        }
      }
      if (ex.contains("ct")) {
        const json& ct = ex.at("ct");
        cfg.ct_a = get_or(ct, "a", cfg.ct_a);
        cfg.ct_bias = get_or(ct, "bias", cfg.ct_bias);
        if (ct.contains("a_init")) {
          cfg.ct_a_init_override = ct.at("a_init").get<double>();
        }
      }
      if (ex.contains("head_growth")) {
        cfg.head_growth.divisor =
            get_or(ex.at("head_growth"), "divisor", cfg.head_growth.divisor);
      }
      if (ex.contains("initial_train")) {
        parse_train_block(ex.at("initial_train"), "experiment.initial_train",
                          cfg.initial_train, violations);
      }
      if (ex.contains("retrain")) {
        parse_train_block(ex.at("retrain"), "experiment.retrain", cfg.retrain, violations);
      }

      if (cfg.n_init < 1) violations.add("experiment.n_init must be >= 1");
      if (cfg.n_incr < 1) violations.add("experiment.n_incr must be >= 1");
      if (cfg.n_init > cfg.n_total) {
        violations.add("experiment requires n_init <= n_total");
      }
      if (cfg.ct_a <= 0.0) violations.add("experiment.ct.a must be positive");
      if (cfg.ct_bias < 0.0) violations.add("experiment.ct.bias must be >= 0");
      if (cfg.ct_a_init_override.has_value() &&
          (*cfg.ct_a_init_override <= 0.0 || *cfg.ct_a_init_override > 1.0)) {
        violations.add("experiment.ct.a_init must lie in (0, 1]");
      }
      if (cfg.replay_per_class < 0) {
        violations.add("experiment.replay_per_class must be >= 0");
      }
      if (cfg.head_growth.divisor < 1.0) {
        violations.add("experiment.head_growth.divisor must be >= 1");
      }
      for (Index width : cfg.hidden_dims) {
        if (width < 1) {
          violations.add("experiment.hidden_dims entries must be >= 1");
          break;
        }
      }
      if (config.dataset.kind == DatasetKind::blobs &&
          config.experiment.n_total > config.dataset.blobs.n_classes) {
        violations.add("experiment.n_total exceeds dataset.blobs.n_classes");
      }
    }

    if (root.contains("output")) {
      const json& out = root.at("output");
      config.output.dir = get_or<std::string>(out, "dir", config.output.dir);
      config.output.plot = get_or(out, "plot", config.output.plot);
    }
  } catch (const json::exception& error) {
    violations.add(std::string("malformed value: ") + error.what());
  }

  if (!violations.empty()) {
    violations.raise();
  }
  return config;
}

nlohmann::json normalized_config(const RunConfig& config) {
  json ds;
  switch (config.dataset.kind) {
    case DatasetKind::blobs: {
      ds["kind"] = "blobs";
      const BlobSpec& spec = config.dataset.blobs;
      ds["blobs"] = {{"n_classes", spec.n_classes},
                     {"per_class", spec.per_class},
                     {"dim", spec.dim},
                     {"center_separation", spec.center_separation},
                     {"cluster_std", spec.cluster_std},
                     {"seed", spec.seed}};
      break;
    }
    case DatasetKind::idx:
      ds["kind"] = "idx";
      ds["images"] = config.dataset.images_path;
      ds["labels"] = config.dataset.labels_path;
      break;
    case DatasetKind::embedding_csv:
      ds["kind"] = "embedding_csv";
      ds["path"] = config.dataset.csv_path;
      break;
  }
  ds["test_fraction"] = config.dataset.test_fraction;

  const ExperimentConfig& ex = config.experiment;
  json ct = {{"a", ex.ct_a}, {"bias", ex.ct_bias}};
  if (ex.ct_a_init_override.has_value()) {
    ct["a_init"] = *ex.ct_a_init_override;
  }
  json experiment = {
      {"n_init", ex.n_init},
      {"n_incr", ex.n_incr},
      {"n_total", ex.n_total},
      {"ct", ct},
      {"replay_per_class", ex.replay_per_class},
      {"initial_train",
       {{"learning_rate", ex.initial_train.learning_rate},
        {"epochs", ex.initial_train.epochs},
        {"batch_size", ex.initial_train.batch_size}}},
      {"retrain",
       {{"learning_rate", ex.retrain.learning_rate},
        {"epochs", ex.retrain.epochs},
        {"batch_size", ex.retrain.batch_size}}},
      {"head_growth", {{"divisor", ex.head_growth.divisor}}},
      {"hidden_dims", ex.hidden_dims},
      {"remeasure_a_init", ex.remeasure_a_init},
      {"seed", ex.seed},
  };
  if (ex.class_order_seed.has_value()) {
    experiment["class_order_seed"] = *ex.class_order_seed;
  }

  return json{{"dataset", ds},
              {"experiment", experiment},
              {"output", {{"dir", config.output.dir}, {"plot", config.output.plot}}}};
}

LabeledDataset build_dataset(const RunConfig& config) {
  const std::uint64_t split_seed = mix_seed(config.experiment.seed, 0x5eedULL);
  switch (config.dataset.kind) {
    case DatasetKind::blobs: {
      BlobSpec spec = config.dataset.blobs;
      if (!config.dataset.blobs_seed_fixed) {
        spec.seed = mix_seed(config.experiment.seed, 0xb10bULL);
      }
      return split_train_test(synth_blobs(spec), config.dataset.test_fraction, split_seed);
    }
    case DatasetKind::idx:
      return split_train_test(
          load_idx(config.dataset.images_path, config.dataset.labels_path),
          config.dataset.test_fraction, split_seed);
    case DatasetKind::embedding_csv:
      return split_train_test(load_embedding_csv(config.dataset.csv_path),
                              config.dataset.test_fraction, split_seed);
  }
  throw std::logic_error("unreachable dataset kind");
}

}  // namespace cct
