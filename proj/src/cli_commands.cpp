#include "cct/cli_commands.hpp"

#include "cct/report_io.hpp"
#include "cct/run_config.hpp"

#include <chrono>
#include <filesystem>
#include <iostream>

namespace cct {

namespace {

RunConfig load_with_overrides(const CliOptions& options) {
  RunConfig config = parse_run_config(options.config_path);
  if (options.seed.has_value()) {
    config.experiment.seed = *options.seed;
  }
  if (options.out_dir.has_value()) {
    config.output.dir = *options.out_dir;
  }
  if (options.ct_a.has_value()) {
    if (*options.ct_a <= 0.0) {
      throw ConfigError("--ct-a must be positive");
    }
    config.experiment.ct_a = *options.ct_a;
  }
  if (options.no_plot) {
    config.output.plot = false;
  }
  return config;
}

int dispatch(int (*body)(const CliOptions&), const CliOptions& options) {
  try {
    return body(options);
  } catch (const ConfigError& error) {
    std::cerr << "config error: " << error.what() << "\n";
    return 2;
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << "\n";
    return 1;
  }
}

int run_body(const CliOptions& options) {
  const auto started = std::chrono::steady_clock::now();
  const RunConfig config = load_with_overrides(options);
  const LabeledDataset dataset = build_dataset(config);
  const RunLog log = run_experiment(dataset, config.experiment);

  std::filesystem::create_directories(config.output.dir);
  const std::filesystem::path out(config.output.dir);
  write_iterations_csv((out / "iterations.csv").string(), log.iterations);
  write_summary_json((out / "summary.json").string(), log, normalized_config(config));
  if (config.output.plot) {
    write_accuracy_svg((out / "accuracy.svg").string(), log.iterations);
  }

  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - started;
  std::cerr << "run: " << log.iterations.size() << " iterations";
  if (log.ila.has_value()) {
    std::cerr << ", ila " << format_sig(*log.ila);
  }
  std::cerr << ", wall clock " << format_sig(elapsed.count(), 3) << " s\n";
  return 0;
}

int compare_body(const CliOptions& options) {
  const auto started = std::chrono::steady_clock::now();
  const RunConfig config = load_with_overrides(options);
  if (config.experiment.n_init >= config.experiment.n_total) {
    throw ConfigError("no iterations to compare (n_init >= n_total)");
  }
  const LabeledDataset dataset = build_dataset(config);
  const RunLog cct_log = run_experiment(dataset, config.experiment);
  const RunLog baseline_log = full_retrain_baseline(dataset, config.experiment);

  std::filesystem::create_directories(config.output.dir);
  const std::filesystem::path out(config.output.dir);
  write_compare_csv((out / "compare.csv").string(), cct_log, baseline_log);
  if (config.output.plot) {
    write_compare_svg((out / "compare.svg").string(), cct_log, baseline_log);
  }

  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - started;
  std::cerr << "compare: wall clock " << format_sig(elapsed.count(), 3) << " s\n";
  return 0;
}

int validate_body(const CliOptions& options) {
  const RunConfig config = parse_run_config(options.config_path);
  std::cout << normalized_config(config).dump(2) << "\n";
  return 0;
}

}  // namespace

int cmd_run(const CliOptions& options) { return dispatch(run_body, options); }

int cmd_compare(const CliOptions& options) { return dispatch(compare_body, options); }

int cmd_validate(const CliOptions& options) { return dispatch(validate_body, options); }

}  // namespace cct
