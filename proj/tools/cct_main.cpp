#include "cct/cli_commands.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <string>

namespace {

void add_common_options(CLI::App* cmd, cct::CliOptions& options) {
  cmd->add_option("--config", options.config_path, "Path to the run configuration JSON")
      ->required();
  cmd->add_option("--seed", options.seed, "Override the experiment seed");
  cmd->add_option("--out", options.out_dir, "Override the output directory");
  cmd->add_option("--ct-a", options.ct_a, "Override the confidence-threshold constant a");
  cmd->add_flag("--no-plot", options.no_plot, "Skip SVG plot output");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Incremental class learning with confidence-threshold unknown detection"};
  app.require_subcommand(1);

  cct::CliOptions run_options;
  CLI::App* run = app.add_subcommand("run", "Run one incremental-learning experiment");
  add_common_options(run, run_options);

  cct::CliOptions compare_options;
  CLI::App* compare = app.add_subcommand(
      "compare", "Run the experiment and the full-retrain control on the same data");
  add_common_options(compare, compare_options);

  cct::CliOptions validate_options;
  CLI::App* validate = app.add_subcommand("validate", "Validate and echo a configuration");
  add_common_options(validate, validate_options);

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    return cct::cmd_run(run_options);
  }
  if (compare->parsed()) {
    return cct::cmd_compare(compare_options);
  }
  return cct::cmd_validate(validate_options);
}
