#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace cct {

struct CliOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<double> ct_a;
  bool no_plot = false;
};

// Exit codes: 0 success, 1 runtime failure, 2 configuration error.
int cmd_run(const CliOptions& options);
int cmd_compare(const CliOptions& options);
int cmd_validate(const CliOptions& options);

}  // namespace cct
