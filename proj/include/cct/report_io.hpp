#pragma once

#include "cct/experiment.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace cct {

/// "%.*g" formatting; all floats in emitted artifacts go through this so the
/// files are byte-stable for a pinned config and seed.
std::string format_sig(double value, int digits = 6);

void write_iterations_csv(const std::string& path, const std::vector<IterationReport>& reports);

/// Config snapshot, per-iteration array, and the run's mean accuracy. The ila
/// field is recomputed from the 6-digit values that land in the files so the
/// two artifacts agree exactly.
void write_summary_json(const std::string& path, const RunLog& log,
                        const nlohmann::json& config_snapshot);

void write_accuracy_svg(const std::string& path, const std::vector<IterationReport>& reports);

void write_compare_csv(const std::string& path, const RunLog& cct_log, const RunLog& baseline_log);

void write_compare_svg(const std::string& path, const RunLog& cct_log, const RunLog& baseline_log);

}  // namespace cct
