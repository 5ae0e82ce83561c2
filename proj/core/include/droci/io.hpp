#pragma once

#include <string>

#include "droci/experiments.hpp"
#include "droci/sample.hpp"

#include "json.hpp"

namespace droci {

// CSV with a header row, one observation per row, locale-independent numeric
// parsing. Errors carry 1-based row/column positions.
Sample parse_csv(const std::string& path);
Sample parse_csv_text(const std::string& text);

nlohmann::json scenario_to_json(const ScenarioConfig& config);
ScenarioConfig scenario_from_json(const nlohmann::json& j);

nlohmann::json report_to_json(const CoverageReport& report);
CoverageReport report_from_json(const nlohmann::json& j);

// Tabular view of a report: method, level, coverage, half_width, mean_width,
// failures.
std::string report_to_csv(const CoverageReport& report);

}  // namespace droci
