#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "cotdr/experiment.hpp"
#include "cotdr/timing.hpp"

namespace cotdr {

/// Shortest round-trip decimal form of a double; all CSV numbers go through
/// this so that identical runs produce identical bytes.
std::string format_double(double v);

void write_text_file(const std::filesystem::path& path, const std::string& content);

nlohmann::json skew_report_json(const SkewResult& result, const FiberSpec& fiber);
std::string skew_csv(const SkewResult& result);

nlohmann::json sweep_report_json(const MeasurementReport& report);
std::string sweep_delays_csv(const MeasurementReport& report);
std::string sweep_skew_csv(const MeasurementReport& report);
std::string sweep_tdc_csv(const MeasurementReport& report);

nlohmann::json pmd_summary_json(const std::vector<CorePmdResult>& results);
std::string pmd_curve_csv(const PmdReport& report);

std::string correlation_csv(const AnalogTrace& corr, std::size_t stride);

}  // namespace cotdr
