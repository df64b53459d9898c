#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "rlab/experiment/runner.hpp"

namespace rlab::experiment {

enum class ReportFormat { Csv, Json, Svg };

ReportFormat parse_report_format(const std::string& name);

// "arm,batch,bleu,seconds" with one row per arm and batch, batch 0 included.
std::string report_csv(const RunReport& report);
std::string report_json(const RunReport& report);
// BLEU against batch index, one polyline per arm.
std::string report_svg(const RunReport& report);

// Writes report.csv / report.json / report.svg under dir, creating it if
// needed. Returns the written paths. Throws IoError.
std::vector<std::filesystem::path> emit_report(const RunReport& report, const std::filesystem::path& dir,
                                               const std::set<ReportFormat>& formats);

RunReport load_report(const std::filesystem::path& path);

}  // namespace rlab::experiment
