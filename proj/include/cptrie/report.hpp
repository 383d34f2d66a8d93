#pragma once

// Table rendering for evaluation and calibration results: one row per
// method with its parameter, average risk, RSE and AR.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace cptrie {

struct ReportRow {
  std::string method;
  double param = 0.0;
  double average_risk = 0.0;
  double rse = 0.0;
  double average_recall = 0.0;
};

// Accepts either an evaluation report or a calibration result.
ReportRow row_from_json(std::string_view text);
ReportRow load_row(const std::filesystem::path& path);

enum class TableFormat { markdown, csv };

// Rows are sorted by method name. In markdown with two or more rows the best
// RSE (lowest) and AR (highest) are bold and the worst are underlined.
std::string render_table(std::vector<ReportRow> rows, TableFormat format);

// Shortest decimal text that reads back to the same double.
std::string format_number(double value);

}  // namespace cptrie
