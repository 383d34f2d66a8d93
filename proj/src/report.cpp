#include "cptrie/report.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cptrie/error.hpp"
#include "cptrie/metrics.hpp"

namespace cptrie {
namespace {

std::string fixed3(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", value);
  return buf;
}

enum class Mark { none, best, worst };

std::string decorate(const std::string& text, Mark mark) {
  switch (mark) {
    case Mark::best: return "**" + text + "**";
    case Mark::worst: return "<u>" + text + "</u>";
    case Mark::none: break;
  }
  return text;
}

// Marks per row for one column; `lower_is_better` flips the ordering.
std::vector<Mark> column_marks(const std::vector<double>& values, bool lower_is_better) {
  std::vector<Mark> marks(values.size(), Mark::none);
  if (values.size() < 2) return marks;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*lo == *hi) return marks;
  const double best = lower_is_better ? *lo : *hi;
  const double worst = lower_is_better ? *hi : *lo;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] == best) marks[i] = Mark::best;
    else if (values[i] == worst) marks[i] = Mark::worst;
  }
  return marks;
}

}  // namespace

std::string format_number(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) return std::to_string(value);
  return std::string(buf, ptr);
}

ReportRow row_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    return ReportRow{j.at("method").get<std::string>(), j.at("theta").get<double>(),
                     j.at("average_risk").get<double>(), j.at("rse").get<double>(),
                     j.at("average_recall").get<double>()};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::schema, std::string("report input: ") + e.what());
  }
}

ReportRow load_row(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return row_from_json(buf.str());
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.message());
  }
}

std::string render_table(std::vector<ReportRow> rows, TableFormat format) {
  std::stable_sort(rows.begin(), rows.end(), [](const ReportRow& a, const ReportRow& b) { return a.method < b.method; });
  std::ostringstream out;
  if (format == TableFormat::csv) {
    out << "method,param,avg_risk,rse,ar\n";
    for (const auto& r : rows) {
      out << csv_field(r.method) << ',' << format_number(r.param) << ',' << format_number(r.average_risk) << ','
          << format_number(r.rse) << ',' << format_number(r.average_recall) << '\n';
    }
    return out.str();
  }

  std::vector<double> rse, ar;
  for (const auto& r : rows) {
    rse.push_back(r.rse);
    ar.push_back(r.average_recall);
  }
  const auto rse_marks = column_marks(rse, true);
  const auto ar_marks = column_marks(ar, false);
  out << "| method | param | avg_risk | RSE | AR |\n";
  out << "|---|---|---|---|---|\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    out << "| " << r.method << " | " << format_number(r.param) << " | " << fixed3(r.average_risk) << " | "
        << decorate(fixed3(r.rse), rse_marks[i]) << " | " << decorate(fixed3(r.average_recall), ar_marks[i]) << " |\n";
  }
  return out.str();
}

}  // namespace cptrie
