#include <gtest/gtest.h>

#include <charconv>
#include <sstream>

#include "cptrie/error.hpp"
#include "cptrie/report.hpp"

namespace cptrie {
namespace {

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

// Minimal RFC 4180 record splitter.
std::vector<std::string> csv_split(const std::string& line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  return fields;
}

double parse_double(const std::string& s) {
  double v = 0;
  std::from_chars(s.data(), s.data() + s.size(), v);
  return v;
}

const std::vector<ReportRow> kRows{
    {"top_p", 0.5705, 1.04, 0.006, 0.213},
    {"eta", 2.1e-4, 0.98, 0.012, 0.241},
    {"top_k", 15, 1.029, 0.006, 0.220},
};

TEST(ReportTest, SingleRowMarkdown) {
  const auto lines = lines_of(render_table({kRows[2]}, TableFormat::markdown));
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[0], "| method | param | avg_risk | RSE | AR |");
  EXPECT_EQ(lines[2], "| top_k | 15 | 1.029 | 0.006 | 0.220 |");
}

TEST(ReportTest, RowsSortedByMethodWithMarks) {
  const auto lines = lines_of(render_table(kRows, TableFormat::markdown));
  ASSERT_EQ(lines.size(), 5u);
  EXPECT_EQ(lines[2], "| eta | 0.00021 | 0.980 | <u>0.012</u> | **0.241** |");
  EXPECT_EQ(lines[3], "| top_k | 15 | 1.029 | **0.006** | 0.220 |");
  EXPECT_EQ(lines[4], "| top_p | 0.5705 | 1.040 | **0.006** | <u>0.213</u> |");
}

TEST(ReportTest, NoMarksWhenColumnIsFlat) {
  const std::vector<ReportRow> rows{{"a", 1, 1, 0.5, 0.5}, {"b", 2, 1, 0.5, 0.5}};
  const std::string table = render_table(rows, TableFormat::markdown);
  EXPECT_EQ(table.find("**"), std::string::npos);
  EXPECT_EQ(table.find("<u>"), std::string::npos);
}

TEST(ReportTest, CsvRoundTrips) {
  const auto lines = lines_of(render_table(kRows, TableFormat::csv));
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[0], "method,param,avg_risk,rse,ar");
  std::vector<ReportRow> sorted{kRows[1], kRows[2], kRows[0]};
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const auto f = csv_split(lines[i + 1]);
    ASSERT_EQ(f.size(), 5u);
    EXPECT_EQ(f[0], sorted[i].method);
    EXPECT_EQ(parse_double(f[1]), sorted[i].param);
    EXPECT_EQ(parse_double(f[2]), sorted[i].average_risk);
    EXPECT_EQ(parse_double(f[3]), sorted[i].rse);
    EXPECT_EQ(parse_double(f[4]), sorted[i].average_recall);
  }
}

TEST(ReportTest, RowFromEitherJsonShape) {
  const auto eval = row_from_json(R"({"method":"top_k","theta":3,"n_nodes":5,"average_recall":0.5,
                                      "average_risk":0.25,"rse":0.1,"excluded_nodes":[],"per_node":[]})");
  EXPECT_EQ(eval.method, "top_k");
  EXPECT_EQ(eval.param, 3);
  const auto cal = row_from_json(R"({"method":"eta","theta":0.01,"n_nodes":5,"average_recall":0.7,
                                     "average_risk":1.02,"rse":0.2,"target_risk":1,"feasible":true})");
  EXPECT_EQ(cal.average_risk, 1.02);
  EXPECT_THROW(row_from_json(R"({"method":"eta"})"), Error);
  EXPECT_THROW(row_from_json("nope"), Error);
}

TEST(ReportTest, FormatNumberIsShortest) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(15), "15");
  EXPECT_EQ(parse_double(format_number(1.0 / 3.0)), 1.0 / 3.0);
}

}  // namespace
}  // namespace cptrie
