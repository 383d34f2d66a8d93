#include "cptrie/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cptrie/corpus_ingest.hpp"
#include "cptrie/error.hpp"

namespace cptrie {
namespace {

std::string join_words(const std::vector<std::string>& words) {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out += ", ";
    out += w;
  }
  return out;
}

}  // namespace

UncoveredSupportError::UncoveredSupportError(const std::string& prefix_id, std::vector<std::string> words)
    : Error(ErrorCode::uncovered_support, "prefix \"" + prefix_id + "\": support not covered by the export: " +
                                              join_words(words)),
      words_(std::move(words)) {}

bool covers(const TokenEntry& token, std::string_view unit) {
  if (!token.word_initial || token.surface.empty()) return false;
  if (is_word_unit(unit)) return unit.starts_with(token.surface);
  return unit == token.surface;
}

std::size_t k_star(const DistributionRecord& record, std::span<const std::string> support) {
  if (support.empty()) throw Error(ErrorCode::empty_input, "prefix \"" + record.prefix_id + "\": empty support");
  std::set<std::string, std::less<>> uncovered(support.begin(), support.end());
  for (const auto& token : record.tokens) {
    if (!token.word_initial || token.surface.empty()) continue;
    // Every unit this surface can cover sorts at or after the surface and
    // starts with it.
    auto it = uncovered.lower_bound(token.surface);
    while (it != uncovered.end() && std::string_view(*it).starts_with(token.surface)) {
      if (covers(token, *it)) {
        it = uncovered.erase(it);
      } else {
        ++it;
      }
    }
    if (uncovered.empty()) return token.rank;
  }
  throw UncoveredSupportError(record.prefix_id, {uncovered.begin(), uncovered.end()});
}

RecallRisk recall_risk(std::size_t allowed_size, std::size_t k_star) {
  const double ratio = static_cast<double>(allowed_size) / static_cast<double>(k_star);
  return {std::min(ratio, 1.0), std::max(ratio - 1.0, 0.0)};
}

NodeMetrics node_metrics(const std::string& prefix_id, std::size_t k_star, std::size_t allowed_size) {
  const RecallRisk rr = recall_risk(allowed_size, k_star);
  return NodeMetrics{prefix_id, k_star, allowed_size, rr.recall, rr.risk, {}};
}

NodeMetrics node_metrics(const DistributionRecord& record, std::span<const std::string> support,
                         const SamplerConfig& config) {
  const std::size_t allowed = allowed_set_size(record, config);
  return node_metrics(record.prefix_id, k_star(record, support), allowed);
}

AggregateReport aggregate(std::vector<NodeMetrics> per_node) {
  if (per_node.empty()) throw Error(ErrorCode::empty_input, "no nodes to aggregate");
  AggregateReport report;
  const auto n = static_cast<double>(per_node.size());
  double recall_sum = 0.0;
  double risk_sum = 0.0;
  for (const auto& m : per_node) {
    recall_sum += m.recall;
    risk_sum += m.risk;
  }
  const double mean_risk = risk_sum / n;
  double sq = 0.0;
  for (const auto& m : per_node) sq += (m.risk - mean_risk) * (m.risk - mean_risk);
  report.n_nodes = per_node.size();
  report.average_recall = recall_sum / n;
  report.average_risk = mean_risk;
  report.rse = std::sqrt(sq) / n;
  report.per_node = std::move(per_node);
  return report;
}

PreparedSet prepare_nodes(std::span<const EvaluationNode> nodes, const RecordIndex& records) {
  std::vector<std::string> missing;
  for (const auto& node : nodes) {
    if (!records.contains(node.prefix_id)) missing.push_back(node.prefix_id);
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& id : missing) list += (list.empty() ? "\"" : ", \"") + id + "\"";
    throw Error(ErrorCode::missing_record, std::to_string(missing.size()) + " node(s) without a distribution: " + list);
  }

  PreparedSet prepared;
  for (const auto& node : nodes) {
    const DistributionRecord* record = records.at(node.prefix_id);
    try {
      prepared.nodes.push_back(PreparedNode{node.prefix_id, record, k_star(*record, node.support)});
    } catch (const UncoveredSupportError& e) {
      prepared.excluded.push_back(ExcludedNode{node.prefix_id, std::string(to_string(e.code())), e.words()});
    }
  }
  return prepared;
}

AggregateReport evaluate(const PreparedSet& prepared, const SamplerConfig& config) {
  check_theta(config);
  if (prepared.nodes.empty()) throw Error(ErrorCode::uncovered_support, "every node was excluded");
  std::vector<NodeMetrics> per_node;
  per_node.reserve(prepared.nodes.size());
  std::size_t degenerate = 0;
  for (const auto& node : prepared.nodes) {
    std::size_t allowed = 0;
    try {
      allowed = allowed_set_size(*node.record, config);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::degenerate_zipf) throw;
      allowed = node.record->listed();
      ++degenerate;
    }
    per_node.push_back(node_metrics(node.prefix_id, node.k_star, allowed));
  }
  AggregateReport report = aggregate(std::move(per_node));
  report.method = std::string(method_name(config.method));
  report.theta = config.theta;
  report.excluded_nodes = prepared.excluded;
  report.degenerate_zipf_fallbacks = degenerate;
  return report;
}

std::string report_to_json(const AggregateReport& report, bool include_per_node) {
  nlohmann::ordered_json j;
  j["method"] = report.method;
  j["theta"] = report.theta;
  j["n_nodes"] = report.n_nodes;
  j["average_recall"] = report.average_recall;
  j["average_risk"] = report.average_risk;
  j["rse"] = report.rse;
  auto& excluded = j["excluded_nodes"] = nlohmann::ordered_json::array();
  for (const auto& e : report.excluded_nodes) {
    excluded.push_back({{"prefix_id", e.prefix_id}, {"reason", e.reason}, {"uncovered_support", e.uncovered_support}});
  }
  j["degenerate_zipf_fallbacks"] = report.degenerate_zipf_fallbacks;
  if (include_per_node) {
    auto& nodes = j["per_node"] = nlohmann::ordered_json::array();
    for (const auto& m : report.per_node) {
      nlohmann::ordered_json n;
      n["prefix_id"] = m.prefix_id;
      n["k_star"] = m.k_star;
      n["allowed_size"] = m.allowed_size;
      n["recall"] = m.recall;
      n["risk"] = m.risk;
      n["uncovered_support"] = m.uncovered_support;
      nodes.push_back(std::move(n));
    }
  }
  return j.dump(2);
}

AggregateReport report_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    AggregateReport report;
    report.method = j.at("method").get<std::string>();
    report.theta = j.at("theta").get<double>();
    report.n_nodes = j.at("n_nodes").get<std::size_t>();
    report.average_recall = j.at("average_recall").get<double>();
    report.average_risk = j.at("average_risk").get<double>();
    report.rse = j.at("rse").get<double>();
    if (const auto ex = j.find("excluded_nodes"); ex != j.end()) {
      for (const auto& e : *ex) {
        report.excluded_nodes.push_back(ExcludedNode{e.at("prefix_id").get<std::string>(),
                                                     e.value("reason", std::string{}),
                                                     e.value("uncovered_support", std::vector<std::string>{})});
      }
    }
    report.degenerate_zipf_fallbacks = j.value("degenerate_zipf_fallbacks", std::size_t{0});
    if (const auto nodes = j.find("per_node"); nodes != j.end()) {
      for (const auto& n : *nodes) {
        report.per_node.push_back(NodeMetrics{n.at("prefix_id").get<std::string>(), n.at("k_star").get<std::size_t>(),
                                              n.at("allowed_size").get<std::size_t>(), n.at("recall").get<double>(),
                                              n.at("risk").get<double>(),
                                              n.value("uncovered_support", std::vector<std::string>{})});
      }
    }
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::schema, std::string("report: ") + e.what());
  }
}

std::vector<ScatterPoint> entropy_k_star_points(const PreparedSet& prepared) {
  std::vector<ScatterPoint> points;
  points.reserve(prepared.nodes.size());
  for (const auto& node : prepared.nodes) {
    points.push_back(ScatterPoint{node.prefix_id, node.record->entropy_nats, node.k_star});
  }
  return points;
}

double entropy_k_star_correlation(std::span<const ScatterPoint> points) {
  if (points.size() < 3) throw Error(ErrorCode::empty_input, "correlation needs at least 3 nodes");
  const auto n = static_cast<double>(points.size());
  double mean_h = 0.0;
  double mean_k = 0.0;
  for (const auto& p : points) {
    if (!std::isfinite(p.entropy_nats)) throw Error(ErrorCode::schema, p.prefix_id + ": non-finite entropy");
    mean_h += p.entropy_nats;
    mean_k += static_cast<double>(p.k_star);
  }
  mean_h /= n;
  mean_k /= n;
  double cov = 0.0;
  double var_h = 0.0;
  double var_k = 0.0;
  for (const auto& p : points) {
    const double dh = p.entropy_nats - mean_h;
    const double dk = static_cast<double>(p.k_star) - mean_k;
    cov += dh * dk;
    var_h += dh * dh;
    var_k += dk * dk;
  }
  if (var_h <= 0.0 || var_k <= 0.0)
    throw Error(ErrorCode::zero_variance, var_h <= 0.0 ? "entropy is constant across nodes" : "k* is constant across nodes");
  return cov / std::sqrt(var_h * var_k);
}

std::string csv_field(std::string_view value) {
  if (value.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(value);
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void write_scatter_csv(std::span<const ScatterPoint> points, std::ostream& out) {
  out << "prefix_id,entropy_nats,k_star\n";
  std::ostringstream num;
  num << std::setprecision(17);
  for (const auto& p : points) {
    num.str({});
    num << p.entropy_nats;
    out << csv_field(p.prefix_id) << ',' << num.str() << ',' << p.k_star << '\n';
  }
}

}  // namespace cptrie
