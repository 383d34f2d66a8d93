#pragma once

// Probability-independent scoring of a truncation rule against the trie's
// empirical support. Only ranks and set sizes enter the scores:
//   recall = min(|A| / k*, 1)      risk = max(|A| / k* - 1, 0)
// where k* is the shortest rank prefix covering every support unit.

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cptrie/cp_trie.hpp"
#include "cptrie/dist_io.hpp"
#include "cptrie/error.hpp"
#include "cptrie/samplers.hpp"

namespace cptrie {

class UncoveredSupportError : public Error {
 public:
  UncoveredSupportError(const std::string& prefix_id, std::vector<std::string> words);
  const std::vector<std::string>& words() const noexcept { return words_; }

 private:
  std::vector<std::string> words_;
};

// True if a ranked token covers a support unit: the token must start a word
// and either be a non-empty prefix of an alphabetic unit or equal a
// punctuation unit. Non-initial fragments are never matched.
bool covers(const TokenEntry& token, std::string_view unit);

// One pass over the ranking. Throws UncoveredSupportError listing the units
// still uncovered after the last listed token.
std::size_t k_star(const DistributionRecord& record, std::span<const std::string> support);

struct RecallRisk {
  double recall = 0.0;
  double risk = 0.0;
};

RecallRisk recall_risk(std::size_t allowed_size, std::size_t k_star);

struct NodeMetrics {
  std::string prefix_id;
  std::size_t k_star = 0;
  std::size_t allowed_size = 0;
  double recall = 0.0;
  double risk = 0.0;
  std::vector<std::string> uncovered_support;
};

NodeMetrics node_metrics(const DistributionRecord& record, std::span<const std::string> support,
                         const SamplerConfig& config);
NodeMetrics node_metrics(const std::string& prefix_id, std::size_t k_star, std::size_t allowed_size);

struct ExcludedNode {
  std::string prefix_id;
  std::string reason;
  std::vector<std::string> uncovered_support;
};

struct AggregateReport {
  std::string method;
  double theta = 0.0;
  std::size_t n_nodes = 0;
  double average_recall = 0.0;
  double average_risk = 0.0;
  double rse = 0.0;  // (1/N) * sqrt(sum (risk_i - mean)^2)
  std::vector<ExcludedNode> excluded_nodes;
  std::size_t degenerate_zipf_fallbacks = 0;
  std::vector<NodeMetrics> per_node;
};

// Throws Error(empty_input) on an empty list.
AggregateReport aggregate(std::vector<NodeMetrics> per_node);

// Per-node support and k*, computed once and reused across parameter values.
struct PreparedNode {
  std::string prefix_id;
  const DistributionRecord* record = nullptr;
  std::size_t k_star = 0;
};

struct PreparedSet {
  std::vector<PreparedNode> nodes;
  std::vector<ExcludedNode> excluded;
};

// Pairs nodes with records (Error(missing_record) lists any absent ids) and
// computes k*. Nodes whose support is not covered within the export are moved
// to `excluded` instead of failing the whole run.
PreparedSet prepare_nodes(std::span<const EvaluationNode> nodes, const RecordIndex& records);

// Scores every prepared node at one parameter value. A node whose Mirostat
// fit is degenerate is scored with the full listed size and counted.
AggregateReport evaluate(const PreparedSet& prepared, const SamplerConfig& config);

std::string report_to_json(const AggregateReport& report, bool include_per_node = true);
AggregateReport report_from_json(std::string_view text);

struct ScatterPoint {
  std::string prefix_id;
  double entropy_nats = 0.0;
  std::size_t k_star = 0;
};

std::vector<ScatterPoint> entropy_k_star_points(const PreparedSet& prepared);

// Pearson correlation between entropy and k*. Needs at least 3 points;
// throws Error(zero_variance) if either variable is constant.
double entropy_k_star_correlation(std::span<const ScatterPoint> points);

// "prefix_id,entropy_nats,k_star" with RFC 4180 quoting.
void write_scatter_csv(std::span<const ScatterPoint> points, std::ostream& out);

std::string csv_field(std::string_view value);

}  // namespace cptrie
