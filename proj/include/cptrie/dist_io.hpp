#pragma once

// Wire format for next-token distributions. One JSON object per line:
//   {"prefix_id": str, "vocab_size": int, "entropy_nats": float,
//    "tail_mass": float, "tokens": [{"rank", "surface", "word_initial", "prob"}]}
// Tokens are the top-N of the vocabulary in descending probability.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "cptrie/cp_trie.hpp"

namespace cptrie {

inline constexpr double kMassTolerance = 1e-6;
inline constexpr double kTailClampTolerance = 1e-9;

struct TokenEntry {
  std::size_t rank = 0;  // 1-based
  std::string surface;   // boundary marker already stripped by the exporter
  bool word_initial = false;
  double prob = 0.0;
};

struct DistributionRecord {
  std::string prefix_id;
  std::size_t vocab_size = 0;
  double entropy_nats = 0.0;  // entropy of the full distribution
  double tail_mass = 0.0;     // 1 - sum of listed probabilities
  std::vector<TokenEntry> tokens;

  std::size_t listed() const noexcept { return tokens.size(); }
  // True when every vocabulary entry is listed, so no cut can overflow.
  bool fully_listed() const noexcept { return tokens.size() >= vocab_size; }
};

// Throws Error(schema | not_sorted | mass_mismatch) describing the first
// violated invariant. Clamps a tail mass within -1e-9 of zero to zero.
void validate(DistributionRecord& record);

DistributionRecord parse_record(std::string_view json_line);
std::string record_to_json(const DistributionRecord& record);

// Parses and validates a JSONL stream. Errors carry the line number; a
// repeated prefix_id raises Error(duplicate_id).
std::vector<DistributionRecord> read_records(std::istream& in);
std::vector<DistributionRecord> load_records(const std::filesystem::path& path);
void write_records(std::span<const DistributionRecord> records, std::ostream& out);

using RecordIndex = std::unordered_map<std::string, const DistributionRecord*>;
RecordIndex index_by_prefix(std::span<const DistributionRecord> records);

double listed_entropy(const DistributionRecord& record);

struct EntropyDiagnostic {
  bool ok = true;
  double listed_entropy = 0.0;  // -sum p ln p over the listed tokens
  double max_entropy = 0.0;     // ln V
  std::string message;
};

// Full-distribution entropy must lie in [0, ln V].
EntropyDiagnostic full_entropy_check(const DistributionRecord& record);

// Distribution over the children of each node, proportional to child pass
// counts; ties broken by ascending surface. Every entry is word-initial and
// the tail is empty. Throws Error(empty_input) for a node without support
// and Error(missing_record) when a prefix does not resolve.
std::vector<DistributionRecord> toy_lm_export(const CpTrie& trie, std::span<const EvaluationNode> nodes);

}  // namespace cptrie
