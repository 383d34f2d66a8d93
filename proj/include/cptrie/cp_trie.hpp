#pragma once

// Context-preserving trie: a word-level prefix tree built from whole
// sentences, always starting at the sentence's first unit. The children of
// the node reached by a prefix are the words observed right after that prefix
// anywhere in the corpus (the prefix's empirical data support).

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cptrie/corpus_ingest.hpp"

namespace cptrie {

using NodeId = std::uint32_t;

struct TrieNode {
  std::uint64_t pass_count = 0;  // sentences whose path traverses this node
  std::uint64_t end_count = 0;   // sentences ending exactly here
  std::unordered_map<std::string, NodeId, TransparentStringHash, std::equal_to<>> children;
};

// Nodes live in a flat pool and refer to each other by index. The pool only
// grows, so NodeIds stay valid for the lifetime of the trie.
class CpTrie {
 public:
  CpTrie();

  static constexpr NodeId root_id = 0;

  const TrieNode& root() const { return nodes_[root_id]; }
  const TrieNode& node(NodeId id) const { return nodes_.at(id); }
  std::size_t node_count() const noexcept { return nodes_.size(); }

  std::optional<NodeId> child(NodeId parent, std::string_view unit) const;
  std::optional<NodeId> node_at(std::span<const std::string> prefix) const;

  void insert(std::span<const std::string> units, std::uint64_t times = 1);
  void insert(const SentenceTokens& sentence) { insert(sentence.words); }

  // Nodewise sum of counts, children unioned.
  void merge(const CpTrie& other);

  // Subtree leaf count (sum of end counts below and including the node).
  // Equals pass_count by the conservation invariant.
  std::uint64_t subtree_leaves(NodeId id) const { return nodes_.at(id).pass_count; }

  // Children keys sorted lexicographically (byte order).
  std::vector<std::string_view> sorted_keys(NodeId id) const;

  // Builds a node directly with the given counts; used by deserialization.
  NodeId add_child(NodeId parent, std::string unit, std::uint64_t pass_count, std::uint64_t end_count);
  void set_counts(NodeId id, std::uint64_t pass_count, std::uint64_t end_count);

  friend bool operator==(const CpTrie& a, const CpTrie& b);

 private:
  std::vector<TrieNode> nodes_;
};

CpTrie merge(const CpTrie& a, const CpTrie& b);

struct SerializeOptions {
  bool pretty = false;
};

// {"n": pass_count, "e": end_count, "c": {unit: node, ...}}, "c" omitted when
// empty, child keys in lexicographic byte order.
void serialize(const CpTrie& trie, std::ostream& out, SerializeOptions options = {});
std::string serialize(const CpTrie& trie, SerializeOptions options = {});

// Throws Error(malformed_trie) naming the offending path on malformed JSON,
// negative or non-integer counts, unknown keys or a violated count invariant.
CpTrie deserialize(std::string_view json_text);
CpTrie load_trie(const std::filesystem::path& path);
void save_trie(const CpTrie& trie, const std::filesystem::path& path, SerializeOptions options = {});

// Checks pass_count = end_count + sum(child pass_count) and pass_count >= 1
// for every non-root node. Returns the path of the first violation, if any.
std::optional<std::string> find_count_violation(const CpTrie& trie);

struct TrieStats {
  std::uint64_t total_articles_processed = 0;
  std::uint64_t total_leaves = 0;        // sum of end_count
  std::uint64_t distinct_terminals = 0;  // nodes with end_count > 0
  std::uint64_t max_depth = 0;
  std::uint64_t root_branching = 0;
  std::uint64_t node_count = 0;
};

TrieStats compute_stats(const CpTrie& trie, std::uint64_t articles = 0);
std::string stats_to_json(const TrieStats& stats);

struct EvaluationNode {
  std::string prefix_id;
  std::vector<std::string> prefix_words;
  std::vector<std::string> support;  // sorted lexicographically
  std::size_t depth = 0;

  friend bool operator==(const EvaluationNode&, const EvaluationNode&) = default;
};

// Identifier for a prefix: its units joined by single spaces. Units never
// contain whitespace, so the mapping is injective.
std::string make_prefix_id(std::span<const std::string> prefix_words);

struct SelectionOptions {
  std::size_t roots = 10;
  std::size_t children = 2;
  std::size_t max_depth = 6;
};

struct Selection {
  std::vector<EvaluationNode> nodes;
  std::vector<std::string> warnings;
};

// Picks the `roots` sentence-starting units with the largest subtrees, then
// from each keeps the `children` largest child subtrees at every level down
// to `max_depth` (the starting unit is depth 1). Ties go to the
// lexicographically smaller key. Nodes without children are skipped. Output
// is depth-first in selection order.
Selection select_evaluation_nodes(const CpTrie& trie, SelectionOptions options = {});

std::vector<std::string> support_of(const CpTrie& trie, NodeId id);

void write_nodes_jsonl(const std::vector<EvaluationNode>& nodes, std::ostream& out);
std::vector<EvaluationNode> read_nodes_jsonl(std::istream& in);
std::vector<EvaluationNode> load_nodes(const std::filesystem::path& path);

}  // namespace cptrie
