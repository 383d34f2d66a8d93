#include "cptrie/cp_trie.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cptrie/error.hpp"

namespace cptrie {
namespace {

using nlohmann::json;

std::string join_path(const std::vector<std::string>& path) {
  if (path.empty()) return "/";
  std::string out;
  for (const auto& unit : path) {
    out += '/';
    out += unit;
  }
  return out;
}

bool valid_unit(std::string_view unit) {
  return !unit.empty() && std::none_of(unit.begin(), unit.end(), [](unsigned char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
  });
}

void write_indent(std::ostream& out, int level) {
  out << '\n';
  for (int i = 0; i < level; ++i) out << "  ";
}

void serialize_node(const CpTrie& trie, NodeId id, std::ostream& out, bool pretty, int level) {
  const TrieNode& node = trie.node(id);
  const char* sep = pretty ? ": " : ":";
  out << '{';
  if (pretty) write_indent(out, level + 1);
  out << "\"n\"" << sep << node.pass_count << ',';
  if (pretty) write_indent(out, level + 1);
  out << "\"e\"" << sep << node.end_count;
  if (!node.children.empty()) {
    out << ',';
    if (pretty) write_indent(out, level + 1);
    out << "\"c\"" << sep << '{';
    bool first = true;
    for (std::string_view key : trie.sorted_keys(id)) {
      if (!first) out << ',';
      first = false;
      if (pretty) write_indent(out, level + 2);
      out << json(std::string(key)).dump() << sep;
      serialize_node(trie, node.children.find(key)->second, out, pretty, level + 2);
    }
    if (pretty) write_indent(out, level + 1);
    out << '}';
  }
  if (pretty) write_indent(out, level);
  out << '}';
}

std::uint64_t read_count(const json& node, const char* key, const std::vector<std::string>& path) {
  const auto it = node.find(key);
  if (it == node.end())
    throw Error(ErrorCode::malformed_trie, join_path(path) + ": missing \"" + key + "\"");
  if (it->is_number_unsigned()) return it->get<std::uint64_t>();
  if (it->is_number_integer())
    throw Error(ErrorCode::malformed_trie, join_path(path) + ": negative count in \"" + key + "\"");
  throw Error(ErrorCode::malformed_trie, join_path(path) + ": \"" + key + "\" is not an integer");
}

void build_node(CpTrie& trie, NodeId id, const json& node, std::vector<std::string>& path) {
  if (!node.is_object()) throw Error(ErrorCode::malformed_trie, join_path(path) + ": node is not an object");
  for (const auto& [key, value] : node.items()) {
    if (key != "n" && key != "e" && key != "c")
      throw Error(ErrorCode::malformed_trie, join_path(path) + ": unknown key \"" + key + "\"");
  }
  const std::uint64_t pass = read_count(node, "n", path);
  const std::uint64_t end = read_count(node, "e", path);
  if (!path.empty() && pass == 0)
    throw Error(ErrorCode::malformed_trie, join_path(path) + ": stored node with zero pass count");
  trie.set_counts(id, pass, end);

  std::uint64_t child_total = 0;
  if (const auto c = node.find("c"); c != node.end()) {
    if (!c->is_object()) throw Error(ErrorCode::malformed_trie, join_path(path) + ": \"c\" is not an object");
    for (const auto& [unit, child] : c->items()) {
      path.push_back(unit);
      if (!valid_unit(unit)) throw Error(ErrorCode::malformed_trie, join_path(path) + ": invalid unit key");
      const NodeId child_id = trie.add_child(id, unit, 0, 0);
      build_node(trie, child_id, child, path);
      child_total += trie.node(child_id).pass_count;
      path.pop_back();
    }
  }
  if (pass != end + child_total)
    throw Error(ErrorCode::malformed_trie,
                join_path(path) + ": count invariant violated (n=" + std::to_string(pass) +
                    ", e=" + std::to_string(end) + ", children=" + std::to_string(child_total) + ")");
}

std::vector<std::pair<std::string_view, NodeId>> top_children(const CpTrie& trie, NodeId id,
                                                              std::size_t limit) {
  std::vector<std::pair<std::string_view, NodeId>> kids;
  for (const auto& [unit, child] : trie.node(id).children) kids.emplace_back(unit, child);
  std::sort(kids.begin(), kids.end(), [&](const auto& a, const auto& b) {
    const auto la = trie.subtree_leaves(a.second);
    const auto lb = trie.subtree_leaves(b.second);
    if (la != lb) return la > lb;
    return a.first < b.first;
  });
  if (kids.size() > limit) kids.resize(limit);
  return kids;
}

void select_from(const CpTrie& trie, NodeId id, std::vector<std::string>& prefix, const SelectionOptions& options,
                 std::vector<EvaluationNode>& out) {
  const auto& node = trie.node(id);
  if (!node.children.empty()) {
    out.push_back(EvaluationNode{make_prefix_id(prefix), prefix, support_of(trie, id), prefix.size()});
  }
  if (prefix.size() >= options.max_depth) return;
  for (const auto& [unit, child] : top_children(trie, id, options.children)) {
    prefix.emplace_back(unit);
    select_from(trie, child, prefix, options, out);
    prefix.pop_back();
  }
}

}  // namespace

CpTrie::CpTrie() : nodes_(1) {}

std::optional<NodeId> CpTrie::child(NodeId parent, std::string_view unit) const {
  const auto& kids = nodes_.at(parent).children;
  const auto it = kids.find(unit);
  if (it == kids.end()) return std::nullopt;
  return it->second;
}

std::optional<NodeId> CpTrie::node_at(std::span<const std::string> prefix) const {
  NodeId id = root_id;
  for (const auto& unit : prefix) {
    const auto next = child(id, unit);
    if (!next) return std::nullopt;
    id = *next;
  }
  return id;
}

void CpTrie::insert(std::span<const std::string> units, std::uint64_t times) {
  if (units.empty()) throw Error(ErrorCode::invalid_argument, "cannot insert an empty sentence");
  NodeId id = root_id;
  nodes_[id].pass_count += times;
  for (const auto& unit : units) {
    auto found = nodes_[id].children.find(unit);
    NodeId next;
    if (found == nodes_[id].children.end()) {
      next = static_cast<NodeId>(nodes_.size());
      nodes_[id].children.emplace(unit, next);
      nodes_.emplace_back();
    } else {
      next = found->second;
    }
    id = next;
    nodes_[id].pass_count += times;
  }
  nodes_[id].end_count += times;
}

NodeId CpTrie::add_child(NodeId parent, std::string unit, std::uint64_t pass_count, std::uint64_t end_count) {
  const auto next = static_cast<NodeId>(nodes_.size());
  const auto [it, inserted] = nodes_.at(parent).children.emplace(std::move(unit), next);
  if (!inserted) throw Error(ErrorCode::malformed_trie, "duplicate child key '" + it->first + "'");
  nodes_.emplace_back();
  nodes_.back().pass_count = pass_count;
  nodes_.back().end_count = end_count;
  return next;
}

void CpTrie::set_counts(NodeId id, std::uint64_t pass_count, std::uint64_t end_count) {
  nodes_.at(id).pass_count = pass_count;
  nodes_.at(id).end_count = end_count;
}

void CpTrie::merge(const CpTrie& other) {
  if (&other == this) {
    const CpTrie copy = other;
    merge(copy);
    return;
  }
  std::vector<std::pair<NodeId, NodeId>> stack{{root_id, root_id}};
  while (!stack.empty()) {
    const auto [mine, theirs] = stack.back();
    stack.pop_back();
    const TrieNode& src = other.nodes_[theirs];
    nodes_[mine].pass_count += src.pass_count;
    nodes_[mine].end_count += src.end_count;
    for (const auto& [unit, their_child] : src.children) {
      auto found = nodes_[mine].children.find(unit);
      NodeId my_child;
      if (found == nodes_[mine].children.end()) {
        my_child = static_cast<NodeId>(nodes_.size());
        nodes_[mine].children.emplace(unit, my_child);
        nodes_.emplace_back();
      } else {
        my_child = found->second;
      }
      stack.emplace_back(my_child, their_child);
    }
  }
}

std::vector<std::string_view> CpTrie::sorted_keys(NodeId id) const {
  std::vector<std::string_view> keys;
  keys.reserve(nodes_.at(id).children.size());
  for (const auto& [unit, child] : nodes_[id].children) keys.push_back(unit);
  std::sort(keys.begin(), keys.end());
  return keys;
}

bool operator==(const CpTrie& a, const CpTrie& b) {
  std::vector<std::pair<NodeId, NodeId>> stack{{CpTrie::root_id, CpTrie::root_id}};
  while (!stack.empty()) {
    const auto [ia, ib] = stack.back();
    stack.pop_back();
    const TrieNode& na = a.nodes_[ia];
    const TrieNode& nb = b.nodes_[ib];
    if (na.pass_count != nb.pass_count || na.end_count != nb.end_count ||
        na.children.size() != nb.children.size())
      return false;
    for (const auto& [unit, ca] : na.children) {
      const auto cb = nb.children.find(unit);
      if (cb == nb.children.end()) return false;
      stack.emplace_back(ca, cb->second);
    }
  }
  return true;
}

CpTrie merge(const CpTrie& a, const CpTrie& b) {
  CpTrie out = a;
  out.merge(b);
  return out;
}

void serialize(const CpTrie& trie, std::ostream& out, SerializeOptions options) {
  serialize_node(trie, CpTrie::root_id, out, options.pretty, 0);
  if (options.pretty) out << '\n';
}

std::string serialize(const CpTrie& trie, SerializeOptions options) {
  std::ostringstream out;
  serialize(trie, out, options);
  return out.str();
}

CpTrie deserialize(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::malformed_trie, std::string("invalid JSON: ") + e.what());
  }
  CpTrie trie;
  std::vector<std::string> path;
  build_node(trie, CpTrie::root_id, doc, path);
  return trie;
}

CpTrie load_trie(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return deserialize(buf.str());
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.message());
  }
}

void save_trie(const CpTrie& trie, const std::filesystem::path& path, SerializeOptions options) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  serialize(trie, out, options);
  if (!out) throw Error(ErrorCode::io, "write failed for " + path.string());
}

std::optional<std::string> find_count_violation(const CpTrie& trie) {
  struct Frame {
    NodeId id;
    std::vector<std::string> path;
  };
  std::vector<Frame> stack{{CpTrie::root_id, {}}};
  while (!stack.empty()) {
    Frame frame = std::move(stack.back());
    stack.pop_back();
    const TrieNode& node = trie.node(frame.id);
    if (!frame.path.empty() && node.pass_count == 0) return join_path(frame.path);
    std::uint64_t child_total = 0;
    for (const auto& [unit, child] : node.children) {
      child_total += trie.node(child).pass_count;
      auto path = frame.path;
      path.push_back(unit);
      stack.push_back({child, std::move(path)});
    }
    if (node.pass_count != node.end_count + child_total) return join_path(frame.path);
  }
  return std::nullopt;
}

TrieStats compute_stats(const CpTrie& trie, std::uint64_t articles) {
  TrieStats stats;
  stats.total_articles_processed = articles;
  stats.root_branching = trie.root().children.size();
  stats.node_count = trie.node_count();
  std::vector<std::pair<NodeId, std::uint64_t>> stack{{CpTrie::root_id, 0}};
  while (!stack.empty()) {
    const auto [id, depth] = stack.back();
    stack.pop_back();
    const TrieNode& node = trie.node(id);
    stats.total_leaves += node.end_count;
    if (node.end_count > 0) ++stats.distinct_terminals;
    stats.max_depth = std::max(stats.max_depth, depth);
    for (const auto& [unit, child] : node.children) stack.emplace_back(child, depth + 1);
  }
  return stats;
}

std::string stats_to_json(const TrieStats& stats) {
  nlohmann::ordered_json j;
  j["articles"] = stats.total_articles_processed;
  j["leaves"] = stats.total_leaves;
  j["distinct_terminals"] = stats.distinct_terminals;
  j["max_depth"] = stats.max_depth;
  j["root_branching"] = stats.root_branching;
  return j.dump();
}

std::string make_prefix_id(std::span<const std::string> prefix_words) {
  std::string id;
  for (const auto& word : prefix_words) {
    if (!id.empty()) id += ' ';
    id += word;
  }
  return id;
}

std::vector<std::string> support_of(const CpTrie& trie, NodeId id) {
  std::vector<std::string> support;
  for (std::string_view key : trie.sorted_keys(id)) support.emplace_back(key);
  return support;
}

Selection select_evaluation_nodes(const CpTrie& trie, SelectionOptions options) {
  if (options.roots == 0 || options.children == 0 || options.max_depth == 0)
    throw Error(ErrorCode::invalid_argument, "roots, children and max_depth must be positive");
  if (trie.root().children.empty()) throw Error(ErrorCode::empty_input, "trie is empty");

  Selection selection;
  const std::size_t available = trie.root().children.size();
  if (available < options.roots) {
    selection.warnings.push_back("only " + std::to_string(available) + " sentence-starting units available (" +
                                 std::to_string(options.roots) + " requested)");
  }
  std::vector<std::string> prefix;
  for (const auto& [unit, start] : top_children(trie, CpTrie::root_id, options.roots)) {
    prefix.emplace_back(unit);
    select_from(trie, start, prefix, options, selection.nodes);
    prefix.pop_back();
  }
  return selection;
}

void write_nodes_jsonl(const std::vector<EvaluationNode>& nodes, std::ostream& out) {
  for (const auto& node : nodes) {
    nlohmann::ordered_json j;
    j["prefix_id"] = node.prefix_id;
    j["prefix_words"] = node.prefix_words;
    j["support"] = node.support;
    j["depth"] = node.depth;
    out << j.dump() << '\n';
  }
}

std::vector<EvaluationNode> read_nodes_jsonl(std::istream& in) {
  std::vector<EvaluationNode> nodes;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "nodes line " + std::to_string(line_no);
    try {
      const json j = json::parse(line);
      EvaluationNode node;
      node.prefix_id = j.at("prefix_id").get<std::string>();
      node.prefix_words = j.at("prefix_words").get<std::vector<std::string>>();
      node.support = j.at("support").get<std::vector<std::string>>();
      node.depth = j.at("depth").get<std::size_t>();
      if (node.support.empty()) throw Error(ErrorCode::schema, where + ": empty support");
      if (node.depth != node.prefix_words.size())
        throw Error(ErrorCode::schema, where + ": depth does not match prefix_words");
      std::sort(node.support.begin(), node.support.end());
      nodes.push_back(std::move(node));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::schema, where + ": " + e.what());
    }
  }
  return nodes;
}

std::vector<EvaluationNode> load_nodes(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
  return read_nodes_jsonl(in);
}

}  // namespace cptrie
