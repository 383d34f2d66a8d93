#include "cptrie/dist_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "cptrie/error.hpp"

namespace cptrie {
namespace {

using nlohmann::json;

template <typename T>
T field(const json& j, const char* name) {
  const auto it = j.find(name);
  if (it == j.end()) throw Error(ErrorCode::schema, std::string("missing field \"") + name + "\"");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::schema, std::string("field \"") + name + "\" has the wrong type");
  }
}

std::size_t count_field(const json& j, const char* name) {
  const auto it = j.find(name);
  if (it == j.end()) throw Error(ErrorCode::schema, std::string("missing field \"") + name + "\"");
  if (!it->is_number_unsigned())
    throw Error(ErrorCode::schema, std::string("field \"") + name + "\" must be a non-negative integer");
  return it->get<std::size_t>();
}

}  // namespace

void validate(DistributionRecord& record) {
  if (record.prefix_id.empty()) throw Error(ErrorCode::schema, "empty prefix_id");
  if (record.tokens.empty()) throw Error(ErrorCode::schema, "tokens: no entries");
  if (record.tokens.size() > record.vocab_size)
    throw Error(ErrorCode::schema, "tokens: " + std::to_string(record.tokens.size()) + " entries exceed vocab_size " +
                                       std::to_string(record.vocab_size));
  if (!std::isfinite(record.entropy_nats)) throw Error(ErrorCode::schema, "entropy_nats is not finite");

  double listed = 0.0;
  for (std::size_t i = 0; i < record.tokens.size(); ++i) {
    const TokenEntry& t = record.tokens[i];
    const std::string where = "tokens[" + std::to_string(i) + "]";
    if (t.rank != i + 1)
      throw Error(ErrorCode::schema, where + ".rank is " + std::to_string(t.rank) + ", expected " + std::to_string(i + 1));
    if (t.surface.empty()) throw Error(ErrorCode::schema, where + ".surface is empty");
    if (!(t.prob > 0.0 && t.prob <= 1.0 + kTailClampTolerance)) throw Error(ErrorCode::schema, where + ".prob outside (0, 1]");
    if (i > 0 && t.prob > record.tokens[i - 1].prob)
      throw Error(ErrorCode::not_sorted, where + ".prob " + std::to_string(t.prob) + " exceeds the previous entry");
    listed += t.prob;
  }

  if (!std::isfinite(record.tail_mass)) throw Error(ErrorCode::schema, "tail_mass is not finite");
  if (record.tail_mass < 0.0) {
    if (record.tail_mass < -kTailClampTolerance) throw Error(ErrorCode::mass_mismatch, "negative tail_mass");
    record.tail_mass = 0.0;
  }
  const double total = listed + record.tail_mass;
  if (std::abs(total - 1.0) > kMassTolerance)
    throw Error(ErrorCode::mass_mismatch, "listed probabilities plus tail_mass sum to " + std::to_string(total));
}

DistributionRecord parse_record(std::string_view json_line) {
  json j;
  try {
    j = json::parse(json_line);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::schema, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::schema, "record is not an object");

  DistributionRecord record;
  record.prefix_id = field<std::string>(j, "prefix_id");
  record.vocab_size = count_field(j, "vocab_size");
  record.entropy_nats = field<double>(j, "entropy_nats");
  record.tail_mass = field<double>(j, "tail_mass");
  const auto tokens = j.find("tokens");
  if (tokens == j.end() || !tokens->is_array()) throw Error(ErrorCode::schema, "field \"tokens\" must be an array");
  record.tokens.reserve(tokens->size());
  for (const auto& t : *tokens) {
    if (!t.is_object()) throw Error(ErrorCode::schema, "token entry is not an object");
    TokenEntry entry;
    entry.rank = count_field(t, "rank");
    entry.surface = field<std::string>(t, "surface");
    entry.word_initial = field<bool>(t, "word_initial");
    entry.prob = field<double>(t, "prob");
    record.tokens.push_back(std::move(entry));
  }
  validate(record);
  return record;
}

std::string record_to_json(const DistributionRecord& record) {
  nlohmann::ordered_json j;
  j["prefix_id"] = record.prefix_id;
  j["vocab_size"] = record.vocab_size;
  j["entropy_nats"] = record.entropy_nats;
  j["tail_mass"] = record.tail_mass;
  auto& tokens = j["tokens"] = nlohmann::ordered_json::array();
  for (const auto& t : record.tokens) {
    nlohmann::ordered_json e;
    e["rank"] = t.rank;
    e["surface"] = t.surface;
    e["word_initial"] = t.word_initial;
    e["prob"] = t.prob;
    tokens.push_back(std::move(e));
  }
  return j.dump();
}

std::vector<DistributionRecord> read_records(std::istream& in) {
  std::vector<DistributionRecord> records;
  std::unordered_map<std::string, std::size_t> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      DistributionRecord record = parse_record(line);
      const auto [it, fresh] = seen.emplace(record.prefix_id, line_no);
      if (!fresh)
        throw Error(ErrorCode::duplicate_id,
                    "prefix_id \"" + record.prefix_id + "\" already seen on line " + std::to_string(it->second));
      records.push_back(std::move(record));
    } catch (const Error& e) {
      throw Error(e.code(), "line " + std::to_string(line_no) + ": " + e.message());
    }
  }
  return records;
}

std::vector<DistributionRecord> load_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
  try {
    return read_records(in);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.message());
  }
}

void write_records(std::span<const DistributionRecord> records, std::ostream& out) {
  for (const auto& record : records) out << record_to_json(record) << '\n';
}

RecordIndex index_by_prefix(std::span<const DistributionRecord> records) {
  RecordIndex index;
  index.reserve(records.size());
  for (const auto& record : records) index.emplace(record.prefix_id, &record);
  return index;
}

double listed_entropy(const DistributionRecord& record) {
  double h = 0.0;
  for (const auto& t : record.tokens) h -= t.prob * std::log(t.prob);
  return h;
}

EntropyDiagnostic full_entropy_check(const DistributionRecord& record) {
  EntropyDiagnostic diag;
  diag.listed_entropy = listed_entropy(record);
  diag.max_entropy = record.vocab_size > 0 ? std::log(static_cast<double>(record.vocab_size)) : 0.0;
  if (record.entropy_nats < -kMassTolerance) {
    diag.ok = false;
    diag.message = record.prefix_id + ": entropy_nats " + std::to_string(record.entropy_nats) + " is negative";
  } else if (record.entropy_nats > diag.max_entropy + kMassTolerance) {
    diag.ok = false;
    diag.message = record.prefix_id + ": entropy_nats " + std::to_string(record.entropy_nats) + " exceeds ln V = " +
                   std::to_string(diag.max_entropy);
  }
  return diag;
}

std::vector<DistributionRecord> toy_lm_export(const CpTrie& trie, std::span<const EvaluationNode> nodes) {
  std::vector<DistributionRecord> records;
  records.reserve(nodes.size());
  for (const auto& node : nodes) {
    const auto id = trie.node_at(node.prefix_words);
    if (!id) throw Error(ErrorCode::missing_record, "prefix \"" + node.prefix_id + "\" does not resolve in the trie");
    const TrieNode& parent = trie.node(*id);
    if (parent.children.empty())
      throw Error(ErrorCode::empty_input, "prefix \"" + node.prefix_id + "\" has empty support");

    std::vector<std::pair<std::string_view, std::uint64_t>> kids;
    std::uint64_t total = 0;
    for (const auto& [unit, child] : parent.children) {
      kids.emplace_back(unit, trie.node(child).pass_count);
      total += trie.node(child).pass_count;
    }
    std::sort(kids.begin(), kids.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });

    DistributionRecord record;
    record.prefix_id = node.prefix_id;
    record.vocab_size = kids.size();
    record.tail_mass = 0.0;
    double entropy = 0.0;
    for (std::size_t i = 0; i < kids.size(); ++i) {
      const double p = static_cast<double>(kids[i].second) / static_cast<double>(total);
      record.tokens.push_back(TokenEntry{i + 1, std::string(kids[i].first), true, p});
      entropy -= p * std::log(p);
    }
    record.entropy_nats = entropy;
    records.push_back(std::move(record));
  }
  return records;
}

}  // namespace cptrie
