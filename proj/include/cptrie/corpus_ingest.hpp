#pragma once

// Raw text -> filtered sentence token streams.
//
// A document is read one line at a time; each non-empty line is treated as a
// paragraph. Lines that look like section titles are dropped, the rest are cut
// into sentences on terminal punctuation and every sentence is tokenized into
// word units (maximal ASCII letter runs) and single punctuation marks. A
// sentence survives only if all of its words are in the word list.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace cptrie {

struct TransparentStringHash {
  using is_transparent = void;
  std::size_t operator()(std::string_view s) const noexcept {
    return std::hash<std::string_view>{}(s);
  }
};

using StringSet = std::unordered_set<std::string, TransparentStringHash, std::equal_to<>>;

class WordList {
 public:
  WordList() = default;
  explicit WordList(StringSet entries) : entries_(std::move(entries)) {}

  // Case-insensitive membership (entries are stored lowercase).
  bool contains(std::string_view word) const;
  std::size_t size() const noexcept { return entries_.size(); }

 private:
  StringSet entries_;
};

// One word per line, UTF-8. Entries are lowercased and deduplicated; blank
// lines are ignored. Throws Error(empty_word_list) if nothing remains.
WordList load_word_list(const std::filesystem::path& path);
WordList parse_word_list(std::string_view text);

struct IngestConfig {
  // Tokens such as "Dr." whose trailing period never ends a sentence.
  StringSet abbreviations = default_abbreviations();
  // Unterminated lines with at most this many units are treated as headings.
  std::size_t heading_max_units = 8;

  static StringSet default_abbreviations();
};

// Plain "key = value" file. Recognized keys: abbreviations (path to a file
// with one abbreviation per line), heading_max_units. '#' starts a comment.
IngestConfig load_ingest_config(const std::filesystem::path& path);

struct SentenceSplit {
  std::vector<std::string> sentences;
  std::size_t headings = 0;
};

SentenceSplit split_sentences(std::string_view document, const IngestConfig& config);

struct SentenceTokens {
  std::vector<std::string> words;
  std::string source_id;
};

enum class RejectReason { none, unknown_word, heading, digit };

struct TokenizeResult {
  std::optional<SentenceTokens> tokens;
  RejectReason reason = RejectReason::none;
};

// Units are maximal ASCII letter runs plus individual punctuation marks
// (ASCII, or a code point from the General Punctuation block). Hyphens split
// words and are kept as punctuation units. Any digit rejects the sentence;
// so does any word not in the list or any other non-ASCII code point.
TokenizeResult tokenize_and_filter(std::string_view sentence, const WordList& word_list,
                                   std::string_view source_id = {});

struct IngestCounters {
  std::size_t documents = 0;
  std::size_t total = 0;
  std::size_t accepted = 0;
  std::size_t unknown_word = 0;
  std::size_t heading = 0;
  std::size_t digit = 0;

  IngestCounters& operator+=(const IngestCounters& other);
};

class Ingestor {
 public:
  Ingestor(const WordList& word_list, IngestConfig config)
      : word_list_(word_list), config_(std::move(config)) {}

  // Stateless apart from the counters passed in, so distinct documents may be
  // ingested concurrently with separate counters.
  std::vector<SentenceTokens> ingest(std::string_view document, std::string_view source_id,
                                     IngestCounters& counters) const;

 private:
  const WordList& word_list_;
  IngestConfig config_;
};

bool is_word_unit(std::string_view unit);

}  // namespace cptrie
