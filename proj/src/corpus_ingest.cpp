#include "cptrie/corpus_ingest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "cptrie/error.hpp"

namespace cptrie {
namespace {

bool is_ascii_alpha(unsigned char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_ascii_digit(unsigned char c) { return c >= '0' && c <= '9'; }
bool is_space(unsigned char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v'; }
bool is_ascii_punct(unsigned char c) { return c >= 0x21 && c <= 0x7e && !is_ascii_alpha(c) && !is_ascii_digit(c); }
bool is_terminal(char c) { return c == '.' || c == '!' || c == '?'; }
bool is_closer(char c) { return c == '"' || c == '\'' || c == ')' || c == ']'; }
bool is_opener(char c) { return c == '"' || c == '\'' || c == '(' || c == '['; }

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c);
  });
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && is_space(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    fn(text.substr(pos, end - pos));
    pos = end + 1;
  }
}

// Decodes one UTF-8 code point starting at s[i]. Returns the code point and
// advances i; malformed sequences yield U+FFFD and consume one byte.
char32_t decode_utf8(std::string_view s, std::size_t& i) {
  const auto lead = static_cast<unsigned char>(s[i]);
  std::size_t len = 0;
  char32_t cp = 0;
  if (lead < 0x80) {
    ++i;
    return lead;
  } else if ((lead & 0xE0) == 0xC0) {
    len = 2;
    cp = lead & 0x1F;
  } else if ((lead & 0xF0) == 0xE0) {
    len = 3;
    cp = lead & 0x0F;
  } else if ((lead & 0xF8) == 0xF0) {
    len = 4;
    cp = lead & 0x07;
  } else {
    ++i;
    return 0xFFFD;
  }
  if (i + len > s.size()) {
    ++i;
    return 0xFFFD;
  }
  for (std::size_t k = 1; k < len; ++k) {
    const auto cont = static_cast<unsigned char>(s[i + k]);
    if ((cont & 0xC0) != 0x80) {
      ++i;
      return 0xFFFD;
    }
    cp = (cp << 6) | (cont & 0x3F);
  }
  i += len;
  return cp;
}

bool is_unicode_punct(char32_t cp) { return cp >= 0x2010 && cp <= 0x205E; }
bool is_unicode_space(char32_t cp) {
  return cp == 0x00A0 || cp == 0x1680 || (cp >= 0x2000 && cp <= 0x200B) || cp == 0x2028 || cp == 0x2029 ||
         cp == 0x202F || cp == 0x205F || cp == 0x3000 || cp == 0xFEFF;
}

// Unit count used by the heading heuristic: letter/digit runs and single
// punctuation marks, mirroring the tokenizer without any filtering.
std::size_t count_units(std::string_view line) {
  std::size_t units = 0;
  std::size_t i = 0;
  while (i < line.size()) {
    const auto c = static_cast<unsigned char>(line[i]);
    if (is_ascii_alpha(c) || is_ascii_digit(c)) {
      while (i < line.size() && (is_ascii_alpha(static_cast<unsigned char>(line[i])) ||
                                 is_ascii_digit(static_cast<unsigned char>(line[i]))))
        ++i;
      ++units;
    } else if (c < 0x80) {
      if (!is_space(c) && c >= 0x20) ++units;
      ++i;
    } else {
      const char32_t cp = decode_utf8(line, i);
      if (!is_unicode_space(cp)) ++units;
    }
  }
  return units;
}

bool ends_with_terminal(std::string_view line) {
  while (!line.empty() && is_closer(line.back())) line.remove_suffix(1);
  return !line.empty() && is_terminal(line.back());
}

bool is_abbreviation(std::string_view line, std::size_t dot, const StringSet& abbreviations) {
  std::size_t begin = dot;
  while (begin > 0 && !is_space(static_cast<unsigned char>(line[begin - 1]))) --begin;
  std::string_view token = line.substr(begin, dot - begin + 1);
  while (!token.empty() && is_opener(token.front())) token.remove_prefix(1);
  return abbreviations.contains(token);
}

void split_line(std::string_view line, const IngestConfig& config, std::vector<std::string>& out) {
  std::size_t start = 0;
  std::size_t i = 0;
  while (i < line.size()) {
    if (!is_terminal(line[i])) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < line.size() && is_terminal(line[j])) ++j;
    const bool single_period = line[i] == '.' && j == i + 1;
    while (j < line.size() && is_closer(line[j])) ++j;
    const bool at_boundary = j == line.size() || is_space(static_cast<unsigned char>(line[j]));
    if (at_boundary && !(single_period && is_abbreviation(line, i, config.abbreviations))) {
      const auto sentence = trim(line.substr(start, j - start));
      if (!sentence.empty()) out.emplace_back(sentence);
      start = j;
    }
    i = j;
  }
  const auto rest = trim(line.substr(std::min(start, line.size())));
  if (!rest.empty()) out.emplace_back(rest);
}

}  // namespace

bool WordList::contains(std::string_view word) const {
  for (unsigned char c : word) {
    if (c >= 'A' && c <= 'Z') return entries_.contains(to_lower(word));
  }
  return entries_.contains(word);
}

WordList parse_word_list(std::string_view text) {
  StringSet entries;
  for_each_line(text, [&](std::string_view line) {
    line = trim(line);
    if (!line.empty()) entries.insert(to_lower(line));
  });
  if (entries.empty()) throw Error(ErrorCode::empty_word_list, "word list contains no entries");
  return WordList(std::move(entries));
}

WordList load_word_list(const std::filesystem::path& path) {
  try {
    return parse_word_list(read_file(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::empty_word_list)
      throw Error(ErrorCode::empty_word_list, path.string() + " contains no entries");
    throw;
  }
}

StringSet IngestConfig::default_abbreviations() {
  return {"Mr.",   "Mrs.", "Ms.",  "Dr.",  "Prof.",   "Sr.",  "Jr.",  "St.",  "Mt.",  "Gen.",
          "Col.",  "Capt.", "Lt.", "Sgt.", "Rev.",    "Gov.", "Sen.", "Rep.", "Inc.", "Ltd.",
          "Co.",   "Corp.", "Bros.", "vs.", "etc.",   "e.g.", "i.e.", "cf.",  "al.",  "approx.",
          "ca.",   "No.",  "Vol.", "pp.",  "Fig.",    "Jan.", "Feb.", "Mar.", "Apr.", "Jun.",
          "Jul.",  "Aug.", "Sep.", "Sept.", "Oct.",   "Nov.", "Dec."};
}

IngestConfig load_ingest_config(const std::filesystem::path& path) {
  IngestConfig config;
  const std::string text = read_file(path);
  std::size_t line_no = 0;
  for_each_line(text, [&](std::string_view line) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) return;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw Error(ErrorCode::invalid_argument,
                  path.string() + ":" + std::to_string(line_no) + ": expected key = value");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key == "abbreviations") {
      std::filesystem::path list(std::string{value});
      if (list.is_relative()) list = path.parent_path() / list;
      StringSet abbreviations;
      for_each_line(read_file(list), [&](std::string_view entry) {
        entry = trim(entry);
        if (!entry.empty() && entry.front() != '#') abbreviations.emplace(entry);
      });
      config.abbreviations = std::move(abbreviations);
    } else if (key == "heading_max_units") {
      std::size_t n = 0;
      const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), n);
      if (ec != std::errc{} || ptr != value.data() + value.size())
        throw Error(ErrorCode::invalid_argument,
                    path.string() + ":" + std::to_string(line_no) + ": heading_max_units must be an integer");
      config.heading_max_units = n;
    } else {
      throw Error(ErrorCode::invalid_argument,
                  path.string() + ":" + std::to_string(line_no) + ": unknown key '" + std::string(key) + "'");
    }
  });
  return config;
}

SentenceSplit split_sentences(std::string_view document, const IngestConfig& config) {
  SentenceSplit result;
  for_each_line(document, [&](std::string_view line) {
    line = trim(line);
    if (line.empty()) return;
    if (!ends_with_terminal(line) && count_units(line) <= config.heading_max_units) {
      ++result.headings;
      return;
    }
    split_line(line, config, result.sentences);
  });
  return result;
}

bool is_word_unit(std::string_view unit) {
  return !unit.empty() && std::all_of(unit.begin(), unit.end(),
                                      [](char c) { return is_ascii_alpha(static_cast<unsigned char>(c)); });
}

TokenizeResult tokenize_and_filter(std::string_view sentence, const WordList& word_list,
                                   std::string_view source_id) {
  std::vector<std::string> units;
  bool unknown = false;
  std::size_t i = 0;
  while (i < sentence.size()) {
    const auto c = static_cast<unsigned char>(sentence[i]);
    if (is_ascii_alpha(c)) {
      const std::size_t begin = i;
      while (i < sentence.size() && is_ascii_alpha(static_cast<unsigned char>(sentence[i]))) ++i;
      units.emplace_back(sentence.substr(begin, i - begin));
      if (!word_list.contains(units.back())) unknown = true;
    } else if (is_ascii_digit(c)) {
      return {std::nullopt, RejectReason::digit};
    } else if (c < 0x80) {
      if (is_ascii_punct(c)) units.emplace_back(1, static_cast<char>(c));
      ++i;
    } else {
      const std::size_t begin = i;
      const char32_t cp = decode_utf8(sentence, i);
      if (is_unicode_space(cp)) continue;
      if (is_unicode_punct(cp)) {
        units.emplace_back(sentence.substr(begin, i - begin));
      } else {
        unknown = true;
      }
    }
  }
  if (units.empty()) return {std::nullopt, RejectReason::heading};
  if (unknown) return {std::nullopt, RejectReason::unknown_word};
  return {SentenceTokens{std::move(units), std::string(source_id)}, RejectReason::none};
}

IngestCounters& IngestCounters::operator+=(const IngestCounters& other) {
  documents += other.documents;
  total += other.total;
  accepted += other.accepted;
  unknown_word += other.unknown_word;
  heading += other.heading;
  digit += other.digit;
  return *this;
}

std::vector<SentenceTokens> Ingestor::ingest(std::string_view document, std::string_view source_id,
                                             IngestCounters& counters) const {
  ++counters.documents;
  const SentenceSplit split = split_sentences(document, config_);
  counters.total += split.sentences.size() + split.headings;
  counters.heading += split.headings;

  std::vector<SentenceTokens> accepted;
  for (const auto& sentence : split.sentences) {
    TokenizeResult result = tokenize_and_filter(sentence, word_list_, source_id);
    switch (result.reason) {
      case RejectReason::none:
        ++counters.accepted;
        accepted.push_back(std::move(*result.tokens));
        break;
      case RejectReason::unknown_word: ++counters.unknown_word; break;
      case RejectReason::heading: ++counters.heading; break;
      case RejectReason::digit: ++counters.digit; break;
    }
  }
  return accepted;
}

}  // namespace cptrie
