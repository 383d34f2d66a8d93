#include "cptrie/error.hpp"

namespace cptrie {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::io: return "IoError";
    case ErrorCode::invalid_argument: return "InvalidArgument";
    case ErrorCode::empty_word_list: return "EmptyWordList";
    case ErrorCode::empty_corpus: return "EmptyCorpus";
    case ErrorCode::malformed_trie: return "MalformedTrie";
    case ErrorCode::schema: return "SchemaViolation";
    case ErrorCode::not_sorted: return "NotSorted";
    case ErrorCode::mass_mismatch: return "MassMismatch";
    case ErrorCode::duplicate_id: return "DuplicatePrefixId";
    case ErrorCode::entropy_out_of_range: return "EntropyOutOfRange";
    case ErrorCode::missing_record: return "MissingRecord";
    case ErrorCode::empty_input: return "EmptyInput";
    case ErrorCode::zero_variance: return "ZeroVariance";
    case ErrorCode::rank_overflow: return "RankOverflow";
    case ErrorCode::degenerate_zipf: return "DegenerateZipf";
    case ErrorCode::uncovered_support: return "UncoveredSupport";
  }
  return "Error";
}

}  // namespace cptrie
