#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cptrie {

enum class ErrorCode {
  io,
  invalid_argument,
  empty_word_list,
  empty_corpus,
  malformed_trie,
  schema,
  not_sorted,
  mass_mismatch,
  duplicate_id,
  entropy_out_of_range,
  missing_record,
  empty_input,
  zero_variance,
  rank_overflow,
  degenerate_zipf,
  uncovered_support,
};

// Maps onto the CLI exit codes: usage = 2, data = 3, protocol = 4.
enum class ErrorCategory { usage, data, protocol };

constexpr ErrorCategory category_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument:
      return ErrorCategory::usage;
    case ErrorCode::rank_overflow:
    case ErrorCode::degenerate_zipf:
    case ErrorCode::uncovered_support:
      return ErrorCategory::protocol;
    default:
      return ErrorCategory::data;
  }
}

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), message_(message) {}

  ErrorCode code() const noexcept { return code_; }
  ErrorCategory category() const noexcept { return category_of(code_); }
  // The message without the error-code prefix, for re-wrapping with context.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

}  // namespace cptrie
