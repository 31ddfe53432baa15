#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "issuemask/stopwords.hpp"

namespace issuemask {

struct NormToken {
  std::string text;
  // Punctuation, a dropped token, or a line boundary preceded this token.
  bool break_before = false;

  friend bool operator==(const NormToken&, const NormToken&) = default;
};

/// Lowercase [a-z] tokens with internal hyphens. Punctuation splits tokens,
/// apostrophes are deleted, and digit-bearing, non-ASCII, or single-character
/// fragments are dropped.
std::vector<NormToken> normalize_tokens(std::string_view text);

/// normalize_tokens joined by single spaces.
std::string normalize(std::string_view text);

struct NlFilterConfig {
  double max_symbol_density = 0.30;  // a line is dropped when its density is above this
  double max_code_density = 0.30;    // ... or when its code-token share reaches this
  std::size_t min_code_tokens = 2;   // unless every counted token is code
  bool drop_fenced_blocks = true;
  bool match_trace_patterns = true;
};

/// Share of non-space characters that are digits or non-sentence symbols.
double symbol_density(std::string_view line);

struct CodeShare {
  std::size_t code = 0;
  std::size_t counted = 0;  // non-stop-word tokens
  double density() const { return counted == 0 ? 0.0 : static_cast<double>(code) / static_cast<double>(counted); }
};

CodeShare code_share(std::string_view line, const StopWords& stopwords);

/// Share of non-stop-word tokens that look like identifiers or runtime jargon
/// (camelCase, snake_case, dotted names, call syntax, java/lang/...Exception).
double code_density(std::string_view line, const StopWords& stopwords);

/// Stack frames, tracebacks, timestamps, log-level prefixes, shell prompts.
bool looks_like_trace_or_log(std::string_view line);

bool is_code_or_log_line(std::string_view line, const NlFilterConfig& config, const StopWords& stopwords);

/// Line-level filter: drops fenced blocks (fences included) and lines classified as code or logs.
std::vector<std::string> filter_lines(const std::vector<std::string>& lines, const NlFilterConfig& config,
                                      const StopWords& stopwords);

/// Same over newline-separated text; surviving lines are rejoined with '\n'.
std::string filter_non_natural_language(std::string_view text, const NlFilterConfig& config = {},
                                        const StopWords& stopwords = StopWords::english_v1());

}  // namespace issuemask
