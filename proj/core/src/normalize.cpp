#include "issuemask/normalize.hpp"

#include <array>
#include <cctype>

namespace issuemask {
namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v'; }
bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }
bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
bool is_lower(char c) { return c >= 'a' && c <= 'z'; }
bool is_ascii(char c) { return static_cast<unsigned char>(c) < 0x80; }

std::string_view trim_view(std::string_view s) {
  const auto begin = s.find_first_not_of(" \t\r\f\v");
  if (begin == std::string_view::npos) return {};
  return s.substr(begin, s.find_last_not_of(" \t\r\f\v") - begin + 1);
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (true) {
    const auto nl = text.find('\n', start);
    lines.push_back(text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start));
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  return lines;
}

// Typographic quotes become ASCII apostrophes so "don’t" and "don't" agree.
std::string fold_quotes(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i + 2 < s.size() && static_cast<unsigned char>(s[i]) == 0xE2 && static_cast<unsigned char>(s[i + 1]) == 0x80 &&
        (static_cast<unsigned char>(s[i + 2]) == 0x98 || static_cast<unsigned char>(s[i + 2]) == 0x99)) {
      out.push_back('\'');
      i += 2;
    } else {
      out.push_back(s[i]);
    }
  }
  return out;
}

void emit_segment(std::string_view segment, bool& pending_break, std::vector<NormToken>& out) {
  std::string word;
  for (char c : segment) {
    if (c == '\'') continue;
    if (is_digit(c) || !is_ascii(c)) {
      pending_break = true;
      return;
    }
    word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  // Runs of two or more hyphens separate words; single inner hyphens stay.
  std::size_t i = 0;
  while (i < word.size()) {
    while (i < word.size() && word[i] == '-') ++i;
    std::size_t end = i;
    while (end < word.size() && !(word[end] == '-' && (end + 1 >= word.size() || word[end + 1] == '-'))) ++end;
    if (end > i) {
      const auto part = word.substr(i, end - i);
      if (part.size() < 2) {
        pending_break = true;
      } else {
        out.push_back({part, pending_break});
        pending_break = false;
      }
    }
    if (end < word.size()) pending_break = true;
    i = end;
  }
}

struct Fence {
  char ch = 0;
  std::size_t length = 0;
};

Fence fence_marker(std::string_view line) {
  std::size_t indent = 0;
  while (indent < line.size() && is_space(line[indent])) ++indent;
  if (indent > 3 || indent >= line.size()) return {};
  const char ch = line[indent];
  if (ch != '`' && ch != '~') return {};
  std::size_t n = 0;
  while (indent + n < line.size() && line[indent + n] == ch) ++n;
  return n >= 3 ? Fence{ch, n} : Fence{};
}

constexpr std::array<std::string_view, 15> kCodeLexicon = {
    "java",  "javax", "lang",   "util",   "std",  "nullptr", "println", "printf",
    "stdout", "stderr", "argv", "kwargs", "args", "sizeof",  "typeof"};

std::string letters_lower(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (is_alpha(c)) out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

bool ends_with_word(const std::string& w, std::string_view suffix, std::size_t min_total) {
  return w.size() >= min_total && w.ends_with(suffix);
}

bool is_code_word(const std::string& w) {
  for (auto entry : kCodeLexicon) {
    if (w == entry) return true;
  }
  // FooException, IOError, TypeError and their plurals.
  if (ends_with_word(w, "exception", 12) || ends_with_word(w, "exceptions", 13)) return true;
  if (ends_with_word(w, "error", 9) || ends_with_word(w, "errors", 10)) return true;
  return false;
}

bool is_code_token(std::string_view raw) {
  auto core = raw;
  while (!core.empty() && std::string_view("\"'([{<").find(core.front()) != std::string_view::npos) core.remove_prefix(1);
  while (!core.empty() && std::string_view("\"')]}>,.;:!?").find(core.back()) != std::string_view::npos) {
    core.remove_suffix(1);
  }
  if (core.empty()) return false;
  for (std::string_view op : {"->", "::", "=>", "==", "!=", "&&", "||", "()", "{", "}", ";", "="}) {
    if (core.find(op) != std::string_view::npos) return true;
  }
  for (std::size_t i = 1; i < core.size(); ++i) {
    const char prev = core[i - 1];
    const char c = core[i];
    if (is_lower(prev) && is_upper(c)) return true;  // camelCase
    if ((c == '_' || c == '.') && is_alnum(prev) && i + 1 < core.size() && is_alpha(core[i + 1])) {
      // snake_case, dotted.names; "e.g" and "i.e" are prose.
      if (c == '.' && core.size() <= 4) continue;
      return true;
    }
    if (c == '(' && is_alnum(prev)) return true;
  }
  return is_code_word(letters_lower(core));
}

bool starts_with_digits_pattern(std::string_view s, std::string_view pattern) {
  // pattern: 'd' digit, anything else literal, '?' any of "T " separators
  if (s.size() < pattern.size()) return false;
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    const char p = pattern[i];
    if (p == 'd') {
      if (!is_digit(s[i])) return false;
    } else if (p == '?') {
      if (s[i] != 'T' && s[i] != ' ') return false;
    } else if (s[i] != p) {
      return false;
    }
  }
  return true;
}

}  // namespace

std::vector<NormToken> normalize_tokens(std::string_view text) {
  std::vector<NormToken> out;
  const std::string folded = fold_quotes(text);
  bool pending_break = true;
  for (auto line : split_lines(folded)) {
    pending_break = true;
    std::size_t i = 0;
    while (i < line.size()) {
      const char c = line[i];
      if (is_space(c)) {
        ++i;
        continue;
      }
      if (is_ascii(c) && !is_alnum(c) && c != '-' && c != '\'') {
        pending_break = true;
        ++i;
        continue;
      }
      std::size_t end = i;
      while (end < line.size() && !is_space(line[end]) &&
             !(is_ascii(line[end]) && !is_alnum(line[end]) && line[end] != '-' && line[end] != '\'')) {
        ++end;
      }
      emit_segment(line.substr(i, end - i), pending_break, out);
      i = end;
    }
  }
  return out;
}

std::string normalize(std::string_view text) {
  std::string out;
  for (const auto& token : normalize_tokens(text)) {
    if (!out.empty()) out.push_back(' ');
    out += token.text;
  }
  return out;
}

double symbol_density(std::string_view line) {
  std::size_t total = 0;
  std::size_t symbols = 0;
  for (char c : line) {
    if (is_space(c)) continue;
    ++total;
    if (is_digit(c)) {
      ++symbols;
    } else if (is_ascii(c) && !is_alpha(c) && std::string_view(".,!?'\"-").find(c) == std::string_view::npos) {
      ++symbols;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(symbols) / static_cast<double>(total);
}

CodeShare code_share(std::string_view line, const StopWords& stopwords) {
  CodeShare share;
  std::size_t i = 0;
  while (i < line.size()) {
    if (is_space(line[i])) {
      ++i;
      continue;
    }
    std::size_t end = i;
    while (end < line.size() && !is_space(line[end])) ++end;
    const auto raw = line.substr(i, end - i);
    i = end;
    const auto word = letters_lower(raw);
    if (word.empty() || stopwords.contains(word)) continue;
    ++share.counted;
    if (is_code_token(raw)) ++share.code;
  }
  return share;
}

double code_density(std::string_view line, const StopWords& stopwords) {
  return code_share(line, stopwords).density();
}

bool looks_like_trace_or_log(std::string_view line) {
  const auto t = trim_view(line);
  if (t.empty()) return false;
  if (t.starts_with("at ")) {
    const auto paren = t.find('(');
    const auto dot = t.find('.');
    if (paren != std::string_view::npos && dot != std::string_view::npos && dot < paren) return true;
  }
  if (t.starts_with("File \"") && t.find("\", line ") != std::string_view::npos) return true;
  if (t.starts_with("Traceback (most recent call last)")) return true;
  if (t.starts_with("Caused by:") || t.find("Exception in thread") != std::string_view::npos) return true;
  if (t.starts_with("panic: ") || t.starts_with("goroutine ") || t.find("panicked at") != std::string_view::npos) {
    return true;
  }
  if (t.starts_with("$ ") || t.starts_with("PS ") || t.starts_with("C:\\>")) return true;
  if (t.size() >= 3 && std::string_view("VDIWEF").find(t[0]) != std::string_view::npos && t[1] == '/' &&
      is_alpha(t[2])) {
    return true;
  }

  auto rest = t;
  if (!rest.empty() && rest.front() == '[') rest.remove_prefix(1);
  for (std::string_view level : {"INFO", "WARN", "WARNING", "ERROR", "DEBUG", "TRACE", "FATAL", "SEVERE", "CRITICAL",
                                 "NOTICE"}) {
    if (rest.starts_with(level) &&
        (rest.size() == level.size() || std::string_view("]: |").find(rest[level.size()]) != std::string_view::npos)) {
      return true;
    }
  }
  if (starts_with_digits_pattern(rest, "dd:dd:dd")) return true;
  for (std::size_t i = 0; i + 16 <= t.size(); ++i) {
    if (is_digit(t[i]) && starts_with_digits_pattern(t.substr(i), "dddd-dd-dd?dd:dd")) return true;
  }
  return false;
}

bool is_code_or_log_line(std::string_view line, const NlFilterConfig& config, const StopWords& stopwords) {
  if (trim_view(line).empty()) return false;
  if (symbol_density(line) > config.max_symbol_density) return true;
  if (config.match_trace_patterns && looks_like_trace_or_log(line)) return true;
  const auto share = code_share(line, stopwords);
  // A single identifier in a short sentence is still prose.
  return share.density() >= config.max_code_density &&
         (share.code >= config.min_code_tokens || share.code == share.counted);
}

std::vector<std::string> filter_lines(const std::vector<std::string>& lines, const NlFilterConfig& config,
                                      const StopWords& stopwords) {
  std::vector<std::string> kept;
  Fence fence;
  for (const auto& line : lines) {
    if (fence.ch != 0) {
      const auto closing = fence_marker(line);
      if (closing.ch == fence.ch && closing.length >= fence.length &&
          trim_view(line).find_first_not_of(fence.ch) == std::string_view::npos) {
        fence = {};
      }
      if (config.drop_fenced_blocks) continue;
      kept.push_back(line);
      continue;
    }
    if (const auto opening = fence_marker(line); opening.ch != 0) {
      fence = opening;
      continue;
    }
    if (!is_code_or_log_line(line, config, stopwords)) kept.push_back(line);
  }
  return kept;
}

std::string filter_non_natural_language(std::string_view text, const NlFilterConfig& config,
                                        const StopWords& stopwords) {
  std::vector<std::string> lines;
  for (auto line : split_lines(text)) lines.emplace_back(line);
  std::string out;
  for (const auto& line : filter_lines(lines, config, stopwords)) {
    if (trim_view(line).empty()) continue;
    if (!out.empty()) out.push_back('\n');
    out += line;
  }
  return out;
}

}  // namespace issuemask
