#include "issuemask/structure.hpp"

#include <cctype>

namespace issuemask {
namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v'; }
bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

bool starts_with_ci(std::string_view text, std::size_t pos, std::string_view prefix) {
  if (pos + prefix.size() > text.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(text[pos + i])) != prefix[i]) return false;
  }
  return true;
}

std::size_t leading_spaces(std::string_view line) {
  std::size_t i = 0;
  while (i < line.size() && is_space(line[i])) ++i;
  return i;
}

std::string_view trim_view(std::string_view s) {
  const auto begin = s.find_first_not_of(" \t\r\f\v");
  if (begin == std::string_view::npos) return {};
  return s.substr(begin, s.find_last_not_of(" \t\r\f\v") - begin + 1);
}

struct Fence {
  char ch = 0;
  std::size_t length = 0;
};

// Opening (or closing) code fence: up to three spaces, then 3+ backticks or tildes.
Fence fence_marker(std::string_view line) {
  const std::size_t indent = leading_spaces(line);
  if (indent > 3 || indent >= line.size()) return {};
  const char ch = line[indent];
  if (ch != '`' && ch != '~') return {};
  std::size_t n = 0;
  while (indent + n < line.size() && line[indent + n] == ch) ++n;
  return n >= 3 ? Fence{ch, n} : Fence{};
}

// ---- block-level markers -------------------------------------------------

bool is_rule_line(std::string_view line) {
  const auto t = trim_view(line);
  if (t.empty()) return false;
  const char ch = t[0];
  if (ch != '-' && ch != '=' && ch != '*' && ch != '_') return false;
  std::size_t count = 0;
  for (char c : t) {
    if (c == ch) {
      ++count;
    } else if (!is_space(c)) {
      return false;
    }
  }
  return count >= 3 || (ch == '=' && count >= 1) || (ch == '-' && count >= 2);
}

bool is_table_separator(std::string_view line) {
  const auto t = trim_view(line);
  if (t.empty()) return false;
  std::size_t dashes = 0;
  bool pipe = false;
  for (char c : t) {
    if (c == '-') {
      ++dashes;
    } else if (c == '|') {
      pipe = true;
    } else if (c != ':' && !is_space(c)) {
      return false;
    }
  }
  return dashes >= 1 && pipe;
}

bool is_reference_definition(std::string_view line) {
  const auto t = trim_view(line);
  if (t.size() < 5 || t[0] != '[') return false;
  const auto close = t.find("]:");
  return close != std::string_view::npos && close > 1 && close + 2 < t.size();
}

// Removes "- ", "* ", "+ ", "1. ", "1) " and a following "[ ]"/"[x]" checkbox.
std::string_view strip_list_marker(std::string_view line) {
  std::size_t i = leading_spaces(line);
  std::size_t j = i;
  if (j < line.size() && (line[j] == '-' || line[j] == '*' || line[j] == '+')) {
    ++j;
  } else {
    while (j < line.size() && is_digit(line[j])) ++j;
    if (j == i || j - i > 9 || j >= line.size() || (line[j] != '.' && line[j] != ')')) j = i;
    else ++j;
  }
  if (j > i && (j == line.size() || is_space(line[j]))) {
    i = j;
    while (i < line.size() && is_space(line[i])) ++i;
  }
  const auto rest = line.substr(i);
  if (rest.size() >= 3 && rest[0] == '[' && (rest[1] == ' ' || rest[1] == 'x' || rest[1] == 'X') && rest[2] == ']' &&
      (rest.size() == 3 || is_space(rest[3]))) {
    return trim_view(rest.substr(3)).empty() ? std::string_view{} : rest.substr(4);
  }
  return rest.size() == line.size() ? line : rest;
}

std::string strip_block_markers(std::string_view line) {
  if (is_rule_line(line) || is_table_separator(line) || is_reference_definition(line)) return {};
  // Blockquotes, possibly nested.
  std::size_t i = leading_spaces(line);
  bool quoted = false;
  while (i < line.size() && line[i] == '>') {
    quoted = true;
    ++i;
    while (i < line.size() && is_space(line[i])) ++i;
  }
  if (quoted) line = line.substr(i);

  // ATX heading.
  i = leading_spaces(line);
  if (i <= 3 && i < line.size() && line[i] == '#') {
    std::size_t n = 0;
    while (i + n < line.size() && line[i + n] == '#') ++n;
    if (n <= 6 && (i + n == line.size() || is_space(line[i + n]))) {
      line = trim_view(line.substr(i + n));
      // Optional closing sequence.
      auto end = line.size();
      while (end > 0 && line[end - 1] == '#') --end;
      if (end < line.size() && (end == 0 || is_space(line[end - 1]))) line = trim_view(line.substr(0, end));
      return std::string(line);
    }
  }
  return std::string(strip_list_marker(line));
}

// ---- inline constructs ---------------------------------------------------

// Index of the bracket closing the one at `open`, or npos.
std::size_t match_bracket(std::string_view s, std::size_t open, char lhs, char rhs) {
  int depth = 0;
  for (std::size_t i = open; i < s.size(); ++i) {
    if (s[i] == '\\') {
      ++i;
      continue;
    }
    if (s[i] == lhs) ++depth;
    if (s[i] == rhs && --depth == 0) return i;
  }
  return std::string_view::npos;
}

// [text](target) → text, ![alt](target) → "", [text][ref] → text.
std::string rewrite_links(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const bool image = s[i] == '!' && i + 1 < s.size() && s[i + 1] == '[';
    if (s[i] == '[' || image) {
      const std::size_t open = image ? i + 1 : i;
      const std::size_t close = match_bracket(s, open, '[', ']');
      if (close != std::string_view::npos && close + 1 < s.size() && (s[close + 1] == '(' || s[close + 1] == '[')) {
        const char lhs = s[close + 1];
        const std::size_t end = match_bracket(s, close + 1, lhs, lhs == '(' ? ')' : ']');
        if (end != std::string_view::npos) {
          if (!image) out += rewrite_links(s.substr(open + 1, close - open - 1));
          i = end + 1;
          continue;
        }
      }
    }
    out.push_back(s[i]);
    ++i;
  }
  return out;
}

bool url_start(std::string_view s, std::size_t i) {
  if (i > 0 && (is_alnum(s[i - 1]) || s[i - 1] == '/' || s[i - 1] == '.')) return false;
  for (std::string_view scheme : {"https://", "http://", "ftp://", "file://", "www."}) {
    if (starts_with_ci(s, i, scheme)) return true;
  }
  return false;
}

std::string strip_html(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] == '<') {
      const std::size_t close = s.find('>', i + 1);
      const std::size_t next_open = s.find('<', i + 1);
      if (close != std::string_view::npos && (next_open == std::string_view::npos || next_open > close)) {
        const auto inner = s.substr(i + 1, close - i - 1);
        if (url_start(inner, 0) || starts_with_ci(inner, 0, "mailto:")) {
          out += ' ';
          out += inner;
          out += ' ';
          i = close + 1;
          continue;
        }
        const bool tag = !inner.empty() && (is_alpha(inner[0]) || inner[0] == '!' || inner[0] == '?' ||
                                            (inner[0] == '/' && inner.size() > 1 && is_alpha(inner[1])));
        if (tag) {
          out += ' ';
          i = close + 1;
          continue;
        }
      }
    }
    out.push_back(s[i]);
    ++i;
  }
  return out;
}

void append_utf8(std::string& out, unsigned long cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x110000) {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::string decode_entities(std::string_view s) {
  static constexpr std::pair<std::string_view, std::string_view> kNamed[] = {
      {"amp", "&"}, {"lt", "<"}, {"gt", ">"}, {"quot", "\""}, {"apos", "'"}, {"nbsp", " "}};
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '&') {
      const auto semi = s.find(';', i + 1);
      if (semi != std::string_view::npos && semi - i <= 10) {
        const auto name = s.substr(i + 1, semi - i - 1);
        bool done = false;
        for (const auto& [key, value] : kNamed) {
          if (name == key) {
            out += value;
            done = true;
            break;
          }
        }
        if (!done && name.size() >= 2 && name[0] == '#') {
          const bool hex = name[1] == 'x' || name[1] == 'X';
          const auto digits = name.substr(hex ? 2 : 1);
          if (!digits.empty()) {
            try {
              append_utf8(out, std::stoul(std::string(digits), nullptr, hex ? 16 : 10));
              done = true;
            } catch (const std::exception&) {
            }
          }
        }
        if (done) {
          i = semi;
          continue;
        }
      }
    }
    out.push_back(s[i]);
  }
  return out;
}

std::string replace_urls(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    if (url_start(s, i)) {
      std::size_t end = i;
      int parens = 0;
      while (end < s.size() && !is_space(s[end]) && s[end] != '<' && s[end] != '>' && s[end] != '"' &&
             s[end] != '`' && s[end] != '\'') {
        if (s[end] == '(') ++parens;
        if (s[end] == ')' && --parens < 0) break;
        ++end;
      }
      while (end > i && std::string_view(".,;:!?]}").find(s[end - 1]) != std::string_view::npos) --end;
      bool first = true;
      for (const auto& word : url_words(s.substr(i, end - i))) {
        if (!first) out += ' ';
        out += word;
        first = false;
      }
      i = end;
      continue;
    }
    out.push_back(s[i]);
    ++i;
  }
  return out;
}

// `code` → code; unmatched backticks are dropped.
std::string strip_inline_code(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] == '`') {
      std::size_t n = 0;
      while (i + n < s.size() && s[i + n] == '`') ++n;
      const std::string ticks(n, '`');
      std::size_t close = s.find(ticks, i + n);
      while (close != std::string_view::npos && close + n < s.size() && s[close + n] == '`') {
        close = s.find(ticks, close + n + 1);
      }
      if (close != std::string_view::npos) {
        out += s.substr(i + n, close - i - n);
        i = close + n;
      } else {
        i += n;
      }
      continue;
    }
    out.push_back(s[i]);
    ++i;
  }
  return out;
}

std::string strip_emphasis(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    const bool prev_space = i == 0 || is_space(s[i - 1]);
    const bool next_space = i + 1 >= s.size() || is_space(s[i + 1]);
    if (c == '*' || c == '~') {
      if (i + 1 < s.size() && s[i + 1] == c) {
        ++i;
        continue;
      }
      if (c == '*' && !(prev_space && next_space)) continue;
    } else if (c == '_') {
      if (i + 1 < s.size() && s[i + 1] == '_' && (prev_space || i + 2 >= s.size() || !is_alnum(s[i + 2]))) {
        ++i;
        continue;
      }
      const bool prev_word = i > 0 && is_alnum(s[i - 1]);
      const bool next_word = i + 1 < s.size() && is_alnum(s[i + 1]);
      if (prev_word != next_word) continue;
    }
    out.push_back(c);
  }
  return out;
}

std::string drop_paths(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    if (is_space(s[i])) {
      out.push_back(s[i++]);
      continue;
    }
    std::size_t end = i;
    while (end < s.size() && !is_space(s[end])) ++end;
    auto token = s.substr(i, end - i);
    auto core = token;
    while (!core.empty() && std::string_view("\"'([{<").find(core.front()) != std::string_view::npos) {
      core.remove_prefix(1);
    }
    while (!core.empty() && std::string_view("\"')]}>.,;:!?").find(core.back()) != std::string_view::npos) {
      core.remove_suffix(1);
    }
    if (!is_filesystem_path(core)) out += token;
    i = end;
  }
  return out;
}

std::string strip_inline(std::string_view line) {
  std::string s = strip_block_markers(line);
  s = rewrite_links(s);
  s = strip_html(s);
  s = decode_entities(s);
  s = replace_urls(s);
  s = strip_inline_code(s);
  s = strip_emphasis(s);
  s = drop_paths(s);
  return s;
}

}  // namespace

bool is_hex_like(std::string_view token) {
  if (token.size() < 6) return false;
  bool digit = false;
  for (char c : token) {
    const char lc = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (is_digit(lc)) {
      digit = true;
    } else if (lc < 'a' || lc > 'f') {
      return false;
    }
  }
  return digit;
}

bool is_filesystem_path(std::string_view t) {
  if (t.size() < 2 || t.find("://") != std::string_view::npos) return false;
  auto has_alnum = [](std::string_view s) {
    for (char c : s) {
      if (is_alnum(c)) return true;
    }
    return false;
  };
  if (!has_alnum(t)) return false;
  if (t[0] == '/' || t.starts_with("~/") || t.starts_with("./") || t.starts_with("../")) return true;
  if (t.size() >= 3 && is_alpha(t[0]) && t[1] == ':' && (t[2] == '\\' || t[2] == '/')) return true;
  std::size_t slashes = 0;
  std::size_t backslashes = 0;
  for (char c : t) {
    slashes += c == '/';
    backslashes += c == '\\';
  }
  if (backslashes >= 1 && t.find('\\') > 0 && t.find('\\') + 1 < t.size()) return true;
  if (slashes >= 2) {
    // Every segment nonempty, e.g. src/main/java; excludes ratios like 1//2.
    return t.find("//") == std::string_view::npos && t.back() != '/';
  }
  if (slashes == 1) {
    const auto last = t.substr(t.find('/') + 1);
    const auto dot = last.rfind('.');
    if (dot == std::string_view::npos || dot == 0) return t.back() == '/' && t.size() > 1;
    const auto ext = last.substr(dot + 1);
    if (ext.empty() || ext.size() > 5) return false;
    for (char c : ext) {
      if (!is_alnum(c)) return false;
    }
    return true;
  }
  return false;
}

std::vector<std::string> url_words(std::string_view url) {
  if (const auto scheme = url.find("://"); scheme != std::string_view::npos) url.remove_prefix(scheme + 3);
  const auto host_end = url.find_first_of("/?#");
  if (host_end == std::string_view::npos) return {};
  url.remove_prefix(host_end);
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < url.size()) {
    if (!is_alnum(url[i])) {
      ++i;
      continue;
    }
    std::size_t end = i;
    while (end < url.size() && is_alnum(url[end])) ++end;
    const auto segment = url.substr(i, end - i);
    bool alphabetic = true;
    for (char c : segment) alphabetic = alphabetic && is_alpha(c);
    if (alphabetic && segment.size() >= 2 && !is_hex_like(segment)) words.emplace_back(segment);
    i = end;
  }
  return words;
}

std::vector<std::string> strip_structure_lines(std::string_view raw) {
  std::vector<std::string> lines;
  Fence fence;
  bool in_comment = false;
  std::size_t start = 0;
  while (start <= raw.size()) {
    auto nl = raw.find('\n', start);
    if (nl == std::string_view::npos) nl = raw.size();
    std::string_view line = raw.substr(start, nl - start);
    start = nl + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    if (fence.ch != 0) {
      lines.emplace_back(line);
      const auto closing = fence_marker(line);
      if (closing.ch == fence.ch && closing.length >= fence.length &&
          trim_view(line).find_first_not_of(fence.ch) == std::string_view::npos) {
        fence = {};
      }
      continue;
    }

    // HTML comments, possibly spanning lines.
    std::string text;
    std::size_t i = 0;
    while (i < line.size()) {
      if (in_comment) {
        const auto close = line.find("-->", i);
        if (close == std::string_view::npos) {
          i = line.size();
        } else {
          in_comment = false;
          i = close + 3;
        }
        continue;
      }
      const auto open = line.find("<!--", i);
      if (open == std::string_view::npos) {
        text += line.substr(i);
        break;
      }
      text += line.substr(i, open - i);
      in_comment = true;
      i = open + 4;
    }

    if (const auto opening = fence_marker(text); opening.ch != 0) {
      fence = opening;
      lines.push_back(std::move(text));
      continue;
    }
    lines.push_back(strip_inline(text));
    if (start > raw.size()) break;
  }
  return lines;
}

std::string strip_structure(std::string_view raw) {
  std::string out;
  for (const auto& line : strip_structure_lines(raw)) {
    for (char c : line) {
      if (is_space(c)) {
        if (!out.empty() && out.back() != ' ') out.push_back(' ');
      } else {
        out.push_back(c);
      }
    }
    if (!out.empty() && out.back() != ' ') out.push_back(' ');
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

}  // namespace issuemask
