#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace issuemask {

/// length >= 6, only [0-9a-f] (case-insensitive), at least one digit.
bool is_hex_like(std::string_view token);

/// Absolute, home-relative, dot-relative, drive-letter, multi-segment, or file-with-extension paths.
bool is_filesystem_path(std::string_view token);

/// Alphabetic path words kept from a URL; scheme, host, and hex-like or digit-bearing segments are dropped.
std::vector<std::string> url_words(std::string_view url);

/// Markdown/HTML clean-up that keeps the line structure, so fenced code blocks
/// (left in place, fences included) can still be recognised downstream.
std::vector<std::string> strip_structure_lines(std::string_view raw);

/// Same clean-up flattened to one line: surviving non-empty lines joined with a
/// single space, whitespace runs collapsed, ends trimmed.
std::string strip_structure(std::string_view raw);

}  // namespace issuemask
