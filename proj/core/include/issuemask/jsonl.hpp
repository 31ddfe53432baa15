#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <string>

#include <nlohmann/json.hpp>

#include "issuemask/common.hpp"

namespace issuemask {

/// Calls `fn(record, line_number)` for each non-blank line. Parse errors carry file:line.
inline void for_each_jsonl(const std::filesystem::path& path,
                           const std::function<void(const nlohmann::json&, std::size_t)>& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DependencyError("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no), e.what());
    }
    try {
      fn(record, line_no);
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no), e.what());
    }
  }
}

class JsonlWriter {
 public:
  explicit JsonlWriter(const std::filesystem::path& path)
      : out_(path, std::ios::binary | std::ios::trunc), path_(path) {
    if (!out_) throw Error("cannot write " + path.string());
  }
  void write(const nlohmann::json& record) { out_ << record.dump() << '\n'; }
  void close() {
    out_.close();
    if (out_.fail()) throw Error("failed writing " + path_.string());
  }

 private:
  std::ofstream out_;
  std::filesystem::path path_;
};

/// Rejects records whose key set differs from `expected` (order-insensitive).
inline void require_exact_keys(const nlohmann::json& record, std::initializer_list<const char*> expected,
                               const std::string& where) {
  if (!record.is_object()) throw ValidationError(where, "expected a JSON object");
  for (const char* key : expected) {
    if (!record.contains(key)) throw ValidationError(where, std::string("missing field '") + key + "'");
  }
  if (record.size() != expected.size()) {
    for (const auto& [key, _] : record.items()) {
      bool known = false;
      for (const char* e : expected) known = known || key == e;
      if (!known) throw ValidationError(where, "unexpected field '" + key + "'");
    }
  }
}

}  // namespace issuemask
