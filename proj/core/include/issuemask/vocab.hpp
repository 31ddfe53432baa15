#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace issuemask {

/// Word-level vocabulary. Every lemma is one token, so "[MASK]" maps to a
/// single id and each masked occurrence yields exactly one prediction.
class Vocab {
 public:
  static constexpr std::int32_t kPad = 0;
  static constexpr std::int32_t kUnk = 1;
  static constexpr std::int32_t kCls = 2;
  static constexpr std::int32_t kSep = 3;
  static constexpr std::int32_t kMask = 4;
  static constexpr std::size_t kNumSpecial = 5;

  Vocab();

  /// Specials, then words seen at least `min_count` times ordered by count
  /// (descending) and text. `max_size` of 0 means unbounded.
  static Vocab build(const std::vector<std::vector<std::string>>& docs, std::size_t min_count = 1,
                     std::size_t max_size = 0);
  static Vocab from_tokens(std::vector<std::string> tokens);

  std::int32_t id(std::string_view token) const;
  const std::string& token(std::int32_t id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  /// [CLS] followed by the first max_length - 1 tokens.
  std::vector<std::int32_t> encode(const std::vector<std::string>& tokens, std::size_t max_length) const;

  std::string digest() const;
  void save(const std::filesystem::path& path) const;
  static Vocab load(const std::filesystem::path& path);

  friend bool operator==(const Vocab& a, const Vocab& b) { return a.tokens_ == b.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::int32_t> index_;
};

}  // namespace issuemask
