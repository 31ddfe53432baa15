#include "issuemask/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "issuemask/common.hpp"
#include "issuemask/hashing.hpp"

namespace issuemask {

namespace {
const std::vector<std::string> kSpecials = {"[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"};
}

Vocab::Vocab() {
  for (const auto& t : kSpecials) {
    index_.emplace(t, static_cast<std::int32_t>(tokens_.size()));
    tokens_.push_back(t);
  }
}

Vocab Vocab::from_tokens(std::vector<std::string> tokens) {
  Vocab v;
  v.tokens_.clear();
  v.index_.clear();
  if (tokens.size() < kNumSpecial || !std::equal(kSpecials.begin(), kSpecials.end(), tokens.begin())) {
    std::vector<std::string> with_specials = kSpecials;
    for (auto& t : tokens) with_specials.push_back(std::move(t));
    tokens = std::move(with_specials);
  }
  for (auto& t : tokens) {
    if (v.index_.contains(t)) throw ValidationError("vocab", "duplicate token '" + t + "'");
    v.index_.emplace(t, static_cast<std::int32_t>(v.tokens_.size()));
    v.tokens_.push_back(std::move(t));
  }
  return v;
}

Vocab Vocab::build(const std::vector<std::vector<std::string>>& docs, std::size_t min_count, std::size_t max_size) {
  std::map<std::string, std::size_t> counts;
  for (const auto& doc : docs) {
    for (const auto& t : doc) {
      if (t != kSpecials[kMask]) ++counts[t];
    }
  }
  std::vector<std::pair<std::string, std::size_t>> ordered(counts.begin(), counts.end());
  std::stable_sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> words;
  for (auto& [word, count] : ordered) {
    if (count < min_count) continue;
    if (max_size != 0 && words.size() + kNumSpecial >= max_size) break;
    words.push_back(word);
  }
  return from_tokens(std::move(words));
}

std::int32_t Vocab::id(std::string_view token) const {
  const auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnk : it->second;
}

std::vector<std::int32_t> Vocab::encode(const std::vector<std::string>& tokens, std::size_t max_length) const {
  std::vector<std::int32_t> ids;
  ids.reserve(std::min(tokens.size() + 1, max_length));
  ids.push_back(kCls);
  for (const auto& t : tokens) {
    if (ids.size() >= max_length) break;
    ids.push_back(id(t));
  }
  return ids;
}

std::string Vocab::digest() const {
  Sha256 h;
  for (const auto& t : tokens_) h.update(t).update("\n");
  return h.hex_digest();
}

void Vocab::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& t : tokens_) out << t << '\n';
  if (!out) throw Error("failed writing " + path.string());
}

Vocab Vocab::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DependencyError("cannot open " + path.string());
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) tokens.push_back(line);
  if (tokens.size() < kNumSpecial || !std::equal(kSpecials.begin(), kSpecials.end(), tokens.begin())) {
    throw ValidationError(path.string(), "vocabulary must start with the special tokens");
  }
  return from_tokens(std::move(tokens));
}

}  // namespace issuemask
