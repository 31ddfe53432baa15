#include "issuemask/stopwords.hpp"

#include <fstream>
#include <sstream>

#include "issuemask/common.hpp"
#include "issuemask/corpus.hpp"
#include "issuemask/hashing.hpp"

namespace issuemask {
namespace detail {
extern const std::string_view kStopwordsEnV1;
}

StopWords StopWords::parse(std::string_view text, std::string version) {
  StopWords list;
  list.version_ = std::move(version);
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto begin = line.find_first_not_of(" \t\r");
    if (begin == std::string::npos) continue;
    const auto end = line.find_last_not_of(" \t\r");
    list.words_.insert(lowercase(std::string_view(line).substr(begin, end - begin + 1)));
  }
  return list;
}

const StopWords& StopWords::english_v1() {
  static const StopWords list = parse(detail::kStopwordsEnV1, "stopwords-en-v1");
  return list;
}

StopWords StopWords::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DependencyError("stop-word list not readable: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.stem().string());
}

std::string StopWords::digest() const {
  Sha256 hasher;
  for (const auto& word : words_) {
    hasher.update(word);
    hasher.update("\n");
  }
  return hasher.hex_digest();
}

}  // namespace issuemask
