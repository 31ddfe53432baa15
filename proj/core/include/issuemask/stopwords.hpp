#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <string_view>

namespace issuemask {

class StopWords {
 public:
  StopWords() = default;

  /// The versioned English list compiled into the library (data/stopwords-en-v1.txt).
  static const StopWords& english_v1();
  /// One word per line, '#' comments. The version tag is the file stem.
  static StopWords load(const std::filesystem::path& path);
  static StopWords parse(std::string_view text, std::string version);

  bool contains(std::string_view word) const { return words_.find(word) != words_.end(); }
  std::size_t size() const { return words_.size(); }
  const std::string& version() const { return version_; }
  /// sha256 over the sorted entries.
  std::string digest() const;
  const std::set<std::string, std::less<>>& words() const { return words_; }

 private:
  std::set<std::string, std::less<>> words_;
  std::string version_;
};

}  // namespace issuemask
