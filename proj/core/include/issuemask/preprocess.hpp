#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "issuemask/common.hpp"
#include "issuemask/corpus.hpp"
#include "issuemask/normalize.hpp"
#include "issuemask/pos_tagger.hpp"
#include "issuemask/provenance.hpp"
#include "issuemask/stopwords.hpp"

namespace issuemask {

struct PreprocessedIssue {
  std::string issue_id;
  std::vector<std::string> tokens;
  std::optional<Label> label;
  // Indices of tokens that start a new phrase (punctuation, a removed stop word
  // or code line, or a line boundary came before them). Index 0 is always present
  // when tokens is nonempty.
  std::vector<std::size_t> phrase_breaks;

  friend bool operator==(const PreprocessedIssue&, const PreprocessedIssue&) = default;
};

struct PreprocessConfig {
  NlFilterConfig filter;
  std::string tagger = "rule-v1";
  std::filesystem::path stopwords_file;  // empty: the built-in stopwords-en-v1 list
  int max_passes = 16;

  nlohmann::json to_json() const;
  static PreprocessConfig from_json(const nlohmann::json& j, const std::string& where);
};

class Preprocessor {
 public:
  explicit Preprocessor(PreprocessConfig config = {});

  /// Full pipeline over title + " " + body.
  PreprocessedIssue process(const IssueReport& issue) const;

  /// strip structure, drop code/log lines, normalize, then tag/lemmatize/drop stop
  /// words. The last stage repeats until the stream no longer changes, so feeding
  /// the space-joined output back in returns it unchanged.
  std::vector<NormToken> run(std::string_view text) const;
  std::vector<std::string> tokens(std::string_view text) const;

  /// The last stage alone over whitespace-separated words.
  std::vector<std::string> lemmatize_and_filter(std::string_view text) const;

  const StopWords& stopwords() const { return stopwords_; }
  const PreprocessConfig& config() const { return config_; }
  /// Hash over everything that can change the token streams.
  std::string digest() const;

 private:
  std::vector<NormToken> lemma_pass(const std::vector<NormToken>& in) const;

  PreprocessConfig config_;
  StopWords stopwords_;
  std::unique_ptr<PosTagger> tagger_;
};

/// [a-z] plus internal hyphens, length >= 2.
bool is_valid_token(std::string_view token);

std::filesystem::path phrases_path(const std::filesystem::path& preprocessed);

nlohmann::json to_json(const PreprocessedIssue& issue);
PreprocessedIssue preprocessed_from_json(const nlohmann::json& record, const std::string& where);

/// Writes {issue_id, tokens, label} lines, the `<path>.phrases.jsonl` companion,
/// and a provenance sidecar whose meta carries `preprocess_digest`.
void save_preprocessed(const std::filesystem::path& path, const std::vector<PreprocessedIssue>& issues,
                       const std::vector<ProvenanceInput>& inputs = {}, const nlohmann::json& meta = {});

struct LoadedPreprocessed {
  std::vector<PreprocessedIssue> issues;
  bool has_phrase_breaks = false;
};

/// Without a companion file every issue is a single phrase.
LoadedPreprocessed load_preprocessed(const std::filesystem::path& path);

}  // namespace issuemask
