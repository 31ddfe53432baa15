#include "issuemask/preprocess.hpp"

#include <cctype>
#include <set>

#include "issuemask/hashing.hpp"
#include "issuemask/jsonl.hpp"
#include "issuemask/lemmatizer.hpp"
#include "issuemask/structure.hpp"

namespace issuemask {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string join_tokens(const std::vector<NormToken>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += t.text;
  }
  return out;
}

bool same_texts(const std::vector<NormToken>& a, const std::vector<NormToken>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].text != b[i].text) return false;
  }
  return true;
}

}  // namespace

json PreprocessConfig::to_json() const {
  return {{"max_symbol_density", filter.max_symbol_density},
          {"max_code_density", filter.max_code_density},
          {"min_code_tokens", filter.min_code_tokens},
          {"drop_fenced_blocks", filter.drop_fenced_blocks},
          {"match_trace_patterns", filter.match_trace_patterns},
          {"tagger", tagger},
          {"stopwords_file", stopwords_file.string()},
          {"max_passes", max_passes}};
}

PreprocessConfig PreprocessConfig::from_json(const json& j, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where, "expected an object");
  PreprocessConfig c;
  for (const auto& [key, value] : j.items()) {
    const auto at = where + "." + key;
    try {
      if (key == "max_symbol_density") {
        c.filter.max_symbol_density = value.get<double>();
      } else if (key == "max_code_density") {
        c.filter.max_code_density = value.get<double>();
      } else if (key == "min_code_tokens") {
        c.filter.min_code_tokens = value.get<std::size_t>();
      } else if (key == "drop_fenced_blocks") {
        c.filter.drop_fenced_blocks = value.get<bool>();
      } else if (key == "match_trace_patterns") {
        c.filter.match_trace_patterns = value.get<bool>();
      } else if (key == "tagger") {
        c.tagger = value.get<std::string>();
      } else if (key == "stopwords_file") {
        c.stopwords_file = value.get<std::string>();
      } else if (key == "max_passes") {
        c.max_passes = value.get<int>();
      } else {
        throw ValidationError(at, "unknown key");
      }
    } catch (const json::exception& e) {
      throw ValidationError(at, e.what());
    }
  }
  if (c.filter.max_symbol_density < 0 || c.filter.max_symbol_density > 1) {
    throw ValidationError(where + ".max_symbol_density", "must lie in [0, 1]");
  }
  if (c.filter.max_code_density < 0 || c.filter.max_code_density > 1) {
    throw ValidationError(where + ".max_code_density", "must lie in [0, 1]");
  }
  if (c.max_passes < 1) throw ValidationError(where + ".max_passes", "must be >= 1");
  return c;
}

Preprocessor::Preprocessor(PreprocessConfig config)
    : config_(std::move(config)),
      stopwords_(config_.stopwords_file.empty() ? StopWords::english_v1() : StopWords::load(config_.stopwords_file)),
      tagger_(make_pos_tagger(config_.tagger)) {}

std::vector<NormToken> Preprocessor::lemma_pass(const std::vector<NormToken>& in) const {
  std::vector<std::string> words;
  words.reserve(in.size());
  for (const auto& t : in) words.push_back(t.text);
  const auto tags = tagger_->tag(words);

  std::vector<NormToken> out;
  bool pending_break = false;
  for (std::size_t i = 0; i < in.size(); ++i) {
    pending_break = pending_break || in[i].break_before;
    if (stopwords_.contains(words[i])) {
      pending_break = true;
      continue;
    }
    auto lemma = lemmatize(words[i], tags[i]);
    if (!is_valid_token(lemma) || stopwords_.contains(lemma)) {
      pending_break = true;
      continue;
    }
    out.push_back({std::move(lemma), pending_break});
    pending_break = false;
  }
  return out;
}

std::vector<NormToken> Preprocessor::run(std::string_view text) const {
  const auto lines = filter_lines(strip_structure_lines(text), config_.filter, stopwords_);
  std::string kept;
  for (const auto& line : lines) {
    kept += line;
    kept.push_back('\n');
  }
  auto stream = lemma_pass(normalize_tokens(kept));
  if (!stream.empty()) stream.front().break_before = true;

  // Re-running the whole pipeline on the joined stream sees one line of plain
  // lowercase words: structure stripping and normalization are the identity on
  // it, but the code-line test and the tagger's context can still change it.
  for (int pass = 1; pass < config_.max_passes && !stream.empty(); ++pass) {
    if (is_code_or_log_line(join_tokens(stream), config_.filter, stopwords_)) {
      stream.clear();
      break;
    }
    auto next = lemma_pass(stream);
    if (same_texts(next, stream)) break;
    if (!next.empty()) next.front().break_before = true;
    stream = std::move(next);
  }
  return stream;
}

std::vector<std::string> Preprocessor::tokens(std::string_view text) const {
  std::vector<std::string> out;
  for (auto& t : run(text)) out.push_back(std::move(t.text));
  return out;
}

std::vector<std::string> Preprocessor::lemmatize_and_filter(std::string_view text) const {
  std::vector<NormToken> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t end = i;
    while (end < text.size() && !std::isspace(static_cast<unsigned char>(text[end]))) ++end;
    if (end > i) words.push_back({lowercase(text.substr(i, end - i)), false});
    i = end;
  }
  std::vector<std::string> out;
  for (auto& t : lemma_pass(words)) out.push_back(std::move(t.text));
  return out;
}

PreprocessedIssue Preprocessor::process(const IssueReport& issue) const {
  PreprocessedIssue out;
  out.issue_id = issue.id;
  out.label = issue.label;
  const auto stream = run(issue.title + " " + issue.body);
  for (std::size_t i = 0; i < stream.size(); ++i) {
    out.tokens.push_back(stream[i].text);
    if (stream[i].break_before) out.phrase_breaks.push_back(i);
  }
  return out;
}

std::string Preprocessor::digest() const {
  json j = config_.to_json();
  j.erase("stopwords_file");
  j["stopwords_version"] = stopwords_.version();
  j["stopwords_sha256"] = stopwords_.digest();
  j["tagger"] = tagger_->name();
  return sha256_hex(j.dump());
}

bool is_valid_token(std::string_view token) {
  if (token.size() < 2 || token.front() == '-' || token.back() == '-') return false;
  if (token.find("--") != std::string_view::npos) return false;
  for (char c : token) {
    if (!((c >= 'a' && c <= 'z') || c == '-')) return false;
  }
  return true;
}

fs::path phrases_path(const fs::path& preprocessed) {
  return preprocessed.string() + ".phrases.jsonl";
}

json to_json(const PreprocessedIssue& issue) {
  json j;
  j["issue_id"] = issue.issue_id;
  j["tokens"] = issue.tokens;
  j["label"] = issue.label ? json(std::string(to_string(*issue.label))) : json(nullptr);
  return j;
}

PreprocessedIssue preprocessed_from_json(const json& record, const std::string& where) {
  require_exact_keys(record, {"issue_id", "tokens", "label"}, where);
  PreprocessedIssue issue;
  issue.issue_id = record.at("issue_id").get<std::string>();
  issue.tokens = record.at("tokens").get<std::vector<std::string>>();
  for (const auto& t : issue.tokens) {
    if (!is_valid_token(t)) throw ValidationError(where, "invalid token '" + t + "'");
  }
  const auto& label = record.at("label");
  if (!label.is_null()) {
    const auto parsed = try_parse_label(label.get<std::string>());
    if (!parsed) throw ValidationError(where, "unknown label " + label.dump());
    issue.label = *parsed;
  }
  if (!issue.tokens.empty()) issue.phrase_breaks = {0};
  return issue;
}

void save_preprocessed(const fs::path& path, const std::vector<PreprocessedIssue>& issues,
                       const std::vector<ProvenanceInput>& inputs, const json& meta) {
  JsonlWriter writer(path);
  JsonlWriter phrases(phrases_path(path));
  for (const auto& issue : issues) {
    writer.write(to_json(issue));
    phrases.write({{"issue_id", issue.issue_id}, {"phrase_breaks", issue.phrase_breaks}});
  }
  writer.close();
  phrases.close();
  Provenance prov;
  prov.artifact = "preprocessed";
  prov.inputs = inputs;
  prov.meta = meta.is_object() ? meta : json::object();
  prov.meta["phrases_sha256"] = sha256_file(phrases_path(path));
  write_provenance(path, std::move(prov));
}

LoadedPreprocessed load_preprocessed(const fs::path& path) {
  LoadedPreprocessed loaded;
  std::set<std::string> ids;
  for_each_jsonl(path, [&](const json& record, std::size_t line) {
    const auto where = path.string() + ":" + std::to_string(line);
    auto issue = preprocessed_from_json(record, where);
    if (!ids.insert(issue.issue_id).second) throw ValidationError(where, "duplicate issue_id " + issue.issue_id);
    loaded.issues.push_back(std::move(issue));
  });

  const auto companion = phrases_path(path);
  if (!fs::exists(companion)) return loaded;
  std::size_t index = 0;
  for_each_jsonl(companion, [&](const json& record, std::size_t line) {
    const auto where = companion.string() + ":" + std::to_string(line);
    require_exact_keys(record, {"issue_id", "phrase_breaks"}, where);
    if (index >= loaded.issues.size()) throw ValidationError(where, "more records than " + path.string());
    auto& issue = loaded.issues[index++];
    if (record.at("issue_id").get<std::string>() != issue.issue_id) {
      throw ValidationError(where, "issue_id does not match line order of " + path.string());
    }
    auto breaks = record.at("phrase_breaks").get<std::vector<std::size_t>>();
    for (std::size_t k = 0; k < breaks.size(); ++k) {
      if (breaks[k] >= issue.tokens.size() || (k > 0 && breaks[k] <= breaks[k - 1])) {
        throw ValidationError(where, "phrase_breaks must be increasing token indices");
      }
    }
    issue.phrase_breaks = std::move(breaks);
  });
  if (index != loaded.issues.size()) {
    throw ValidationError(companion.string(), "fewer records than " + path.string());
  }
  loaded.has_phrase_breaks = true;
  return loaded;
}

}  // namespace issuemask
