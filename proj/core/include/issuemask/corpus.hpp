#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "issuemask/common.hpp"
#include "issuemask/provenance.hpp"

namespace issuemask {

struct IssueReport {
  std::string id;  // owner/repo#number
  std::string repo;
  std::string title;
  std::string body;
  std::vector<std::string> tags;  // lowercase
  std::string created_at;         // ISO-8601
  bool is_pull_request = false;
  std::optional<Label> label;

  friend bool operator==(const IssueReport&, const IssueReport&) = default;
};

enum class TagMatchMode { exact, slash_segments };

/// Tags whose presence marks an issue as security-related.
struct SecurityTagSet {
  std::set<std::string> tags;
  TagMatchMode match_mode = TagMatchMode::slash_segments;

  /// The twelve default security tags.
  static SecurityTagSet defaults();
  /// The nine core tags before lexical expansion.
  static std::set<std::string> core_tags();

  bool contains(std::string_view tag) const { return tags.find(std::string(tag)) != tags.end(); }
  std::string digest() const;

  friend bool operator==(const SecurityTagSet&, const SecurityTagSet&) = default;
};

std::string lowercase(std::string_view text);

/// security iff any issue tag (or, in slash mode, any '/'-segment of one) is in the set.
Label adjudicate_label(const IssueReport& issue, const SecurityTagSet& tag_set);

/// Related-term lookup backing tag expansion. File format: `word<TAB>term,term,...`.
class SynonymDb {
 public:
  SynonymDb() = default;
  static SynonymDb load(const std::filesystem::path& path);
  void add(std::string word, std::set<std::string> related);
  std::set<std::string> related(std::string_view word) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::string, std::set<std::string>> entries_;
};

struct TagExpansion {
  SecurityTagSet tag_set;
  bool degraded = false;  // synonym database was unavailable
  std::vector<std::string> warnings;
};

/// core ∪ (related(core) ∩ allow) ∖ deny. A null `synonyms` degrades to core ∪ allow.
TagExpansion expand_tagset(const std::set<std::string>& core_tags, const SynonymDb* synonyms,
                           const std::set<std::string>& allow, const std::set<std::string>& deny,
                           TagMatchMode mode = TagMatchMode::slash_segments);

/// Plain-text list: one lowercase entry per line, '#' comments, blank lines ignored.
std::set<std::string> read_word_list(const std::filesystem::path& path);

/// Repository-level inclusion thresholds. Disabled by default.
struct ProjectFilter {
  bool enabled = false;
  std::int64_t min_stars = 1000;
  std::int64_t active_within_days = 365;
  bool exclude_forks = true;
  std::int64_t min_commits = 300;
  std::int64_t min_contributors = 50;
  std::int64_t min_merged_prs = 1;

  void validate() const;
  friend bool operator==(const ProjectFilter&, const ProjectFilter&) = default;
};

/// Inclusive calendar-date window over `created_at` (compared on YYYY-MM-DD).
struct DateWindow {
  std::string first = "2022-01-01";
  std::string last = "2024-03-01";

  bool contains(std::string_view created_at) const;
  void validate() const;
};

struct IssueFilter {
  DateWindow window;
  bool require_nonempty = true;
  bool exclude_prs = true;
};

/// True when the issue passes every enabled issue-level inclusion rule.
bool admits(const IssueFilter& filter, const IssueReport& issue);

struct LabeledCorpus {
  std::vector<IssueReport> issues;
  nlohmann::json provenance = nlohmann::json::object();

  std::map<Label, std::size_t> class_counts() const;
  friend bool operator==(const LabeledCorpus&, const LabeledCorpus&) = default;
};

/// Seeded uniform sample of exactly `per_class` issues from each pool, sorted by id.
LabeledCorpus build_balanced_corpus(const std::map<Label, std::vector<IssueReport>>& pools,
                                    std::size_t per_class, std::uint64_t seed);

nlohmann::json to_json(const IssueReport& issue);
IssueReport issue_from_json(const nlohmann::json& record, const std::string& where);

/// Writes the JSONL corpus and its provenance sidecar (provenance lands under meta.corpus).
void save_corpus(const std::filesystem::path& path, const LabeledCorpus& corpus,
                 const std::vector<ProvenanceInput>& inputs = {});
LabeledCorpus load_corpus(const std::filesystem::path& path);

}  // namespace issuemask
