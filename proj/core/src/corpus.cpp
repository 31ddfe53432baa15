#include "issuemask/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "issuemask/hashing.hpp"
#include "issuemask/jsonl.hpp"
#include "issuemask/rng.hpp"

namespace fs = std::filesystem;

namespace issuemask {
namespace {

std::string trim(std::string_view text) {
  const auto begin = text.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) return {};
  const auto end = text.find_last_not_of(" \t\r\n");
  return std::string(text.substr(begin, end - begin + 1));
}

bool is_iso_date(std::string_view s) {
  if (s.size() < 10) return false;
  for (std::size_t i = 0; i < 10; ++i) {
    if (i == 4 || i == 7) {
      if (s[i] != '-') return false;
    } else if (!std::isdigit(static_cast<unsigned char>(s[i]))) {
      return false;
    }
  }
  return true;
}

bool tag_matches(const std::string& tag, const SecurityTagSet& set) {
  if (set.contains(tag)) return true;
  if (set.match_mode != TagMatchMode::slash_segments) return false;
  std::size_t start = 0;
  while (start <= tag.size()) {
    const auto slash = tag.find('/', start);
    const auto segment = trim(std::string_view(tag).substr(start, slash == std::string::npos ? std::string::npos : slash - start));
    if (!segment.empty() && set.contains(segment)) return true;
    if (slash == std::string::npos) break;
    start = slash + 1;
  }
  return false;
}

}  // namespace

std::string lowercase(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::set<std::string> SecurityTagSet::core_tags() {
  return {"security", "vulnerability", "risk", "cve", "cwe", "cvss", "cvss/high", "cvss/medium", "cvss/low"};
}

SecurityTagSet SecurityTagSet::defaults() {
  SecurityTagSet set;
  set.tags = core_tags();
  for (const char* extra : {"exposure", "risk", "secure", "vulnerable"}) set.tags.insert(extra);
  return set;
}

std::string SecurityTagSet::digest() const {
  Sha256 hasher;
  hasher.update(match_mode == TagMatchMode::exact ? "exact\n" : "slash_segments\n");
  for (const auto& tag : tags) {
    hasher.update(tag);
    hasher.update("\n");
  }
  return hasher.hex_digest();
}

Label adjudicate_label(const IssueReport& issue, const SecurityTagSet& tag_set) {
  for (const auto& tag : issue.tags) {
    if (tag_matches(tag, tag_set)) return Label::security;
  }
  return Label::non_security;
}

SynonymDb SynonymDb::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DependencyError("synonym database not readable: " + path.string());
  SynonymDb db;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no), "expected word<TAB>related,...");
    }
    std::set<std::string> related;
    std::string_view rest(line);
    rest.remove_prefix(tab + 1);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      auto term = lowercase(trim(rest.substr(0, comma)));
      if (!term.empty()) related.insert(std::move(term));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    db.add(lowercase(trim(std::string_view(line).substr(0, tab))), std::move(related));
  }
  return db;
}

void SynonymDb::add(std::string word, std::set<std::string> related) {
  auto& slot = entries_[std::move(word)];
  slot.insert(related.begin(), related.end());
}

std::set<std::string> SynonymDb::related(std::string_view word) const {
  const auto it = entries_.find(std::string(word));
  return it == entries_.end() ? std::set<std::string>{} : it->second;
}

TagExpansion expand_tagset(const std::set<std::string>& core_tags, const SynonymDb* synonyms,
                           const std::set<std::string>& allow, const std::set<std::string>& deny,
                           TagMatchMode mode) {
  if (core_tags.empty()) throw ValidationError("core_tags", "core tag set must not be empty");
  TagExpansion result;
  result.tag_set.match_mode = mode;
  for (const auto& tag : core_tags) result.tag_set.tags.insert(lowercase(trim(tag)));

  std::set<std::string> allow_lc;
  for (const auto& a : allow) allow_lc.insert(lowercase(trim(a)));
  std::set<std::string> deny_lc;
  for (const auto& d : deny) deny_lc.insert(lowercase(trim(d)));
  for (const auto& a : allow_lc) {
    if (deny_lc.count(a)) result.warnings.push_back("'" + a + "' is in both allow and deny lists; deny wins");
  }

  if (synonyms == nullptr) {
    result.degraded = true;
    result.warnings.push_back("synonym database unavailable; expansion degraded to core ∪ allow");
    result.tag_set.tags.insert(allow_lc.begin(), allow_lc.end());
  } else {
    for (const auto& tag : core_tags) {
      // Multi-word and slash tags are looked up whole and by segment.
      std::set<std::string> keys{lowercase(tag)};
      std::string_view rest(tag);
      while (!rest.empty()) {
        const auto slash = rest.find('/');
        keys.insert(lowercase(trim(rest.substr(0, slash))));
        if (slash == std::string_view::npos) break;
        rest.remove_prefix(slash + 1);
      }
      for (const auto& key : keys) {
        for (const auto& candidate : synonyms->related(key)) {
          if (allow_lc.count(candidate)) result.tag_set.tags.insert(candidate);
        }
      }
    }
  }
  for (const auto& d : deny_lc) result.tag_set.tags.erase(d);
  return result;
}

std::set<std::string> read_word_list(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DependencyError("word list not readable: " + path.string());
  std::set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto word = lowercase(trim(line));
    if (!word.empty()) words.insert(std::move(word));
  }
  return words;
}

void ProjectFilter::validate() const {
  for (auto [name, value] : {std::pair{"min_stars", min_stars}, {"active_within_days", active_within_days},
                             {"min_commits", min_commits}, {"min_contributors", min_contributors},
                             {"min_merged_prs", min_merged_prs}}) {
    if (value < 0) throw ValidationError(std::string("project_filter/") + name, "must be >= 0");
  }
}

bool DateWindow::contains(std::string_view created_at) const {
  if (!is_iso_date(created_at)) return false;
  const auto day = created_at.substr(0, 10);
  return day >= std::string_view(first) && day <= std::string_view(last);
}

void DateWindow::validate() const {
  if (!is_iso_date(first) || first.size() != 10) throw ValidationError("date_window/first", "expected YYYY-MM-DD");
  if (!is_iso_date(last) || last.size() != 10) throw ValidationError("date_window/last", "expected YYYY-MM-DD");
  if (first > last) throw ValidationError("date_window", "first is after last");
}

bool admits(const IssueFilter& filter, const IssueReport& issue) {
  if (filter.exclude_prs && issue.is_pull_request) return false;
  if (filter.require_nonempty && (trim(issue.title).empty() || trim(issue.body).empty())) return false;
  return filter.window.contains(issue.created_at);
}

std::map<Label, std::size_t> LabeledCorpus::class_counts() const {
  std::map<Label, std::size_t> counts{{Label::security, 0}, {Label::non_security, 0}};
  for (const auto& issue : issues) {
    if (issue.label) ++counts[*issue.label];
  }
  return counts;
}

LabeledCorpus build_balanced_corpus(const std::map<Label, std::vector<IssueReport>>& pools,
                                    std::size_t per_class, std::uint64_t seed) {
  LabeledCorpus corpus;
  std::set<std::string> seen;
  nlohmann::json pool_sizes = nlohmann::json::object();
  for (Label label : kLabelOrder) {
    const auto it = pools.find(label);
    const std::size_t available = it == pools.end() ? 0 : it->second.size();
    pool_sizes[std::string(to_string(label))] = available;
    if (available < per_class) {
      throw ShortfallError("class '" + std::string(to_string(label)) + "' has " + std::to_string(available) +
                           " issues, " + std::to_string(per_class) + " required");
    }
    std::vector<IssueReport> pool = it->second;
    std::sort(pool.begin(), pool.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    for (std::size_t i = 1; i < pool.size(); ++i) {
      if (pool[i].id == pool[i - 1].id) throw ValidationError(pool[i].id, "duplicate issue id in pool");
    }
    SeededRng rng(derive_seed(seed, label_index(label)));
    for (std::size_t idx : rng.sample_indices(pool.size(), per_class)) {
      IssueReport issue = pool[idx];
      if (issue.label && *issue.label != label) {
        throw ValidationError(issue.id, "issue label disagrees with its pool");
      }
      issue.label = label;
      if (!seen.insert(issue.id).second) throw ValidationError(issue.id, "issue id appears in more than one pool");
      corpus.issues.push_back(std::move(issue));
    }
  }
  std::sort(corpus.issues.begin(), corpus.issues.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  corpus.provenance = {{"per_class", per_class}, {"seed", seed}, {"pool_sizes", pool_sizes}};
  return corpus;
}

nlohmann::json to_json(const IssueReport& issue) {
  return nlohmann::json{{"id", issue.id},
                        {"repo", issue.repo},
                        {"title", issue.title},
                        {"body", issue.body},
                        {"tags", issue.tags},
                        {"created_at", issue.created_at},
                        {"is_pull_request", issue.is_pull_request},
                        {"label", issue.label ? nlohmann::json(std::string(to_string(*issue.label)))
                                              : nlohmann::json(nullptr)}};
}

IssueReport issue_from_json(const nlohmann::json& record, const std::string& where) {
  require_exact_keys(record, {"id", "repo", "title", "body", "tags", "created_at", "is_pull_request", "label"},
                     where);
  IssueReport issue;
  issue.id = record.at("id").get<std::string>();
  issue.repo = record.at("repo").get<std::string>();
  issue.title = record.at("title").get<std::string>();
  issue.body = record.at("body").get<std::string>();
  issue.tags = record.at("tags").get<std::vector<std::string>>();
  issue.created_at = record.at("created_at").get<std::string>();
  issue.is_pull_request = record.at("is_pull_request").get<bool>();
  if (!record.at("label").is_null()) issue.label = parse_label(record.at("label").get<std::string>());
  return issue;
}

void save_corpus(const fs::path& path, const LabeledCorpus& corpus, const std::vector<ProvenanceInput>& inputs) {
  JsonlWriter writer(path);
  for (const auto& issue : corpus.issues) writer.write(to_json(issue));
  writer.close();
  Provenance prov;
  prov.artifact = "corpus";
  prov.inputs = inputs;
  prov.meta = {{"corpus", corpus.provenance}};
  write_provenance(path, std::move(prov));
}

LabeledCorpus load_corpus(const fs::path& path) {
  LabeledCorpus corpus;
  std::set<std::string> ids;
  for_each_jsonl(path, [&](const nlohmann::json& record, std::size_t line) {
    const auto where = path.string() + ":" + std::to_string(line);
    auto issue = issue_from_json(record, where);
    if (!ids.insert(issue.id).second) throw ValidationError(where, "duplicate id " + issue.id);
    corpus.issues.push_back(std::move(issue));
  });
  if (fs::exists(sidecar_path(path))) {
    corpus.provenance = read_provenance(path).meta.value("corpus", nlohmann::json::object());
  }
  return corpus;
}

}  // namespace issuemask
