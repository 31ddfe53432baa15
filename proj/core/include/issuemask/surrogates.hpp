#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "issuemask/common.hpp"
#include "issuemask/provenance.hpp"
#include "issuemask/rake.hpp"

namespace issuemask {

struct LexiconEntry {
  std::string keyword;
  double score = 0.0;
  std::size_t rank = 0;  // 1-based

  friend bool operator==(const LexiconEntry&, const LexiconEntry&) = default;
};

/// Per-class keyword lists. Used both for the mined Semantic Surrogates and for
/// the seeded random keyword lists of the ablation (which carry `seed`).
struct SurrogateLexicon {
  std::array<std::vector<LexiconEntry>, kNumLabels> lists;
  std::size_t k = 50;
  std::optional<std::uint64_t> seed;
  std::string preprocess_digest;
  std::vector<std::string> warnings;  // not serialized

  const std::vector<LexiconEntry>& of(Label label) const { return lists[label_index(label)]; }
  std::vector<LexiconEntry>& of(Label label) { return lists[label_index(label)]; }
  std::set<std::string> keywords(Label label) const;
  std::set<std::string> all_keywords() const;

  /// Disjoint classes, |list| <= k, contiguous ranks, non-increasing scores.
  void validate(const std::string& where) const;

  bool operator==(const SurrogateLexicon& other) const {
    return lists == other.lists && k == other.k && seed == other.seed && preprocess_digest == other.preprocess_digest;
  }
};

using RandomKeywordLists = SurrogateLexicon;

struct ClassScores {
  std::array<std::vector<ScoredTerm>, kNumLabels> lists;
  std::vector<std::string> tied;  // keywords dropped because both classes scored them equally
};

/// Keywords in both classes go to the class with the strictly higher score;
/// exact ties leave both lists.
ClassScores resolve_conflicts(const std::vector<ScoredTerm>& security, const std::vector<ScoredTerm>& non_security);

/// Drops deny-listed keywords, then keeps the top k per class by score.
/// Allow-listed keywords present in a class list are kept even below rank k
/// (displacing the lowest unpinned entries); deny wins when a keyword is in both.
SurrogateLexicon select_top_k(const ClassScores& scores, std::size_t k, const std::set<std::string>& allow = {},
                              const std::set<std::string>& deny = {});

/// Seeded sample of k keywords per class from that class's RAKE vocabulary,
/// excluding every lexicon keyword. Security is drawn first and its picks are
/// removed from the non-security candidates. Throws ShortfallError when a
/// class has fewer than k candidates.
RandomKeywordLists sample_random_keywords(const std::array<std::map<std::string, WordStats>, kNumLabels>& vocabulary,
                                          const SurrogateLexicon& lexicon, std::size_t k, std::uint64_t seed);

struct MinedSurrogates {
  SurrogateLexicon lexicon;
  std::array<RakeResult, kNumLabels> rake;
  std::vector<std::string> tied;

  /// Per-class RAKE word vocabulary, the candidate pool for random keyword lists.
  std::array<std::map<std::string, WordStats>, kNumLabels> vocabulary() const;
};

/// rake_extract per class, resolve_conflicts on the word scores, then select_top_k.
MinedSurrogates mine_surrogates(const std::array<std::vector<RakeDocument>, kNumLabels>& docs,
                                const StopWords& stop_words, std::size_t k, const std::set<std::string>& allow = {},
                                const std::set<std::string>& deny = {}, std::string preprocess_digest = {});

nlohmann::json to_json(const SurrogateLexicon& lexicon);
SurrogateLexicon lexicon_from_json(const nlohmann::json& doc, const std::string& where);

void save_lexicon(const std::filesystem::path& path, const SurrogateLexicon& lexicon,
                  const std::vector<ProvenanceInput>& inputs = {}, const std::string& artifact = "lexicon");
SurrogateLexicon load_lexicon(const std::filesystem::path& path);

}  // namespace issuemask
