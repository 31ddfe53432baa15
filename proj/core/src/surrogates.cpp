#include "issuemask/surrogates.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_map>

#include "issuemask/rng.hpp"

namespace issuemask {
namespace fs = std::filesystem;
using nlohmann::json;

std::set<std::string> SurrogateLexicon::keywords(Label label) const {
  std::set<std::string> out;
  for (const auto& e : of(label)) out.insert(e.keyword);
  return out;
}

std::set<std::string> SurrogateLexicon::all_keywords() const {
  auto out = keywords(Label::security);
  out.merge(keywords(Label::non_security));
  return out;
}

void SurrogateLexicon::validate(const std::string& where) const {
  std::set<std::string> seen;
  for (auto label : kLabelOrder) {
    const auto& list = of(label);
    const auto at = where + "." + std::string(to_string(label));
    if (list.size() > k) throw ValidationError(at, "more than k=" + std::to_string(k) + " keywords");
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (list[i].rank != i + 1) throw ValidationError(at, "ranks must run 1.." + std::to_string(list.size()));
      if (i > 0 && list[i].score > list[i - 1].score) throw ValidationError(at, "scores must not increase with rank");
      if (!seen.insert(list[i].keyword).second) {
        throw ValidationError(at, "keyword '" + list[i].keyword + "' appears twice");
      }
    }
  }
}

ClassScores resolve_conflicts(const std::vector<ScoredTerm>& security, const std::vector<ScoredTerm>& non_security) {
  std::unordered_map<std::string, double> sec;
  std::unordered_map<std::string, double> non;
  for (const auto& t : security) sec.emplace(t.term, t.score);
  for (const auto& t : non_security) non.emplace(t.term, t.score);

  ClassScores out;
  for (const auto& t : security) {
    const auto it = non.find(t.term);
    if (it == non.end() || t.score > it->second) out.lists[label_index(Label::security)].push_back(t);
    if (it != non.end() && t.score == it->second) out.tied.push_back(t.term);
  }
  for (const auto& t : non_security) {
    const auto it = sec.find(t.term);
    if (it == sec.end() || t.score > it->second) out.lists[label_index(Label::non_security)].push_back(t);
  }
  for (auto& list : out.lists) sort_scored(list);
  std::sort(out.tied.begin(), out.tied.end());
  return out;
}

SurrogateLexicon select_top_k(const ClassScores& scores, std::size_t k, const std::set<std::string>& allow,
                              const std::set<std::string>& deny) {
  if (k == 0) throw ValidationError("select_top_k", "k must be >= 1");
  SurrogateLexicon lexicon;
  lexicon.k = k;
  for (auto label : kLabelOrder) {
    std::vector<ScoredTerm> survivors;
    for (const auto& t : scores.lists[label_index(label)]) {
      if (!deny.contains(t.term)) survivors.push_back(t);
    }
    sort_scored(survivors);

    std::vector<bool> keep(survivors.size(), false);
    std::size_t kept = 0;
    for (std::size_t i = 0; i < survivors.size() && kept < k; ++i) {
      if (allow.contains(survivors[i].term)) {
        keep[i] = true;
        ++kept;
      }
    }
    for (std::size_t i = 0; i < survivors.size() && kept < k; ++i) {
      if (!keep[i]) {
        keep[i] = true;
        ++kept;
      }
    }

    auto& list = lexicon.of(label);
    for (std::size_t i = 0; i < survivors.size(); ++i) {
      if (keep[i]) list.push_back({survivors[i].term, survivors[i].score, list.size() + 1});
    }
    if (list.size() < k) {
      lexicon.warnings.push_back(std::string(to_string(label)) + ": only " + std::to_string(list.size()) +
                                 " keywords survive, fewer than k=" + std::to_string(k));
    }
  }
  return lexicon;
}

RandomKeywordLists sample_random_keywords(const std::array<std::map<std::string, WordStats>, kNumLabels>& vocabulary,
                                          const SurrogateLexicon& lexicon, std::size_t k, std::uint64_t seed) {
  if (k == 0) throw ValidationError("sample_random_keywords", "k must be >= 1");
  const auto excluded = lexicon.all_keywords();
  RandomKeywordLists out;
  out.k = k;
  out.seed = seed;
  out.preprocess_digest = lexicon.preprocess_digest;
  SeededRng rng(seed);
  std::set<std::string> taken;
  for (auto label : kLabelOrder) {
    // std::map iteration gives a canonical candidate order.
    std::vector<std::pair<std::string, double>> candidates;
    for (const auto& [word, stats] : vocabulary[label_index(label)]) {
      if (!excluded.contains(word) && !taken.contains(word)) candidates.emplace_back(word, stats.score());
    }
    if (candidates.size() < k) {
      throw ShortfallError("random keywords for " + std::string(to_string(label)) + ": need " + std::to_string(k) +
                           ", only " + std::to_string(candidates.size()) + " candidates outside the lexicon");
    }
    std::vector<ScoredTerm> picked;
    for (auto index : rng.sample_indices(candidates.size(), k)) {
      picked.push_back({candidates[index].first, candidates[index].second});
      taken.insert(candidates[index].first);
    }
    sort_scored(picked);
    auto& list = out.of(label);
    for (auto& t : picked) list.push_back({t.term, t.score, list.size() + 1});
  }
  return out;
}

std::array<std::map<std::string, WordStats>, kNumLabels> MinedSurrogates::vocabulary() const {
  return {rake[0].word_stats, rake[1].word_stats};
}

MinedSurrogates mine_surrogates(const std::array<std::vector<RakeDocument>, kNumLabels>& docs,
                                const StopWords& stop_words, std::size_t k, const std::set<std::string>& allow,
                                const std::set<std::string>& deny, std::string preprocess_digest) {
  MinedSurrogates out;
  for (auto label : kLabelOrder) {
    if (docs[label_index(label)].empty()) {
      throw ValidationError("mine_surrogates", "no " + std::string(to_string(label)) + " documents");
    }
    out.rake[label_index(label)] = rake_extract(docs[label_index(label)], stop_words);
  }
  auto scores = resolve_conflicts(out.rake[0].words, out.rake[1].words);
  out.tied = scores.tied;
  out.lexicon = select_top_k(scores, k, allow, deny);
  out.lexicon.preprocess_digest = std::move(preprocess_digest);
  return out;
}

json to_json(const SurrogateLexicon& lexicon) {
  json doc;
  for (auto label : kLabelOrder) {
    json list = json::array();
    for (const auto& e : lexicon.of(label)) list.push_back({{"keyword", e.keyword}, {"score", e.score}, {"rank", e.rank}});
    doc[std::string(to_string(label))] = std::move(list);
  }
  doc["k"] = lexicon.k;
  doc["seed"] = lexicon.seed ? json(*lexicon.seed) : json(nullptr);
  doc["preprocess_digest"] = lexicon.preprocess_digest;
  return doc;
}

SurrogateLexicon lexicon_from_json(const json& doc, const std::string& where) {
  if (!doc.is_object()) throw ValidationError(where, "expected a JSON object");
  for (const auto& [key, _] : doc.items()) {
    if (key != "security" && key != "non_security" && key != "k" && key != "seed" && key != "preprocess_digest") {
      throw ValidationError(where, "unexpected field '" + key + "'");
    }
  }
  SurrogateLexicon lexicon;
  try {
    lexicon.k = doc.at("k").get<std::size_t>();
    if (doc.contains("seed") && !doc.at("seed").is_null()) lexicon.seed = doc.at("seed").get<std::uint64_t>();
    lexicon.preprocess_digest = doc.value("preprocess_digest", "");
    for (auto label : kLabelOrder) {
      for (const auto& e : doc.at(std::string(to_string(label)))) {
        lexicon.of(label).push_back(
            {e.at("keyword").get<std::string>(), e.at("score").get<double>(), e.at("rank").get<std::size_t>()});
      }
    }
  } catch (const json::exception& e) {
    throw ValidationError(where, e.what());
  }
  lexicon.validate(where);
  return lexicon;
}

void save_lexicon(const fs::path& path, const SurrogateLexicon& lexicon, const std::vector<ProvenanceInput>& inputs,
                  const std::string& artifact) {
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << to_json(lexicon).dump(2) << '\n';
    if (!out) throw Error("failed writing " + path.string());
  }
  Provenance prov;
  prov.artifact = artifact;
  prov.inputs = inputs;
  prov.meta = {{"preprocess_digest", lexicon.preprocess_digest}, {"warnings", lexicon.warnings}};
  write_provenance(path, std::move(prov));
}

SurrogateLexicon load_lexicon(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DependencyError("cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError(path.string(), e.what());
  }
  return lexicon_from_json(doc, path.string());
}

}  // namespace issuemask
