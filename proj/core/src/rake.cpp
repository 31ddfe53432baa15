#include "issuemask/rake.hpp"

#include <algorithm>
#include <unordered_map>

#include "issuemask/common.hpp"

namespace issuemask {

void sort_scored(std::vector<ScoredTerm>& terms) {
  std::sort(terms.begin(), terms.end(), [](const ScoredTerm& a, const ScoredTerm& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.term < b.term;
  });
}

RakeResult rake_extract(const std::vector<RakeDocument>& docs, const StopWords& stop_words) {
  if (docs.empty()) throw ValidationError("rake_extract", "empty document list");

  std::vector<std::vector<std::string>> phrases;
  for (const auto& doc : docs) {
    std::size_t next_break = 0;
    std::vector<std::string> current;
    auto flush = [&] {
      if (!current.empty()) phrases.push_back(std::move(current));
      current.clear();
    };
    for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
      while (next_break < doc.phrase_breaks.size() && doc.phrase_breaks[next_break] < i) ++next_break;
      const bool cut = next_break < doc.phrase_breaks.size() && doc.phrase_breaks[next_break] == i;
      if (cut) flush();
      if (stop_words.contains(doc.tokens[i])) {
        flush();
        continue;
      }
      current.push_back(doc.tokens[i]);
    }
    flush();
  }

  RakeResult result;
  for (const auto& phrase : phrases) {
    const auto length = static_cast<double>(phrase.size());
    for (const auto& word : phrase) {
      auto& stats = result.word_stats[word];
      stats.degree += length;
      stats.frequency += 1.0;
    }
  }
  for (const auto& [word, stats] : result.word_stats) result.words.push_back({word, stats.score()});
  sort_scored(result.words);

  std::unordered_map<std::string, double> phrase_scores;
  for (const auto& phrase : phrases) {
    std::string text;
    double score = 0.0;
    for (const auto& word : phrase) {
      if (!text.empty()) text.push_back(' ');
      text += word;
      score += result.word_stats.at(word).score();
    }
    phrase_scores.emplace(std::move(text), score);
  }
  for (auto& [text, score] : phrase_scores) result.phrases.push_back({text, score});
  sort_scored(result.phrases);
  return result;
}

RakeResult rake_extract(const std::vector<std::vector<std::string>>& docs, const StopWords& stop_words) {
  std::vector<RakeDocument> wrapped;
  wrapped.reserve(docs.size());
  for (const auto& tokens : docs) wrapped.push_back({tokens, {}});
  return rake_extract(wrapped, stop_words);
}

}  // namespace issuemask
