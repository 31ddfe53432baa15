#pragma once

#include <map>
#include <string>
#include <vector>

#include "issuemask/stopwords.hpp"

namespace issuemask {

/// A token stream plus the indices where a new candidate phrase must start
/// regardless of stop words (sentence punctuation, dropped fragments).
struct RakeDocument {
  std::vector<std::string> tokens;
  std::vector<std::size_t> phrase_breaks;
};

struct ScoredTerm {
  std::string term;
  double score = 0.0;

  friend bool operator==(const ScoredTerm&, const ScoredTerm&) = default;
};

struct WordStats {
  double degree = 0.0;
  double frequency = 0.0;
  double score() const { return degree / frequency; }
};

struct RakeResult {
  std::vector<ScoredTerm> phrases;  // score descending, ties by phrase text
  std::vector<ScoredTerm> words;    // member words by degree/frequency, same ordering
  std::map<std::string, WordStats> word_stats;
};

/// Candidate phrases are maximal runs of non-stop-word tokens, also cut at
/// phrase breaks. deg(w) sums the length of the phrase around every occurrence
/// of w, freq(w) counts occurrences, and a phrase scores the sum of deg/freq
/// over its member words. Throws ValidationError on an empty document list.
RakeResult rake_extract(const std::vector<RakeDocument>& docs, const StopWords& stop_words);
RakeResult rake_extract(const std::vector<std::vector<std::string>>& docs, const StopWords& stop_words);

/// Descending score, then ascending term.
void sort_scored(std::vector<ScoredTerm>& terms);

}  // namespace issuemask
