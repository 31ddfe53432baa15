#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "issuemask/corpus.hpp"

namespace issuemask {

/// Templated issue generator. Each class has its own vocabulary grouped into
/// fixed multi-word terms, drawn with a Zipf-like skew; every issue also
/// carries vocabulary shared by both classes.
struct SyntheticConfig {
  std::size_t per_class = 500;
  std::uint64_t seed = 0;
  std::size_t min_sentences = 2;
  std::size_t max_sentences = 5;
  // Probability that a class slot takes a word from the other class instead.
  double cross_talk = 0.08;
  // Fraction of issues whose class slots are mostly filled with shared words.
  double weak_fraction = 0.10;
  double zipf_exponent = 0.5;
  std::string repo = "synthetic/tracker";

  void validate() const;
};

const std::vector<std::string>& synthetic_class_vocabulary(Label label);
const std::vector<std::string>& synthetic_shared_vocabulary();

/// Balanced labeled corpus sorted by id; security issues carry a security tag.
LabeledCorpus generate_synthetic_corpus(const SyntheticConfig& config);

/// Unlabeled text for masked-language-model pretraining, drawn from the same
/// generator under an independent seed stream.
std::vector<std::string> generate_pretraining_text(const SyntheticConfig& config, std::size_t documents);

}  // namespace issuemask
