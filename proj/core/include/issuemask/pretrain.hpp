#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "issuemask/encoder.hpp"
#include "issuemask/provenance.hpp"
#include "issuemask/vocab.hpp"

namespace issuemask {

struct PretrainConfig {
  EncoderConfig encoder;  // vocab_size is filled in from the built vocabulary
  std::size_t epochs = 4;
  std::size_t batch_size = 16;
  double learning_rate = 1e-3;
  double mask_probability = 0.15;
  std::size_t max_sequence_length = 128;
  std::size_t min_count = 1;
  std::size_t max_vocab = 0;
  std::uint64_t seed = 0;

  void validate() const;
  nlohmann::json to_json() const;
  static PretrainConfig from_json(const nlohmann::json& j, const std::string& where);
};

/// An encoder and the vocabulary it was trained with; the starting point of every fine-tuning run.
struct PretrainedEncoder {
  std::string id;
  Vocab vocab;
  Encoder<float> encoder;
  std::vector<double> epoch_losses;

  std::string digest() const { return encoder.params().digest(); }
};

/// Masked-language-model training with a tied output embedding. Each epoch
/// picks mask_probability of the positions (at least one per sequence); of
/// those 80% become [MASK], 10% a random word and 10% stay unchanged.
PretrainedEncoder pretrain_mlm(const std::vector<std::vector<std::string>>& docs, const PretrainConfig& config,
                               std::string id = "issuemask-mlm");

/// Directory with manifest.json, vocab.txt and weights.bin.
void save_pretrained(const std::filesystem::path& dir, const PretrainedEncoder& model,
                     const std::vector<ProvenanceInput>& inputs = {});
PretrainedEncoder load_pretrained(const std::filesystem::path& dir);

}  // namespace issuemask
