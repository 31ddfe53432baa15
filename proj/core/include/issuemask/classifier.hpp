#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "issuemask/common.hpp"
#include "issuemask/encoder.hpp"
#include "issuemask/masking.hpp"
#include "issuemask/pretrain.hpp"
#include "issuemask/provenance.hpp"
#include "issuemask/vocab.hpp"

namespace issuemask {

struct TrainConfig {
  std::size_t epochs = 6;
  std::size_t batch_size = 32;
  double learning_rate = 2e-5;
  std::size_t max_sequence_length = 512;
  std::uint64_t seed = 0;
  std::string encoder_id;
  std::size_t data_workers = 2;
  double cls_loss_weight = 1.0;
  double weight_decay = 0.01;
  double grad_clip = 1.0;

  /// Throws ValidationError; `positional_capacity` of 0 skips the length check.
  void validate(std::size_t positional_capacity = 0) const;
  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j, const std::string& where);
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

using ClassProbs = std::array<double, kNumLabels>;

struct ClassifierModel {
  std::string encoder_id;
  std::string pretrained_digest;
  Vocab vocab;
  Encoder<float> encoder;
  ParamStore<float> head;  // "head.weight" hidden x 2, "head.bias" 1 x 2; columns follow kLabelOrder
  TrainConfig config;
  std::string initial_weights_digest;
  std::vector<double> epoch_losses;
  std::vector<double> first_epoch_step_losses;

  /// Encoder and head parameters together.
  std::string weights_digest() const;

  /// Head logits at [CLS] (row 0) and at each mask that survives truncation
  /// (rows 1..), plus the token indices of those masks.
  struct Logits {
    Eigen::MatrixXd rows;
    std::vector<std::size_t> kept_masks;
  };
  Logits logits(const MaskedInstance& instance) const;
};

/// Pretrained encoder plus a freshly initialised head (seeded by config.seed);
/// records initial_weights_digest.
ClassifierModel init_classifier(const PretrainedEncoder& base, const TrainConfig& config);

/// Cross-entropy at every [MASK] position against its pseudo-label plus
/// cls_loss_weight times cross-entropy at [CLS] against the truth label,
/// averaged over contributing positions per batch. AdamW with linear decay,
/// global gradient clipping.
ClassifierModel fine_tune(const PretrainedEncoder& base, const std::vector<MaskedInstance>& train,
                          const TrainConfig& config);

/// Same objective, no update: mean loss per contributing position.
double mean_loss(const ClassifierModel& model, const std::vector<MaskedInstance>& instances);

enum class DecisionPath { mask_vote, cls_fallback };
std::string_view to_string(DecisionPath path);

struct PredictionOutcome {
  std::string issue_id;
  std::vector<ClassProbs> per_mask_probabilities;
  ClassProbs cls_probabilities{};
  std::array<std::size_t, kNumLabels> vote_tally{};
  Label final_label = Label::non_security;
  DecisionPath decision_path = DecisionPath::cls_fallback;
  double max_confidence = 0.0;

  friend bool operator==(const PredictionOutcome&, const PredictionOutcome&) = default;
};

/// Each mask votes for its argmax class (exact 50/50 votes security). Majority
/// wins; a split vote goes to the argmax of the mean mask probabilities, then
/// to the argmax of the [CLS] probabilities, then to security. Without masks
/// the label is security iff the [CLS] security probability exceeds threshold.
PredictionOutcome decide(std::string issue_id, std::vector<ClassProbs> per_mask, ClassProbs cls, double threshold);

PredictionOutcome predict(const ClassifierModel& model, const MaskedInstance& instance, double threshold = 0.5);
std::vector<PredictionOutcome> predict_batch(const ClassifierModel& model, const std::vector<MaskedInstance>& instances,
                                             double threshold = 0.5);

nlohmann::json to_json(const PredictionOutcome& outcome);
PredictionOutcome outcome_from_json(const nlohmann::json& record, const std::string& where);

/// Checkpoint directory: manifest.json (configs, label order, digests), vocab.txt, weights.bin.
void save_classifier(const std::filesystem::path& dir, const ClassifierModel& model,
                     const std::vector<ProvenanceInput>& inputs = {});
/// Validates file digests, the parameter digest, and the label order.
ClassifierModel load_classifier(const std::filesystem::path& dir);

}  // namespace issuemask
