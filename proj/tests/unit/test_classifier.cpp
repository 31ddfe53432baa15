#include <gtest/gtest.h>

#include <cmath>

#include "issuemask/common.hpp"
#include "issuemask/rng.hpp"
#include "test_support.hpp"

using namespace issuemask;
using testing_support::small_train_config;
using testing_support::small_world;

namespace {

ClassProbs probs(double sec) { return {sec, 1.0 - sec}; }

// Straight-line reading of the voting rule, used against decide().
Label reference_label(const std::vector<ClassProbs>& masks, const ClassProbs& cls, double threshold) {
  if (masks.empty()) return cls[0] > threshold ? Label::security : Label::non_security;
  int sec_votes = 0, non_votes = 0;
  double sec_sum = 0, non_sum = 0;
  for (const auto& m : masks) {
    if (m[0] >= m[1]) ++sec_votes; else ++non_votes;
    sec_sum += m[0];
    non_sum += m[1];
  }
  if (sec_votes != non_votes) return sec_votes > non_votes ? Label::security : Label::non_security;
  if (sec_sum != non_sum) return sec_sum > non_sum ? Label::security : Label::non_security;
  if (cls[0] != cls[1]) return cls[0] > cls[1] ? Label::security : Label::non_security;
  return Label::security;
}

MaskedInstance toy_instance(const std::string& id, std::vector<std::string> tokens, Label label,
                            const SurrogateLexicon& lex) {
  PreprocessedIssue in{id, std::move(tokens), label, {0}};
  return apply_masks(in, lex);
}

}  // namespace

TEST(TrainConfig, DefaultsAndEcho) {
  const TrainConfig tc;
  EXPECT_EQ(tc.epochs, 6u);
  EXPECT_EQ(tc.batch_size, 32u);
  EXPECT_DOUBLE_EQ(tc.learning_rate, 2e-5);
  EXPECT_EQ(tc.max_sequence_length, 512u);
  EXPECT_EQ(TrainConfig::from_json(tc.to_json(), "train"), tc);
}

TEST(TrainConfig, RejectsBadValues) {
  TrainConfig tc;
  tc.batch_size = 0;
  EXPECT_THROW(tc.validate(), ValidationError);
  tc = TrainConfig{};
  tc.learning_rate = -1;
  EXPECT_THROW(tc.validate(), ValidationError);
  tc = TrainConfig{};
  EXPECT_THROW(tc.validate(128), ValidationError);
  auto j = TrainConfig{}.to_json();
  j["unknown_key"] = 1;
  EXPECT_THROW(TrainConfig::from_json(j, "train"), ValidationError);
}

TEST(Decide, SecurityMajority) {
  const auto o = decide("x", {probs(0.9), probs(0.6), probs(0.2)}, probs(0.3), 0.5);
  EXPECT_EQ(o.final_label, Label::security);
  EXPECT_EQ(o.decision_path, DecisionPath::mask_vote);
  EXPECT_EQ(o.vote_tally[0], 2u);
  EXPECT_EQ(o.vote_tally[1], 1u);
  EXPECT_DOUBLE_EQ(o.max_confidence, 0.9);
}

TEST(Decide, ClsFallbackThreshold) {
  const auto o = decide("x", {}, probs(0.51), 0.5);
  EXPECT_EQ(o.final_label, Label::security);
  EXPECT_EQ(o.decision_path, DecisionPath::cls_fallback);
  EXPECT_DOUBLE_EQ(o.max_confidence, 0.51);
  EXPECT_EQ(decide("x", {}, probs(0.5), 0.5).final_label, Label::non_security);
  EXPECT_EQ(decide("x", {}, probs(0.7), 0.8).final_label, Label::non_security);
}

TEST(Decide, TieBrokenByMeanProbability) {
  // 0.8 and 0.3: one vote each, mean security 0.55.
  const auto o = decide("x", {probs(0.8), probs(0.3)}, probs(0.1), 0.5);
  EXPECT_EQ(o.final_label, Label::security);
  EXPECT_EQ(o.decision_path, DecisionPath::mask_vote);
  const auto n = decide("x", {probs(0.6), probs(0.2)}, probs(0.9), 0.5);
  EXPECT_EQ(n.final_label, Label::non_security);
}

TEST(Decide, TieChainFallsToClsThenSecurity) {
  EXPECT_EQ(decide("x", {probs(0.75), probs(0.25)}, probs(0.2), 0.5).final_label, Label::non_security);
  EXPECT_EQ(decide("x", {probs(0.75), probs(0.25)}, probs(0.8), 0.5).final_label, Label::security);
  EXPECT_EQ(decide("x", {probs(0.75), probs(0.25)}, probs(0.5), 0.5).final_label, Label::security);
}

TEST(Decide, EvenSplitProbabilityVotesSecurity) {
  const auto o = decide("x", {probs(0.5)}, probs(0.0), 0.5);
  EXPECT_EQ(o.vote_tally[0], 1u);
  EXPECT_EQ(o.final_label, Label::security);
}

TEST(Decide, EnumeratedVoteTable) {
  // Every assignment of up to five masks over a small probability grid, against the reference rule.
  const std::vector<double> grid{0.0, 0.25, 0.5, 0.75, 1.0};
  const std::vector<double> cls_grid{0.2, 0.5, 0.8};
  std::size_t cases = 0;
  for (std::size_t n = 0; n <= 5; ++n) {
    std::size_t combos = 1;
    for (std::size_t i = 0; i < n; ++i) combos *= grid.size();
    for (std::size_t code = 0; code < combos; ++code) {
      std::vector<ClassProbs> masks;
      std::size_t c = code;
      for (std::size_t i = 0; i < n; ++i, c /= grid.size()) masks.push_back(probs(grid[c % grid.size()]));
      for (double cls : cls_grid) {
        const auto o = decide("x", masks, probs(cls), 0.5);
        ASSERT_EQ(o.final_label, reference_label(masks, probs(cls), 0.5)) << "n=" << n << " code=" << code;
        ASSERT_EQ(o.vote_tally[0] + o.vote_tally[1], n);
        ASSERT_EQ(o.decision_path, n == 0 ? DecisionPath::cls_fallback : DecisionPath::mask_vote);
        ++cases;
      }
    }
  }
  EXPECT_EQ(cases, 3u * (1 + 5 + 25 + 125 + 625 + 3125));
}

TEST(Decide, TallyInvariantUnderMonotoneTransform) {
  SeededRng rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<ClassProbs> masks, squashed;
    const auto n = 1 + rng.uniform_index(7);
    for (std::size_t i = 0; i < n; ++i) {
      const double logit_gap = rng.normal() * 3.0;
      masks.push_back(probs(1.0 / (1.0 + std::exp(-logit_gap))));
      // Cube the gap: same sign, different magnitude.
      squashed.push_back(probs(1.0 / (1.0 + std::exp(-logit_gap * logit_gap * logit_gap))));
    }
    EXPECT_EQ(decide("x", masks, probs(0.5), 0.5).vote_tally, decide("x", squashed, probs(0.5), 0.5).vote_tally);
  }
}

TEST(Classifier, InitialLossNearChance) {
  auto tc = small_train_config();
  const auto model = init_classifier(small_world().base, tc);
  const auto loss = mean_loss(model, testing_support::masked_world());
  EXPECT_NEAR(loss, std::log(2.0), 0.15);
}

TEST(Classifier, SeededTrainingIsDeterministic) {
  auto train = testing_support::masked_world();
  train.resize(24);
  auto tc = small_train_config(5);
  tc.epochs = 1;
  const auto a = fine_tune(small_world().base, train, tc);
  const auto b = fine_tune(small_world().base, train, tc);
  EXPECT_EQ(a.initial_weights_digest, b.initial_weights_digest);
  ASSERT_EQ(a.first_epoch_step_losses.size(), b.first_epoch_step_losses.size());
  for (std::size_t i = 0; i < a.first_epoch_step_losses.size(); ++i) {
    EXPECT_NEAR(a.first_epoch_step_losses[i], b.first_epoch_step_losses[i], 1e-4);
  }
  EXPECT_EQ(a.first_epoch_step_losses.size(), 3u);
  tc.seed = 6;
  EXPECT_NE(init_classifier(small_world().base, tc).initial_weights_digest, a.initial_weights_digest);
}

TEST(Classifier, LossFallsOnSeparableData) {
  SurrogateLexicon lex;
  lex.lists[0] = {{"exploit", 3.0, 1}, {"overflow", 2.0, 2}};
  lex.lists[1] = {{"button", 3.0, 1}, {"color", 2.0, 2}};
  std::vector<MaskedInstance> train;
  SeededRng rng(4);
  const std::vector<std::string> filler{"app", "user", "file", "open", "window", "page"};
  for (int i = 0; i < 200; ++i) {
    const bool sec = i % 2 == 0;
    std::vector<std::string> tokens;
    for (int t = 0; t < 6; ++t) tokens.push_back(filler[rng.uniform_index(filler.size())]);
    tokens.insert(tokens.begin() + static_cast<long>(rng.uniform_index(6)),
                  sec ? (rng.bernoulli(0.5) ? "exploit" : "overflow") : (rng.bernoulli(0.5) ? "button" : "color"));
    train.push_back(toy_instance("t/t#" + std::to_string(i), tokens, sec ? Label::security : Label::non_security, lex));
  }
  auto tc = small_train_config(2);
  tc.epochs = 2;
  tc.batch_size = 16;
  const auto model = fine_tune(small_world().base, train, tc);
  ASSERT_EQ(model.epoch_losses.size(), 2u);
  EXPECT_LT(model.epoch_losses[1], model.epoch_losses[0]);
}

TEST(Classifier, EmptyTrainingSetRejected) {
  EXPECT_THROW(fine_tune(small_world().base, {}, small_train_config()), ValidationError);
}

TEST(Classifier, PredictionsAreDistributions) {
  const auto model = init_classifier(small_world().base, small_train_config());
  auto data = testing_support::masked_world();
  data.resize(20);
  for (const auto& inst : data) {
    const auto o = predict(model, inst);
    EXPECT_NEAR(o.cls_probabilities[0] + o.cls_probabilities[1], 1.0, 1e-9);
    for (const auto& p : o.per_mask_probabilities) EXPECT_NEAR(p[0] + p[1], 1.0, 1e-9);
    EXPECT_EQ(o.per_mask_probabilities.size(), inst.mask_positions.size());
    EXPECT_EQ(o.final_label, reference_label(o.per_mask_probabilities, o.cls_probabilities, 0.5));
  }
}

TEST(Classifier, BatchMatchesSingle) {
  const auto model = init_classifier(small_world().base, small_train_config());
  auto data = testing_support::masked_world();
  data.resize(30);
  const auto batch = predict_batch(model, data);
  ASSERT_EQ(batch.size(), data.size());
  for (std::size_t i = 0; i < data.size(); ++i) EXPECT_EQ(batch[i], predict(model, data[i]));
  EXPECT_TRUE(predict_batch(model, {}).empty());
}

TEST(Classifier, MasksPastTruncationFallBackToCls) {
  SurrogateLexicon lex;
  lex.lists[0] = {{"exploit", 1.0, 1}};
  std::vector<std::string> tokens(60, "app");
  tokens.push_back("exploit");
  auto inst = toy_instance("t/t#1", tokens, Label::security, lex);
  ASSERT_EQ(inst.mask_positions.size(), 1u);
  const auto model = init_classifier(small_world().base, small_train_config());
  const auto o = predict(model, inst);
  EXPECT_TRUE(o.per_mask_probabilities.empty());
  EXPECT_EQ(o.decision_path, DecisionPath::cls_fallback);
}

TEST(Classifier, CheckpointRoundTrip) {
  auto train = testing_support::masked_world();
  train.resize(16);
  auto tc = small_train_config(9);
  tc.epochs = 1;
  const auto model = fine_tune(small_world().base, train, tc);
  const auto dir = testing_support::fresh_dir("ckpt");
  save_classifier(dir / "model", model);
  const auto loaded = load_classifier(dir / "model");
  EXPECT_EQ(loaded.weights_digest(), model.weights_digest());
  EXPECT_EQ(loaded.config, model.config);
  for (const auto& inst : train) {
    const auto a = model.logits(inst).rows;
    const auto b = loaded.logits(inst).rows;
    ASSERT_EQ(a.rows(), b.rows());
    EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-6);
  }
  const auto o = predict(model, train[0]);
  EXPECT_EQ(outcome_from_json(to_json(o), "outcome"), o);
}
