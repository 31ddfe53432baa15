#include <gtest/gtest.h>

#include "issuemask/common.hpp"
#include "issuemask/metrics.hpp"
#include "issuemask/rng.hpp"

using namespace issuemask;

namespace {

constexpr auto S = Label::security;
constexpr auto N = Label::non_security;

struct Counts {
  double p, r, f;
};

// Counting straight from the label lists, one class at a time.
Counts per_class(const std::vector<Label>& truth, const std::vector<Label>& pred, Label k) {
  double tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (pred[i] == k && truth[i] == k) ++tp;
    if (pred[i] == k && truth[i] != k) ++fp;
    if (pred[i] != k && truth[i] == k) ++fn;
  }
  const double p = tp + fp > 0 ? tp / (tp + fp) : 0.0;
  const double r = tp + fn > 0 ? tp / (tp + fn) : 0.0;
  const double f = p + r > 0 ? 2 * p * r / (p + r) : 0.0;
  return {p, r, f};
}

std::vector<Label> random_labels(SeededRng& rng, std::size_t n, double p_sec) {
  std::vector<Label> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(rng.bernoulli(p_sec) ? S : N);
  return out;
}

}  // namespace

TEST(Prf, BinaryExample) {
  // TP 3, FP 1, FN 1, TN 2.
  const std::vector<Label> truth{S, S, S, S, N, N, N};
  const std::vector<Label> pred{S, S, S, N, S, N, N};
  const auto prf = compute_prf(truth, pred, S, Weighting::binary_positive);
  EXPECT_DOUBLE_EQ(prf.precision, 0.75);
  EXPECT_DOUBLE_EQ(prf.recall, 0.75);
  EXPECT_DOUBLE_EQ(prf.f1, 0.75);
  EXPECT_TRUE(prf.degenerate.empty());
}

TEST(Prf, PerfectPredictions) {
  const std::vector<Label> truth{S, N, S, N};
  const auto prf = compute_prf(truth, truth, S, Weighting::class_weighted);
  EXPECT_EQ(prf.precision, 1.0);
  EXPECT_EQ(prf.recall, 1.0);
  EXPECT_EQ(prf.f1, 1.0);
}

TEST(Prf, DegenerateDenominators) {
  const std::vector<Label> truth{N, N};
  const std::vector<Label> pred{N, N};
  const auto prf = compute_prf(truth, pred, S, Weighting::binary_positive);
  EXPECT_EQ(prf.precision, 0.0);
  EXPECT_EQ(prf.recall, 0.0);
  EXPECT_EQ(prf.degenerate, (std::vector<std::string>{"precision", "recall", "f1"}));
  EXPECT_THROW(compute_prf(std::vector<Label>{}, std::vector<Label>{}, S, Weighting::binary_positive), ValidationError);
}

TEST(Prf, MatchesDirectCountingOnRandomSets) {
  SeededRng rng(500);
  for (int trial = 0; trial < 500; ++trial) {
    const auto n = 1 + rng.uniform_index(60);
    const auto truth = random_labels(rng, n, 0.5);
    const auto pred = random_labels(rng, n, rng.uniform());
    const auto sec = per_class(truth, pred, S);
    const auto non = per_class(truth, pred, N);
    const double ws = static_cast<double>(std::count(truth.begin(), truth.end(), S)) / static_cast<double>(n);

    const auto b = compute_prf(truth, pred, S, Weighting::binary_positive);
    ASSERT_NEAR(b.precision, sec.p, 1e-12);
    ASSERT_NEAR(b.recall, sec.r, 1e-12);
    ASSERT_NEAR(b.f1, sec.f, 1e-12);

    const auto w = compute_prf(truth, pred, S, Weighting::class_weighted);
    ASSERT_NEAR(w.precision, ws * sec.p + (1 - ws) * non.p, 1e-12);
    ASSERT_NEAR(w.recall, ws * sec.r + (1 - ws) * non.r, 1e-12);
    ASSERT_NEAR(w.f1, ws * sec.f + (1 - ws) * non.f, 1e-12);
    // Weighted recall is plain accuracy.
    double correct = 0;
    for (std::size_t i = 0; i < n; ++i) correct += truth[i] == pred[i];
    ASSERT_NEAR(w.recall, correct / static_cast<double>(n), 1e-12);
  }
}

TEST(Decompose, SubsetsAddUp) {
  SeededRng rng(100);
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = 1 + rng.uniform_index(80);
    std::vector<PredictionOutcome> outcomes(n);
    std::vector<Label> truths;
    std::size_t mask_count = 0;
    for (auto& o : outcomes) {
      o.final_label = rng.bernoulli(0.5) ? S : N;
      o.decision_path = rng.bernoulli(0.7) ? DecisionPath::mask_vote : DecisionPath::cls_fallback;
      mask_count += o.decision_path == DecisionPath::mask_vote;
      truths.push_back(rng.bernoulli(0.5) ? S : N);
    }
    const auto d = confusion_decompose(outcomes, truths);
    ASSERT_EQ(d.mask_subset + d.cls_subset, d.overall);
    ASSERT_EQ(total(d.overall), n);
    ASSERT_EQ(total(d.mask_subset), mask_count);
    std::vector<Label> preds;
    for (const auto& o : outcomes) preds.push_back(o.final_label);
    ASSERT_EQ(d.overall, confusion_matrix(truths, preds));
  }
}

TEST(Decompose, EmptySubsetIsReportedNotThrown) {
  std::vector<PredictionOutcome> outcomes(2);
  outcomes[0].final_label = S;
  outcomes[0].decision_path = DecisionPath::mask_vote;
  outcomes[1].final_label = N;
  outcomes[1].decision_path = DecisionPath::mask_vote;
  const auto d = confusion_decompose(outcomes, {S, N});
  EXPECT_EQ(total(d.cls_subset), 0u);
  EXPECT_EQ(d.mask_weighted.f1, 1.0);
  EXPECT_THROW(confusion_decompose(outcomes, {S}), ValidationError);
}

TEST(MetricsJson, RoundTrip) {
  std::vector<PredictionOutcome> outcomes(3);
  outcomes[0].final_label = S;
  outcomes[1].decision_path = DecisionPath::mask_vote;
  const auto d = confusion_decompose(outcomes, {S, S, N});
  EXPECT_EQ(decomposition_from_json(to_json(d), "d"), d);
  const Prf p{0.5, 0.25, 1.0 / 3.0, {"f1"}};
  EXPECT_EQ(prf_from_json(to_json(p), "p"), p);
}
