#include <gtest/gtest.h>

#include <set>

#include "issuemask/common.hpp"
#include "issuemask/cross_validation.hpp"
#include "issuemask/report.hpp"
#include "issuemask/rng.hpp"
#include "test_support.hpp"

using namespace issuemask;
using testing_support::small_world;

namespace {

std::vector<Label> alternating(std::size_t n) {
  std::vector<Label> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(i % 2 == 0 ? Label::security : Label::non_security);
  return out;
}

CvConfig small_cv(std::size_t folds) {
  CvConfig cfg;
  cfg.folds = folds;
  cfg.fold_seed = 4;
  cfg.train = testing_support::small_train_config(4);
  cfg.train.epochs = 1;
  return cfg;
}

}  // namespace

TEST(Folds, TenFoldsOfAThousand) {
  const auto labels = alternating(1000);
  const auto folds = stratified_folds(labels, 10, 1);
  ASSERT_EQ(folds.size(), 10u);
  std::set<std::size_t> seen;
  for (const auto& fold : folds) {
    EXPECT_EQ(fold.size(), 100u);
    std::size_t sec = 0;
    for (auto i : fold) {
      EXPECT_TRUE(seen.insert(i).second) << "index in two folds";
      sec += labels[i] == Label::security;
    }
    EXPECT_EQ(sec, 50u);
    EXPECT_TRUE(std::is_sorted(fold.begin(), fold.end()));
  }
  EXPECT_EQ(seen.size(), 1000u);
  EXPECT_EQ(stratified_folds(labels, 10, 1), folds);
  EXPECT_NE(stratified_folds(labels, 10, 2), folds);
}

TEST(Folds, UnevenSizesDifferByAtMostOne) {
  SeededRng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Label> labels;
    const auto n = 10 + rng.uniform_index(200);
    for (std::size_t i = 0; i < n; ++i) labels.push_back(rng.bernoulli(0.3) ? Label::security : Label::non_security);
    const auto k = 2 + rng.uniform_index(9);
    const auto folds = stratified_folds(labels, k, trial);
    std::size_t lo = n, hi = 0, lo_sec = n, hi_sec = 0, covered = 0;
    for (const auto& f : folds) {
      std::size_t sec = 0;
      for (auto i : f) sec += labels[i] == Label::security;
      lo = std::min(lo, f.size());
      hi = std::max(hi, f.size());
      lo_sec = std::min(lo_sec, sec);
      hi_sec = std::max(hi_sec, sec);
      covered += f.size();
    }
    ASSERT_EQ(covered, n);
    ASSERT_LE(hi - lo, 1u);
    ASSERT_LE(hi_sec - lo_sec, 1u);
  }
}

TEST(Folds, RejectsBadCounts) {
  EXPECT_THROW(stratified_folds(alternating(10), 1, 0), ValidationError);
  EXPECT_THROW(stratified_folds(alternating(10), 11, 0), ValidationError);
}

TEST(CrossValidation, FoldHygieneAndSummary) {
  const auto& w = small_world();
  std::vector<FoldContext> seen;
  CvHooks hooks;
  hooks.on_fold = [&](const FoldContext& ctx) { seen.push_back(ctx); };
  const auto report = run_cross_validation(w.issues, w.lexicon, MaskingCondition::surrogate, w.base, small_cv(3), hooks);

  ASSERT_EQ(report.folds.size(), 3u);
  ASSERT_EQ(seen.size(), 3u);
  for (const auto& ctx : seen) {
    const std::set<std::string> train(ctx.train_ids.begin(), ctx.train_ids.end());
    for (const auto& id : ctx.validation_ids) EXPECT_FALSE(train.contains(id));
    EXPECT_EQ(ctx.train_ids.size() + ctx.validation_ids.size(), w.issues.size());
    EXPECT_EQ(ctx.initial_weights_digest, seen.front().initial_weights_digest);
  }
  double f1_sum = 0;
  for (const auto& f : report.folds) f1_sum += f.weighted.f1;
  EXPECT_NEAR(report.summary.at("f1").mean, f1_sum / 3.0, 1e-12);
  EXPECT_EQ(total(report.decomposition.overall), w.issues.size());
  EXPECT_EQ(report.condition, "surrogate");

  const auto dir = testing_support::fresh_dir("cv");
  save_eval_report(dir / "report.json", report);
  EXPECT_EQ(load_eval_report(dir / "report.json"), report);
}

TEST(CrossValidation, SummaryUsesSampleStd) {
  std::vector<FoldMetrics> folds(3);
  folds[0].weighted.f1 = 0.8;
  folds[1].weighted.f1 = 0.9;
  folds[2].weighted.f1 = 1.0;
  const auto s = summarize(folds);
  EXPECT_NEAR(s.at("f1").mean, 0.9, 1e-12);
  EXPECT_NEAR(s.at("f1").std, 0.1, 1e-12);
}

TEST(CrossValidation, UnlabeledCorpusRejected) {
  auto issues = small_world().issues;
  issues[0].label.reset();
  EXPECT_THROW(run_cross_validation(issues, small_world().lexicon, MaskingCondition::surrogate, small_world().base,
                                    small_cv(2)),
               ValidationError);
}

TEST(Ablation, SharedFoldsAndRoundTrip) {
  const auto& w = small_world();
  auto issues = w.issues;
  const auto random_for = [&](std::uint64_t seed) { return sample_random_keywords(w.vocabulary, w.lexicon, 20, seed); };
  const auto report = run_ablation(issues, w.lexicon, random_for, w.base, small_cv(2), {1, 2});
  ASSERT_EQ(report.surrogate.size(), 2u);
  ASSERT_EQ(report.random.size(), 2u);
  for (std::size_t s = 0; s < 2; ++s) {
    for (std::size_t k = 0; k < 2; ++k) {
      EXPECT_EQ(report.surrogate[s].folds[k].validation_ids, report.random[s].folds[k].validation_ids);
      EXPECT_EQ(report.surrogate[s].folds[k].initial_weights_digest, report.random[s].folds[k].initial_weights_digest);
    }
  }
  EXPECT_EQ(report.stats.hypotheses, 3);
  EXPECT_DOUBLE_EQ(report.stats.threshold, 0.05 / 3);
  ASSERT_EQ(report.stats.comparisons.size(), 3u);
  for (const auto& c : report.stats.comparisons) EXPECT_EQ(c.n, 4u);

  const auto dir = testing_support::fresh_dir("ablation");
  save_ablation_report(dir / "ablation.json", report);
  EXPECT_EQ(load_ablation_report(dir / "ablation.json"), report);
}
