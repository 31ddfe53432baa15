#include <gtest/gtest.h>

#include <set>

#include "issuemask/common.hpp"
#include "issuemask/synthetic.hpp"

using namespace issuemask;

TEST(Synthetic, DeterministicAndBalanced) {
  SyntheticConfig cfg;
  cfg.per_class = 25;
  cfg.seed = 8;
  const auto a = generate_synthetic_corpus(cfg);
  const auto b = generate_synthetic_corpus(cfg);
  ASSERT_EQ(a.issues.size(), 50u);
  EXPECT_EQ(a.issues, b.issues);
  std::size_t sec = 0;
  std::set<std::string> ids;
  for (const auto& i : a.issues) {
    sec += i.label == Label::security;
    EXPECT_TRUE(ids.insert(i.id).second);
    EXPECT_FALSE(i.body.empty());
  }
  EXPECT_EQ(sec, 25u);
  EXPECT_TRUE(std::is_sorted(a.issues.begin(), a.issues.end(),
                             [](const auto& x, const auto& y) { return x.id < y.id; }));
  cfg.seed = 9;
  EXPECT_NE(generate_synthetic_corpus(cfg).issues, a.issues);
}

TEST(Synthetic, ClassVocabulariesAreDisjoint) {
  const auto& sec = synthetic_class_vocabulary(Label::security);
  const auto& non = synthetic_class_vocabulary(Label::non_security);
  const std::set<std::string> s(sec.begin(), sec.end());
  for (const auto& w : non) EXPECT_FALSE(s.contains(w)) << w;
  EXPECT_FALSE(synthetic_shared_vocabulary().empty());
}

TEST(Synthetic, PretrainingTextIsSeeded) {
  SyntheticConfig cfg;
  cfg.seed = 3;
  const auto a = generate_pretraining_text(cfg, 10);
  EXPECT_EQ(a.size(), 10u);
  EXPECT_EQ(generate_pretraining_text(cfg, 10), a);
  SyntheticConfig bad;
  bad.per_class = 0;
  EXPECT_THROW(bad.validate(), ValidationError);
}
