#include <gtest/gtest.h>

#include <filesystem>

#include "issuemask/common.hpp"
#include "issuemask/rng.hpp"
#include "issuemask/surrogates.hpp"

using namespace issuemask;
namespace fs = std::filesystem;

namespace {

std::vector<ScoredTerm> descending(const std::string& prefix, std::size_t n, double top = 100.0) {
  std::vector<ScoredTerm> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({prefix + std::to_string(1000 + i), top - static_cast<double>(i)});
  return out;
}

std::map<std::string, WordStats> vocab(const std::string& prefix, std::size_t n) {
  std::map<std::string, WordStats> out;
  for (std::size_t i = 0; i < n; ++i) out[prefix + std::to_string(i)] = {1.0 + static_cast<double>(i % 7), 1.0};
  return out;
}

}  // namespace

TEST(Conflicts, HigherScoreWins) {
  const auto r = resolve_conflicts({{"token", 8.0}, {"exploit", 4.0}}, {{"token", 5.0}, {"button", 2.0}});
  EXPECT_EQ(r.lists[0], (std::vector<ScoredTerm>{{"token", 8.0}, {"exploit", 4.0}}));
  EXPECT_EQ(r.lists[1], (std::vector<ScoredTerm>{{"button", 2.0}}));
}

TEST(Conflicts, TiesDiscarded) {
  const auto r = resolve_conflicts({{"build", 3.0}, {"xss", 1.0}}, {{"build", 3.0}});
  EXPECT_EQ(r.lists[0], (std::vector<ScoredTerm>{{"xss", 1.0}}));
  EXPECT_TRUE(r.lists[1].empty());
  EXPECT_EQ(r.tied, (std::vector<std::string>{"build"}));
}

TEST(Conflicts, PropertiesOnRandomInputs) {
  SeededRng rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    std::array<std::vector<ScoredTerm>, 2> in;
    for (auto& list : in) {
      for (int w = 0; w < 20; ++w) {
        if (rng.bernoulli(0.5)) list.push_back({"w" + std::to_string(w), static_cast<double>(rng.uniform_index(5))});
      }
      sort_scored(list);
    }
    const auto out = resolve_conflicts(in[0], in[1]);
    std::set<std::string> a, b;
    for (const auto& t : out.lists[0]) a.insert(t.term);
    for (const auto& t : out.lists[1]) b.insert(t.term);
    for (const auto& t : a) EXPECT_FALSE(b.contains(t));
    for (std::size_t c = 0; c < 2; ++c) {
      for (const auto& t : out.lists[c]) {
        const auto it = std::find_if(in[c].begin(), in[c].end(), [&](const ScoredTerm& s) { return s.term == t.term; });
        ASSERT_NE(it, in[c].end());
        EXPECT_EQ(it->score, t.score);
      }
    }
  }
}

TEST(TopK, SelectsAndRanks) {
  ClassScores scores;
  scores.lists[0] = descending("s", 60);
  scores.lists[1] = descending("n", 60);
  const auto lex = select_top_k(scores, 50);
  ASSERT_EQ(lex.of(Label::security).size(), 50u);
  EXPECT_EQ(lex.of(Label::security)[0].rank, 1u);
  EXPECT_EQ(lex.of(Label::security)[0].keyword, "s1000");
  EXPECT_EQ(lex.of(Label::security)[49].rank, 50u);
  EXPECT_TRUE(lex.warnings.empty());
  lex.validate("lexicon");
}

TEST(TopK, DenyPromotesNext) {
  ClassScores scores;
  scores.lists[0] = descending("s", 60);
  scores.lists[1] = descending("n", 60);
  const auto lex = select_top_k(scores, 50, {}, {"s1000"});
  EXPECT_EQ(lex.of(Label::security)[0].keyword, "s1001");
  EXPECT_EQ(lex.of(Label::security)[0].rank, 1u);
  EXPECT_EQ(lex.of(Label::security).size(), 50u);
}

TEST(TopK, TruncationWarns) {
  ClassScores scores;
  scores.lists[0] = descending("s", 30);
  scores.lists[1] = descending("n", 60);
  const auto lex = select_top_k(scores, 50);
  EXPECT_EQ(lex.of(Label::security).size(), 30u);
  EXPECT_EQ(lex.warnings.size(), 1u);
}

TEST(TopK, AllowPinsBelowCutoff) {
  ClassScores scores;
  scores.lists[0] = descending("s", 10);
  scores.lists[1] = descending("n", 10);
  const auto lex = select_top_k(scores, 3, {"s1008"}, {});
  const auto kw = lex.keywords(Label::security);
  EXPECT_EQ(kw, (std::set<std::string>{"s1000", "s1001", "s1008"}));
  lex.validate("lexicon");
}

TEST(RandomLists, ExamplesAndInvariants) {
  std::array<std::map<std::string, WordStats>, kNumLabels> v{vocab("a", 500), vocab("a", 480)};
  ClassScores scores;
  for (int i = 0; i < 50; ++i) {
    scores.lists[0].push_back({"a" + std::to_string(i), 100.0 - i});
    scores.lists[1].push_back({"a" + std::to_string(100 + i), 100.0 - i});
  }
  const auto lex = select_top_k(scores, 50);
  const auto r = sample_random_keywords(v, lex, 50, 3);
  EXPECT_EQ(r.of(Label::security).size(), 50u);
  EXPECT_EQ(r.of(Label::non_security).size(), 50u);
  EXPECT_EQ(r.seed, std::optional<std::uint64_t>(3));
  const auto sec = r.keywords(Label::security);
  const auto non = r.keywords(Label::non_security);
  const auto all = lex.all_keywords();
  for (const auto& w : sec) {
    EXPECT_FALSE(non.contains(w));
    EXPECT_FALSE(all.contains(w));
  }
  for (const auto& w : non) EXPECT_FALSE(all.contains(w));
  EXPECT_EQ(sample_random_keywords(v, lex, 50, 3), r);
}

TEST(RandomLists, PropertyOverSeeds) {
  std::array<std::map<std::string, WordStats>, kNumLabels> v{vocab("w", 120), vocab("w", 140)};
  ClassScores scores;
  for (int i = 0; i < 10; ++i) {
    scores.lists[0].push_back({"w" + std::to_string(i), 50.0 - i});
    scores.lists[1].push_back({"w" + std::to_string(130 + i), 50.0 - i});
  }
  const auto lex = select_top_k(scores, 10);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto r = sample_random_keywords(v, lex, 40, seed);
    const auto sec = r.keywords(Label::security);
    const auto non = r.keywords(Label::non_security);
    ASSERT_EQ(sec.size(), 40u);
    ASSERT_EQ(non.size(), 40u);
    for (const auto& w : sec) ASSERT_FALSE(non.contains(w) || lex.all_keywords().contains(w));
    for (const auto& w : non) ASSERT_FALSE(lex.all_keywords().contains(w));
  }
}

TEST(RandomLists, ShortfallWhenPoolTooSmall) {
  std::array<std::map<std::string, WordStats>, kNumLabels> v{vocab("a", 30), vocab("b", 300)};
  EXPECT_THROW(sample_random_keywords(v, SurrogateLexicon{}, 50, 1), ShortfallError);
}

TEST(Mine, EndToEndOnTinyCorpus) {
  std::array<std::vector<RakeDocument>, kNumLabels> docs;
  docs[0] = {{{"heap", "overflow", "exploit"}, {0}}, {{"exploit", "token"}, {0}}};
  docs[1] = {{{"button", "color", "token"}, {0}}, {{"button"}, {0}}};
  const auto mined = mine_surrogates(docs, StopWords::english_v1(), 50, {}, {}, "digest");
  EXPECT_EQ(mined.lexicon.preprocess_digest, "digest");
  const auto sec = mined.lexicon.keywords(Label::security);
  const auto non = mined.lexicon.keywords(Label::non_security);
  EXPECT_TRUE(sec.contains("exploit"));
  EXPECT_TRUE(non.contains("button"));
  // token: security deg/freq 2/1, non-security 3/1
  EXPECT_TRUE(non.contains("token"));
  EXPECT_FALSE(sec.contains("token"));
  mined.lexicon.validate("lexicon");
  EXPECT_THROW(mine_surrogates({docs[0], {}}, StopWords::english_v1(), 50), ValidationError);
}

TEST(LexiconFile, RoundTrip) {
  const auto dir = fs::temp_directory_path() / "issuemask_lex";
  fs::create_directories(dir);
  ClassScores scores;
  scores.lists[0] = {{"exploit", 9.5}, {"xss", 9.5}, {"leak", 1.0 / 3.0}};
  scores.lists[1] = {{"button", 2.0}};
  auto lex = select_top_k(scores, 50);
  lex.preprocess_digest = "abc";
  save_lexicon(dir / "lex.json", lex);
  EXPECT_EQ(load_lexicon(dir / "lex.json"), lex);
  lex.seed = 17;
  save_lexicon(dir / "rand.json", lex, {}, "random_keyword_lists");
  EXPECT_EQ(load_lexicon(dir / "rand.json"), lex);
  const auto j = to_json(lex);
  EXPECT_TRUE(j.contains("security"));
  EXPECT_TRUE(j.contains("non_security"));
  EXPECT_EQ(j.at("k"), 50);
  EXPECT_EQ(j.at("seed"), 17);
}

TEST(LexiconFile, RejectsOverlap) {
  SurrogateLexicon lex;
  lex.lists[0] = {{"token", 2.0, 1}};
  lex.lists[1] = {{"token", 1.0, 1}};
  EXPECT_THROW(lex.validate("lexicon"), ValidationError);
  lex.lists[1] = {{"button", 1.0, 2}};
  EXPECT_THROW(lex.validate("lexicon"), ValidationError);
}
