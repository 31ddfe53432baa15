#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "issuemask/common.hpp"
#include "issuemask/lemmatizer.hpp"
#include "issuemask/normalize.hpp"
#include "issuemask/preprocess.hpp"
#include "issuemask/rng.hpp"
#include "issuemask/structure.hpp"
#include "issuemask/synthetic.hpp"

using namespace issuemask;
namespace fs = std::filesystem;

namespace {

std::string join(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

// Random issue-like text mixing prose, markdown, code, urls and numbers.
std::string noisy_text(SeededRng& rng) {
  static const std::vector<std::string> pieces{
      "The", "app", "crashes", "when", "saving", "## Steps", "- [ ] reproduce", "<b>bold</b>",
      "https://example.com/a0ffee12/report", "/usr/lib/libfoo.so", "404", "!!", "buffer", "overflows",
      "were", "exploited", "by", "attackers", "foo_bar()", "x.y.z", "Running", "tests", "failed",
      "`inline`", "e-mail", "don't", "\n", "\n```\nint main() {}\n```\n", "caf\xc3\xa9", "ran", "better"};
  std::string out;
  const auto n = 3 + rng.uniform_index(25);
  for (std::size_t i = 0; i < n; ++i) {
    out += pieces[rng.uniform_index(pieces.size())];
    out += ' ';
  }
  return out;
}

}  // namespace

TEST(Structure, Examples) {
  EXPECT_EQ(strip_structure("## Steps\n- [ ] reproduce"), "Steps reproduce");
  EXPECT_EQ(strip_structure("<b>crash</b> on load"), "crash on load");
  EXPECT_EQ(strip_structure("see https://host/a0ffee/report"), "see report");
  EXPECT_EQ(strip_structure(""), "");
  EXPECT_EQ(strip_structure("plain prose stays"), "plain prose stays");
}

TEST(Structure, HexRule) {
  EXPECT_TRUE(is_hex_like("a0ffee"));
  EXPECT_TRUE(is_hex_like("DEADBEEF1"));
  EXPECT_FALSE(is_hex_like("deadbeef"));  // no digit
  EXPECT_FALSE(is_hex_like("a0ff1"));     // too short
  EXPECT_FALSE(is_hex_like("a0ffeg"));
}

TEST(Structure, PathsRemoved) {
  EXPECT_EQ(strip_structure("open /etc/passwd now"), "open now");
  EXPECT_EQ(strip_structure("edit C:\\Users\\me\\config.ini please"), "edit please");
  EXPECT_TRUE(is_filesystem_path("src/main.cpp"));
  EXPECT_FALSE(is_filesystem_path("and/or"));
}

TEST(Normalize, Examples) {
  EXPECT_EQ(normalize("Crash 404 !!"), "crash");
  EXPECT_EQ(normalize("A B  CD"), "cd");
  EXPECT_EQ(normalize(""), "");
  EXPECT_EQ(normalize("  Use-After-Free, in x86 code. "), "use-after-free in code");
}

TEST(NlFilter, Examples) {
  const NlFilterConfig config;
  EXPECT_TRUE(is_code_or_log_line("stack trace at main java lang nullpointerexception", config,
                                  StopWords::english_v1()));
  EXPECT_EQ(filter_non_natural_language("the app crashes when saving"), "the app crashes when saving");
  EXPECT_EQ(filter_non_natural_language("foo_bar(x); baz.qux(1, 2);\nat com.acme.Main.run(Main.java:42)"), "");
  EXPECT_EQ(filter_non_natural_language("intro\n```\nint main() {}\n```\noutro"), "intro\noutro");
}

TEST(NlFilter, DensityThresholdIsConfigurable) {
  NlFilterConfig loose;
  loose.max_symbol_density = 0.9;
  loose.max_code_density = 1.1;
  loose.match_trace_patterns = false;
  const std::string line = "value = 0x1f; count += 12;";
  EXPECT_TRUE(is_code_or_log_line(line, NlFilterConfig{}, StopWords::english_v1()));
  EXPECT_FALSE(is_code_or_log_line(line, loose, StopWords::english_v1()));
}

TEST(Lemmatize, Examples) {
  const Preprocessor pp;
  EXPECT_EQ(pp.lemmatize_and_filter("overflows were exploited"), (std::vector<std::string>{"overflow", "exploit"}));
  EXPECT_TRUE(pp.lemmatize_and_filter("the a an").empty());
  EXPECT_EQ(pp.lemmatize_and_filter("security"), (std::vector<std::string>{"security"}));
}

TEST(Lemmatize, PosAware) {
  EXPECT_EQ(lemmatize("ran", Pos::verb), "run");
  EXPECT_EQ(lemmatize("better", Pos::adjective), "good");
  EXPECT_EQ(lemmatize("vulnerabilities", Pos::noun), "vulnerability");
  EXPECT_EQ(lemmatize("fine-tuned", Pos::verb), "fine-tune");
  EXPECT_EQ(lemmatize("quickly", Pos::adverb), "quickly");
}

TEST(Lemmatize, UnknownBackendIsHardError) {
  PreprocessConfig config;
  config.tagger = "spacy-large";
  EXPECT_THROW(Preprocessor{config}, BackendUnavailableError);
}

TEST(Pipeline, TitleAndBodyJoined) {
  const Preprocessor pp;
  IssueReport issue;
  issue.id = "o/r#1";
  issue.title = "Heap overflow";
  issue.body = "## Details\nAttackers exploited the parser.";
  issue.label = Label::security;
  const auto out = pp.process(issue);
  EXPECT_EQ(out.issue_id, "o/r#1");
  EXPECT_EQ(out.label, Label::security);
  EXPECT_EQ(out.tokens, (std::vector<std::string>{"heap", "overflow", "detail", "attacker", "exploit", "parser"}));
  ASSERT_FALSE(out.phrase_breaks.empty());
  EXPECT_EQ(out.phrase_breaks.front(), 0u);
}

TEST(Pipeline, PropertiesOnRandomText) {
  const Preprocessor pp;
  const auto& stop = pp.stopwords();
  SeededRng rng(2024);
  for (int trial = 0; trial < 400; ++trial) {
    const auto text = noisy_text(rng);
    const auto tokens = pp.tokens(text);
    // closure
    for (const auto& t : tokens) {
      EXPECT_TRUE(is_valid_token(t)) << t;
      EXPECT_FALSE(stop.contains(t)) << t;
    }
    // idempotence
    EXPECT_EQ(pp.tokens(join(tokens)), tokens) << text;
    // determinism
    EXPECT_EQ(pp.tokens(text), tokens);
  }
}

TEST(Pipeline, OrderPreserved) {
  const Preprocessor pp;
  EXPECT_EQ(pp.tokens("zebra apple mango"), (std::vector<std::string>{"zebra", "apple", "mango"}));
}

TEST(Pipeline, SyntheticCorpusIsIdempotent) {
  const Preprocessor pp;
  SyntheticConfig sc;
  sc.per_class = 30;
  for (const auto& issue : generate_synthetic_corpus(sc).issues) {
    const auto tokens = pp.process(issue).tokens;
    EXPECT_EQ(pp.tokens(join(tokens)), tokens);
  }
}

TEST(StopWordList, VersionedAndLoadable) {
  const auto& en = StopWords::english_v1();
  EXPECT_EQ(en.version(), "stopwords-en-v1");
  EXPECT_TRUE(en.contains("the"));
  EXPECT_FALSE(en.contains("security"));
  const auto dir = fs::temp_directory_path() / "issuemask_stop";
  fs::create_directories(dir);
  std::ofstream(dir / "tiny-v2.txt") << "# tiny\nfoo\nbar\n";
  const auto tiny = StopWords::load(dir / "tiny-v2.txt");
  EXPECT_EQ(tiny.size(), 2u);
  EXPECT_EQ(tiny.version(), "tiny-v2");
  EXPECT_NE(tiny.digest(), en.digest());
}

TEST(PreprocessedFile, RoundTripWithPhraseBreaks) {
  const auto dir = fs::temp_directory_path() / "issuemask_pp_rt";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const Preprocessor pp;
  SyntheticConfig sc;
  sc.per_class = 5;
  std::vector<PreprocessedIssue> issues;
  for (const auto& issue : generate_synthetic_corpus(sc).issues) issues.push_back(pp.process(issue));
  save_preprocessed(dir / "p.jsonl", issues, {}, {{"preprocess_digest", pp.digest()}});
  const auto loaded = load_preprocessed(dir / "p.jsonl");
  EXPECT_TRUE(loaded.has_phrase_breaks);
  EXPECT_EQ(loaded.issues, issues);
}

TEST(PreprocessDigest, TracksConfiguration) {
  PreprocessConfig a;
  PreprocessConfig b;
  b.filter.max_symbol_density = 0.5;
  EXPECT_EQ(Preprocessor(a).digest(), Preprocessor(a).digest());
  EXPECT_NE(Preprocessor(a).digest(), Preprocessor(b).digest());
}
