#include "issuemask/pos_tagger.hpp"

#include <unordered_map>
#include <unordered_set>

#include "issuemask/common.hpp"
#include "issuemask/lemmatizer.hpp"

namespace issuemask {
namespace {

// Fine-grained tags used while resolving context; collapsed to Pos at the end.
enum class Tag {
  det,
  pron_subject,
  pron,
  prep,
  conj,
  modal,
  be,
  have,
  do_,
  to,
  adv,
  adj,
  comparative,
  noun,
  plural_or_3sg,
  verb,
  past,
  participle,
  gerund,
  ambiguous_irregular,
};

using WordSet = std::unordered_set<std::string_view>;

const WordSet kDeterminers = {"a",     "an",   "the",   "this",  "that",  "these",   "those", "each",
                              "every", "some", "any",   "no",    "all",   "both",    "either", "neither",
                              "another", "such", "my",  "your",  "his",   "her",     "its",   "our",
                              "their", "whose", "several", "many", "few",  "much",    "more",  "most",
                              "less",  "least", "other", "one",  "two",   "three"};
const WordSet kSubjectPronouns = {"he", "she", "it", "which", "who", "that", "this", "what", "there"};
const WordSet kPronouns = {"i",     "you",    "we",       "they",     "me",       "him",   "us",
                           "them",  "myself", "yourself", "himself",  "herself",  "itself", "ourselves",
                           "themselves", "whom", "everyone", "someone", "anyone", "nobody", "everybody",
                           "somebody", "anybody"};
const WordSet kPrepositions = {
    "in",      "on",     "at",      "by",     "for",    "with",   "about",  "against", "between", "into",
    "through", "during", "before",  "after",  "above",  "below",  "from",   "up",      "down",    "out",
    "off",     "over",   "under",   "of",     "via",    "per",    "without", "within", "across",  "along",
    "among",   "around", "behind",  "beyond", "despite", "except", "inside", "outside", "since",  "toward",
    "towards", "upon",   "onto",    "like",   "near",   "throughout", "unlike", "until", "till"};
const WordSet kConjunctions = {"and",  "or",     "but",   "nor",      "so",      "yet",   "if",
                               "because", "while", "although", "though", "unless", "when", "whenever",
                               "where", "wherever", "whether", "than",  "as",      "then", "once"};
const WordSet kModals = {"can",    "could",   "will",     "would", "shall",   "should",  "may",     "might",
                         "must",   "cannot",  "cant",     "wont",  "shouldnt", "couldnt", "wouldnt", "mustnt",
                         "lets",   "please"};
const WordSet kBe = {"be", "am", "is", "are", "was", "were", "been", "being", "isnt", "arent", "wasnt", "werent"};
const WordSet kHave = {"have", "has", "had", "having", "hasnt", "havent", "hadnt"};
const WordSet kDo = {"do", "does", "did", "doing", "done", "dont", "doesnt", "didnt"};
const WordSet kGet = {"get", "gets", "got", "gotten", "getting", "become", "becomes", "became", "seem", "seems",
                      "seemed", "remain", "remains", "remained", "stay", "stays", "stayed"};
const WordSet kAdverbs = {"not",      "very",      "too",      "just",      "also",     "only",      "even",
                          "still",    "already",   "again",    "always",    "never",    "often",     "sometimes",
                          "perhaps",  "maybe",     "now",      "here",      "there",    "soon",      "ever",
                          "almost",   "quite",     "rather",   "really",    "else",     "instead",   "anyway",
                          "afterwards", "towards", "besides",  "nowadays",  "regardless", "sideways", "upwards",
                          "downwards", "backwards", "forwards", "overseas", "indoors",  "outdoors",  "thus",
                          "hence",    "therefore", "however",  "otherwise", "somehow",  "somewhere", "anywhere",
                          "everywhere", "nowhere", "today",    "tomorrow",  "yesterday", "currently", "well",
                          "enough",   "away",      "back",     "far",       "ago",      "indeed",    "together"};
const WordSet kAdjectives = {
    "new",     "old",      "same",     "different", "possible", "available", "wrong",   "correct",  "invalid",
    "valid",   "empty",    "full",     "true",      "false",    "good",      "bad",     "great",    "small",
    "large",   "big",      "long",     "short",     "high",     "low",       "fast",    "slow",     "easy",
    "hard",    "simple",   "safe",     "unsafe",    "secure",   "insecure",  "strong",  "weak",     "open",
    "public",  "private",  "local",    "remote",    "global",   "current",   "previous", "next",    "last",
    "first",   "second",   "main",     "default",   "certain",  "clear",     "able",    "unable",   "sure",
    "free",    "real",     "whole",    "due",       "null",     "blank",     "broken",  "known",    "unknown",
    "missing", "existing", "malicious", "vulnerable", "sensitive", "arbitrary", "potential", "internal",
    "external", "additional", "specific", "multiple", "single",  "random",   "similar", "proper",   "latest",
    "early",   "late",     "quick",    "clean",     "deep",     "wide",      "cheap",   "heavy",    "light",
    "smart",   "tight",    "loose",    "risky",     "nice",     "close",     "unexpected", "unauthorized",
    "unauthenticated", "authenticated", "encrypted", "unencrypted", "outdated", "deprecated", "unused"};

// -ing words that are usually nouns.
const WordSet kIngNouns = {"warning",  "ceiling", "morning", "evening",  "building", "setting",  "meeting",
                           "wedding",  "pudding", "nothing", "something", "anything", "everything", "sibling",
                           "darling",  "offspring", "lightning", "awning", "earring", "herring", "icing",
                           "heading",  "padding", "bearing", "feeling", "painting", "string",  "thing",
                           "king",     "ring",    "wing",    "spring",  "swing",   "sting",   "during"};

// Regular-looking -ly words that are not adverbs.
const WordSet kLyNonAdverbs = {"family", "supply",  "reply",    "apply",   "assembly", "anomaly", "butterfly",
                               "fly",    "rely",    "ally",     "italy",   "jelly",    "belly",   "bully",
                               "july",   "holy",    "ugly",     "early",   "daily",    "friendly", "monthly",
                               "weekly", "likely",  "lonely",   "silly",   "only",     "multiply", "comply",
                               "imply",  "underly", "firefly",  "homily",  "lily",     "unlikely", "user-friendly",
                               "curly",  "hourly",  "yearly",   "costly",  "deadly",   "elderly", "lovely"};

const WordSet kAdjSuffixes = {"able", "ible", "ous", "ful", "less", "ive", "ical", "ish"};

// Irregular forms that are also common nouns or adjectives.
const WordSet kAmbiguousIrregulars = {"left", "found", "saw", "ground", "bound", "wound", "felt",
                                      "rose", "fell",  "spoke", "lit",  "lead",  "lay"};

const std::unordered_map<std::string_view, std::string_view> kParticiples = {
    {"broken", "break"},   {"known", "know"},     {"hidden", "hide"},     {"written", "write"},
    {"stolen", "steal"},   {"given", "give"},     {"taken", "take"},      {"frozen", "freeze"},
    {"chosen", "choose"},  {"forgotten", "forget"}, {"driven", "drive"},  {"shown", "show"},
    {"thrown", "throw"},   {"grown", "grow"},     {"drawn", "draw"},      {"blown", "blow"},
    {"spoken", "speak"},   {"sworn", "swear"},    {"torn", "tear"},       {"worn", "wear"},
    {"overridden", "override"}, {"overwritten", "overwrite"}, {"rewritten", "rewrite"}, {"mistaken", "mistake"},
    {"forbidden", "forbid"}, {"eaten", "eat"},    {"fallen", "fall"},     {"bitten", "bite"},
    {"shaken", "shake"},   {"proven", "prove"},   {"gotten", "get"},      {"ridden", "ride"},
    {"risen", "rise"},     {"seen", "see"},       {"done", "do"},         {"gone", "go"}};

bool ends_with_any(std::string_view w, const WordSet& suffixes) {
  for (auto s : suffixes) {
    if (w.size() > s.size() + 2 && w.ends_with(s)) return true;
  }
  return false;
}

bool has_vowel(std::string_view w) { return w.find_first_of("aeiouy") != std::string_view::npos; }

Tag lexical_tag(std::string_view w) {
  if (w == "to") return Tag::to;
  if (kBe.count(w)) return Tag::be;
  if (kHave.count(w)) return Tag::have;
  if (kDo.count(w)) return Tag::do_;
  if (kModals.count(w)) return Tag::modal;
  if (kSubjectPronouns.count(w)) return Tag::pron_subject;
  if (kDeterminers.count(w)) return Tag::det;
  if (kPronouns.count(w)) return Tag::pron;
  if (kPrepositions.count(w)) return Tag::prep;
  if (kConjunctions.count(w)) return Tag::conj;
  if (kAdverbs.count(w)) return Tag::adv;
  if (kAmbiguousIrregulars.count(w)) return Tag::ambiguous_irregular;
  if (kParticiples.count(w)) return Tag::participle;
  if (kGet.count(w)) return Tag::verb;
  if (lemmatize_adjective(w) != w) return Tag::comparative;
  if (kIngNouns.count(w)) return Tag::noun;
  if (kAdjectives.count(w)) return Tag::adj;
  if (!irregular_verb_base(w).empty()) return Tag::past;
  const auto n = w.size();
  if (n >= 5 && w.ends_with("ing") && has_vowel(w.substr(0, n - 3))) return Tag::gerund;
  if (n >= 4 && w.ends_with("ed") && has_vowel(w.substr(0, n - 2))) {
    if (w.starts_with("un") && n >= 7) return Tag::adj;
    return Tag::past;
  }
  if (n >= 5 && w.ends_with("ly") && !kLyNonAdverbs.count(w)) return Tag::adv;
  if (ends_with_any(w, kAdjSuffixes)) return Tag::adj;
  if (n >= 4 && w.ends_with("s") && !w.ends_with("ss") && !w.ends_with("us") && !w.ends_with("is")) {
    return Tag::plural_or_3sg;
  }
  return Tag::noun;
}

bool nominal(Tag t) { return t == Tag::noun || t == Tag::plural_or_3sg || t == Tag::adj || t == Tag::comparative; }
bool auxiliary(Tag t) { return t == Tag::be || t == Tag::have; }

Pos collapse(Tag t) {
  switch (t) {
    case Tag::noun:
    case Tag::plural_or_3sg:
      return Pos::noun;
    case Tag::verb:
    case Tag::past:
    case Tag::participle:
    case Tag::gerund:
    case Tag::be:
    case Tag::have:
    case Tag::do_:
      return Pos::verb;
    case Tag::adj:
    case Tag::comparative:
      return Pos::adjective;
    case Tag::adv:
      return Pos::adverb;
    default:
      return Pos::other;
  }
}

}  // namespace

std::string_view to_string(Pos pos) {
  switch (pos) {
    case Pos::noun:
      return "noun";
    case Pos::verb:
      return "verb";
    case Pos::adjective:
      return "adjective";
    case Pos::adverb:
      return "adverb";
    default:
      return "other";
  }
}

std::vector<Pos> RuleBasedTagger::tag(const std::vector<std::string>& tokens) const {
  const auto n = tokens.size();
  std::vector<Tag> lexical(n);
  for (std::size_t i = 0; i < n; ++i) lexical[i] = lexical_tag(tokens[i]);

  std::vector<Pos> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::string_view w = tokens[i];
    const Tag prev = i > 0 ? lexical[i - 1] : Tag::conj;
    // Look through one adverb for auxiliaries ("was not fixed").
    const Tag prev_aux = (prev == Tag::adv && i > 1) ? lexical[i - 2] : prev;
    const Tag next = i + 1 < n ? lexical[i + 1] : Tag::conj;
    Tag t = lexical[i];
    switch (t) {
      case Tag::past:
      case Tag::participle:
        if (auxiliary(prev_aux) || prev_aux == Tag::do_ || kGet.count(i > 0 ? std::string_view(tokens[i - 1]) : "")) {
          t = Tag::verb;
        } else if ((prev == Tag::det || prev == Tag::adj) && (nominal(next) || i + 1 == n)) {
          t = Tag::adj;
        } else {
          t = Tag::verb;
        }
        break;
      case Tag::gerund:
        t = prev == Tag::det ? Tag::noun : Tag::verb;
        break;
      case Tag::plural_or_3sg:
        if (prev == Tag::pron_subject ||
            (prev == Tag::noun && (next == Tag::det || next == Tag::pron || next == Tag::pron_subject))) {
          t = Tag::verb;
        } else {
          t = Tag::noun;
        }
        break;
      case Tag::comparative:
        if (prev == Tag::modal || prev == Tag::to) {
          t = Tag::verb;
        } else if (prev == Tag::be || prev == Tag::det || prev == Tag::adv || nominal(next) || next == Tag::conj) {
          t = Tag::adj;
        } else {
          t = Tag::adv;
        }
        break;
      case Tag::ambiguous_irregular:
        if (w == "ground" || w == "bound" || w == "wound") {
          t = auxiliary(prev_aux) ? Tag::verb : (w == "bound" ? Tag::adj : Tag::noun);
        } else if (w == "lead" || w == "lay") {
          t = Tag::verb;  // base form either way
        } else if (prev == Tag::det || prev == Tag::adj || prev == Tag::prep) {
          t = w == "left" ? Tag::adj : Tag::noun;
        } else {
          t = Tag::verb;
        }
        break;
      case Tag::noun:
      case Tag::adj:
        if ((prev == Tag::modal || prev == Tag::to) && t == Tag::noun) t = Tag::verb;
        break;
      default:
        break;
    }
    out[i] = collapse(t);
  }
  return out;
}

std::unique_ptr<PosTagger> make_pos_tagger(std::string_view name) {
  if (name == "rule-v1") return std::make_unique<RuleBasedTagger>();
  throw BackendUnavailableError("part-of-speech backend '" + std::string(name) + "' is not available");
}

}  // namespace issuemask
