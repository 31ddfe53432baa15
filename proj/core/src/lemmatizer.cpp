#include "issuemask/lemmatizer.hpp"

#include <initializer_list>
#include <string>
#include <unordered_map>
#include <unordered_set>

namespace issuemask {
namespace {

using WordSet = std::unordered_set<std::string_view>;
using WordMap = std::unordered_map<std::string_view, std::string_view>;

// Each row: base form followed by its irregular inflections.
constexpr std::string_view kIrregularVerbs[] = {
    "be am is are was were been being isnt arent wasnt werent",
    "have has had having hasnt havent hadnt",
    "do does did done doing doesnt didnt",
    "go goes went gone going",
    "arise arose arisen", "awake awoke awoken", "bear bore borne", "beat beaten",
    "become became", "begin began begun", "bend bent", "bind bound", "bite bit bitten",
    "bleed bled", "blow blew blown", "break broke broken", "breed bred", "bring brought",
    "build built", "burn burnt", "buy bought", "catch caught", "choose chose chosen",
    "cling clung", "come came", "creep crept", "deal dealt", "dig dug", "draw drew drawn",
    "dream dreamt", "drink drank drunk", "drive drove driven", "eat ate eaten", "fall fell fallen",
    "feed fed", "feel felt", "fight fought", "find found", "flee fled", "fling flung", "fly flew flown flies",
    "forbid forbade forbidden", "forget forgot forgotten", "forgive forgave forgiven",
    "freeze froze frozen", "get got gotten", "give gave given", "grind ground", "grow grew grown",
    "hang hung", "hear heard", "hide hid hidden", "hold held", "keep kept", "kneel knelt",
    "know knew known", "lay laid", "lead led", "lean leant", "leap leapt", "learn learnt",
    "leave left", "lend lent", "lie lain", "light lit", "lose lost", "make made", "mean meant",
    "meet met", "mislead misled", "mistake mistook mistaken", "overcome overcame",
    "override overrode overridden", "overwrite overwrote overwritten", "pay paid", "prove proven",
    "rebuild rebuilt", "redo redid redone", "rewrite rewrote rewritten", "ride rode ridden",
    "ring rang rung", "rise rose risen", "run ran", "say said", "see saw seen", "seek sought",
    "sell sold", "send sent", "shake shook shaken", "shine shone", "shoot shot", "show shown",
    "shrink shrank shrunk", "sing sang sung", "sink sank sunk", "sit sat", "sleep slept",
    "slide slid", "speak spoke spoken", "speed sped", "spend spent", "spin spun", "spring sprang sprung",
    "stand stood", "steal stole stolen", "stick stuck", "sting stung", "strike struck stricken",
    "string strung", "strive strove striven", "swear swore sworn", "sweep swept", "swim swam swum",
    "swing swung", "take took taken", "teach taught", "tear tore torn", "tell told", "think thought",
    "throw threw thrown", "understand understood", "undergo underwent undergone", "undo undid undone",
    "wake woke woken", "wear wore worn", "weave wove woven", "win won", "wind wound",
    "withdraw withdrew withdrawn", "withhold withheld", "write wrote written",
    "misunderstand misunderstood", "uphold upheld", "overtake overtook overtaken",
    "rerun reran", "foresee foresaw foreseen", "oversee oversaw overseen", "overhear overheard",
    "sew sewn", "rethink rethought",
    "outgrow outgrew outgrown", "die dying", "lie lying", "tie tying", "vie vying",
};

const WordMap& irregular_verbs() {
  static const WordMap table = [] {
    WordMap map;
    for (auto row : kIrregularVerbs) {
      const auto first_space = row.find(' ');
      const auto base = row.substr(0, first_space);
      std::size_t pos = first_space;
      while (pos != std::string_view::npos) {
        const auto start = pos + 1;
        const auto next = row.find(' ', start);
        map.emplace(row.substr(start, next == std::string_view::npos ? std::string_view::npos : next - start), base);
        pos = next;
      }
    }
    return map;
  }();
  return table;
}

const WordMap kIrregularNouns = {
    {"children", "child"},   {"men", "man"},          {"women", "woman"},       {"mice", "mouse"},
    {"geese", "goose"},      {"feet", "foot"},        {"teeth", "tooth"},       {"indices", "index"},
    {"vertices", "vertex"},  {"matrices", "matrix"},  {"appendices", "appendix"}, {"analyses", "analysis"},
    {"crises", "crisis"},    {"theses", "thesis"},    {"hypotheses", "hypothesis"}, {"diagnoses", "diagnosis"},
    {"parentheses", "parenthesis"}, {"synopses", "synopsis"}, {"criteria", "criterion"},
    {"phenomena", "phenomenon"}, {"knives", "knife"}, {"wives", "wife"}, {"lives", "life"},
    {"leaves", "leaf"},      {"halves", "half"},      {"shelves", "shelf"},     {"wolves", "wolf"},
    {"selves", "self"},      {"thieves", "thief"},    {"loaves", "loaf"},       {"calves", "calf"},
    {"elves", "elf"},        {"cacti", "cactus"},     {"fungi", "fungus"},      {"nuclei", "nucleus"},
    {"radii", "radius"},     {"stimuli", "stimulus"}, {"syllabi", "syllabus"},  {"alumni", "alumnus"},
    {"axes", "axis"},        {"oxen", "ox"},          {"dice", "die"},          {"caches", "cache"},
    {"niches", "niche"},     {"headaches", "headache"}, {"avalanches", "avalanche"}, {"cookies", "cookie"},
    {"movies", "movie"},     {"zombies", "zombie"},   {"ties", "tie"},          {"lies", "lie"},
    {"pies", "pie"},         {"rookies", "rookie"},   {"hippies", "hippie"},    {"selfies", "selfie"},
    {"freebies", "freebie"}, {"newbies", "newbie"},   {"goalies", "goalie"},    {"genies", "genie"},
    {"calories", "calorie"}, {"smoothies", "smoothie"}, {"aliases", "alias"},   {"biases", "bias"},
    {"canvases", "canvas"},  {"atlases", "atlas"},    {"gases", "gas"},         {"buses", "bus"},
    {"statuses", "status"},  {"viruses", "virus"},    {"bonuses", "bonus"},     {"campuses", "campus"},
    {"corpora", "corpus"},   {"quizzes", "quiz"},     {"dies", "die"},
};

// Singular words that look plural.
const WordSet kKeepS = {
    "news", "series", "species", "means", "physics", "mathematics", "ethics", "economics", "windows", "macos",
    "ios", "dns", "aws", "xss", "css", "cors", "https", "sms", "gps", "jenkins", "kubernetes", "redis",
    "postgres", "analytics", "lens", "chaos", "kudos", "alias", "bias", "canvas", "atlas", "saas", "paas",
    "iaas", "pandas", "ddos", "always", "sometimes", "perhaps", "afterwards", "towards", "besides",
    "nowadays", "regardless", "sideways", "upwards", "downwards", "backwards", "forwards", "whereas",
    "overseas", "indoors", "outdoors", "diabetes", "herpes", "rabies", "hermes", "thanks", "mumps",
    "gas", "yes", "unless", "various", "numerous", "previous", "plus", "thus", "versus",
};

// -oes plurals and 3sg forms that drop "es".
const WordSet kOWords = {"hero",  "potato", "tomato",  "echo",  "veto",   "torpedo", "volcano", "cargo",
                         "embargo", "mosquito", "domino", "tornado", "go", "do", "undergo", "redo",
                         "undo",  "outdo",  "forgo"};

// Stems that lose "es" in -uses/-ases.
const WordSet kUsStems = {"status", "virus",   "bonus", "campus", "corpus", "consensus", "census",
                          "focus",  "refocus", "bus",   "cactus", "octopus", "apparatus", "nexus",
                          "plus",   "stimulus", "thesaurus", "genus", "hiatus", "sinus", "onus",
                          "alias",  "canvas",  "bias",  "atlas",  "gas",   "chorus", "prospectus"};

// Base words that end in -ed or -ing (do not strip).
const WordSet kProtected = {
    "need",    "seed",    "feed",     "speed",    "proceed", "succeed", "exceed", "bleed",  "breed",
    "heed",    "weed",    "deed",     "reed",     "greed",   "steed",   "indeed", "creed",  "tweed",
    "embed",   "shred",   "sled",     "hundred",  "infrared", "sacred", "naked",  "wicked", "wretched",
    "rugged",  "ragged",  "beloved",  "crooked",  "kindred", "hatred",  "bed",    "red",    "shed",
    "wed",     "string",  "thing",    "during",   "nothing", "something", "anything", "everything",
    "ceiling", "morning", "evening",  "king",     "ring",    "sing",    "bring",  "spring", "swing",
    "sting",   "cling",   "fling",    "sling",    "wring",   "ping",    "ding",   "wing",   "sibling",
    "darling", "offspring", "lightning", "awning", "earring", "herring", "pudding", "wedding",
    "inning",  "icing",   "bling",    "zing",     "viking",  "pudding", "farthing", "shilling",
};

// Verb stems (after removing -ed/-ing) that take a final e.
const WordSet kAddE = {
    "creat",  "procreat", "stor",    "ignor",   "explor",  "scor",    "bor",     "ador",     "implor",
    "snor",   "deplor",   "interfer", "adher",  "coher",   "persever", "rever",  "delet",    "complet",
    "compet", "deplet",   "excret",  "invit",   "ignit",   "excit",   "unit",    "cit",      "recit",
    "incit",  "expedit",  "writ",    "bit",     "quot",    "not",     "vot",     "promot",   "devot",
    "denot",  "rout",     "imped",   "preced",  "conced",  "reced",   "seced",   "supersed", "chang",
    "arrang", "exchang",  "rang",    "challeng", "lung",   "plung",   "spong",   "hing",     "cring",
    "fring",  "reveng",   "aveng",   "scaveng", "expung",  "zon",     "clon",    "phon",     "ton",
    "postpon", "tun",     "prun",    "conven",  "interven", "hon",    "ston",    "dron",     "enthron",
    "dethron", "aton",    "condon",  "profan",  "past",    "wast",    "tast",    "hast",     "cach",
    "ach",    "breath",   "sooth",   "emot",    "remot",   "smit",    "spit",    "whit",     "recycl",
};

// Verb stems that never take a final e even when a rule would add one.
const WordSet kNoE = {
    "sync",   "async",  "spec",     "arc",    "disc",     "zinc",    "tic",     "focus",   "refocus",
    "bias",   "unbias", "alias",    "canvas", "gas",      "bus",     "nexus",   "chorus",  "census",
    "consensus", "atlas", "combat", "habitat", "develop", "redevelop", "envelop", "gallop", "wallop",
    "gossip", "worship", "kidnap",  "handicap", "dollop", "scallop",  "bottom",  "ransom",  "blossom",
    "fathom", "custom", "pivot",    "riot",   "ballot",   "pilot",   "robot",   "debut",   "edit",
    "limit",  "visit",  "credit",   "audit",  "inherit",  "exhibit", "prohibit", "inhibit", "profit",
    "benefit", "exit",  "deposit",  "vomit",  "posit",    "orbit",   "solicit", "elicit",  "implicit",
};

// Doubled final consonants that belong to the stem after undoubling fails.
const WordMap kStemFix = {
    {"controll", "control"}, {"patroll", "patrol"},   {"cancell", "cancel"},   {"labell", "label"},
    {"modell", "model"},     {"travell", "travel"},   {"signall", "signal"},   {"compell", "compel"},
    {"propell", "propel"},   {"expell", "expel"},     {"levell", "level"},     {"channell", "channel"},
    {"fuell", "fuel"},       {"totall", "total"},     {"tunnell", "tunnel"},   {"marshall", "marshal"},
    {"unravell", "unravel"}, {"dispell", "dispel"},   {"excell", "excel"},     {"repell", "repel"},
    {"enroll", "enrol"},     {"annull", "annul"},     {"panick", "panic"},     {"mimick", "mimic"},
    {"picnick", "picnic"},   {"traffick", "traffic"}, {"frolick", "frolic"},   {"quizz", "quiz"},
};

// Closed adjective set with comparative and superlative forms.
const WordMap kComparatives = {
    {"larger", "large"},     {"largest", "large"},   {"bigger", "big"},       {"biggest", "big"},
    {"smaller", "small"},    {"smallest", "small"},  {"faster", "fast"},      {"fastest", "fast"},
    {"slower", "slow"},      {"slowest", "slow"},    {"higher", "high"},      {"highest", "high"},
    {"lower", "low"},        {"lowest", "low"},      {"newer", "new"},        {"newest", "new"},
    {"older", "old"},        {"oldest", "old"},      {"longer", "long"},      {"longest", "long"},
    {"shorter", "short"},    {"shortest", "short"},  {"easier", "easy"},      {"easiest", "easy"},
    {"harder", "hard"},      {"hardest", "hard"},    {"better", "good"},      {"best", "good"},
    {"worse", "bad"},        {"worst", "bad"},       {"safer", "safe"},       {"safest", "safe"},
    {"stronger", "strong"},  {"strongest", "strong"}, {"weaker", "weak"},     {"weakest", "weak"},
    {"simpler", "simple"},   {"simplest", "simple"}, {"earlier", "early"},    {"earliest", "early"},
    {"later", "late"},       {"latest", "late"},     {"greater", "great"},    {"greatest", "great"},
    {"wider", "wide"},       {"widest", "wide"},     {"deeper", "deep"},      {"deepest", "deep"},
    {"cleaner", "clean"},    {"cleanest", "clean"},  {"clearer", "clear"},    {"clearest", "clear"},
    {"cheaper", "cheap"},    {"cheapest", "cheap"},  {"quicker", "quick"},    {"quickest", "quick"},
    {"heavier", "heavy"},    {"heaviest", "heavy"},  {"lighter", "light"},    {"lightest", "light"},
    {"smarter", "smart"},    {"smartest", "smart"},  {"tighter", "tight"},    {"tightest", "tight"},
    {"looser", "loose"},     {"loosest", "loose"},   {"riskier", "risky"},    {"riskiest", "risky"},
    {"nicer", "nice"},       {"nicest", "nice"},     {"closer", "close"},     {"closest", "close"},
};

const WordSet kCheExceptions = {"caches", "niches", "headaches", "avalanches", "moustaches", "mustaches",
                                "psyches", "cliches", "quiches", "aches"};

bool is_vowel_at(std::string_view w, std::size_t i) {
  const char c = w[i];
  if (c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u') return !(c == 'u' && i > 0 && w[i - 1] == 'q');
  return c == 'y' && i > 0 && !is_vowel_at(w, i - 1);
}

bool has_vowel(std::string_view w) {
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (is_vowel_at(w, i)) return true;
  }
  return false;
}

constexpr std::string_view kPrefixes[] = {"re",  "un",  "pre", "over", "de",  "dis",   "mis",   "co",   "auto",
                                          "sub", "out", "up",  "under", "in", "non",   "multi", "cross", "mis"};

// Exact match, or match after removing one common prefix (restor → stor).
bool in_table(std::string_view stem, const WordSet& table) {
  if (table.count(stem)) return true;
  for (auto prefix : kPrefixes) {
    if (stem.size() > prefix.size() + 1 && stem.starts_with(prefix) && table.count(stem.substr(prefix.size()))) {
      return true;
    }
  }
  return false;
}

// Single vowel (not part of a digraph) right before the final consonant.
bool single_vowel_before_last(std::string_view s) {
  const auto n = s.size();
  if (n < 2 || !is_vowel_at(s, n - 2)) return false;
  return n < 3 || !is_vowel_at(s, n - 3);
}

bool needs_final_e(std::string_view s) {
  const auto n = s.size();
  if (n < 2) return false;
  if (in_table(s, kNoE)) return false;
  if (in_table(s, kAddE)) return true;
  const char last = s[n - 1];
  const char prev = s[n - 2];
  switch (last) {
    case 'v':
    case 'u':
    case 'c':
      return true;
    case 'z':
      return prev != 't' && prev != 'z';
    case 's':
      return prev != 's';
    case 'l':
      if (std::string_view("bcdfgkptz").find(prev) != std::string_view::npos) return true;
      return (prev == 'i' || prev == 'u') && single_vowel_before_last(s);
    case 'g':
      if (prev == 'r' || prev == 'd') return true;
      return single_vowel_before_last(s);
    case 'r':
      return (prev == 'a' || prev == 'i' || prev == 'u') && single_vowel_before_last(s);
    case 't':
      if (prev == 'a') return n < 3 || (s[n - 3] != 'e' && s[n - 3] != 'o' && s[n - 3] != 'a');
      if (prev == 'u') return single_vowel_before_last(s);
      return false;
    case 'n':
      return prev == 'i' && single_vowel_before_last(s);
    case 'd':
      return (prev == 'a' || prev == 'i' || prev == 'o' || prev == 'u') && single_vowel_before_last(s);
    case 'm':
    case 'k':
    case 'b':
      return (prev == 'a' || prev == 'i' || prev == 'o' || prev == 'u') && single_vowel_before_last(s);
    case 'p':
      return (prev == 'a' || prev == 'i' || prev == 'o' || prev == 'u' || prev == 'y') &&
             single_vowel_before_last(s);
    default:
      return false;
  }
}

// Rebuilds the base form from what is left after removing -ed or -ing.
std::string restore_stem(std::string_view stem) {
  if (const auto it = kStemFix.find(stem); it != kStemFix.end()) return std::string(it->second);
  const auto n = stem.size();
  if (n >= 4 && stem[n - 1] == stem[n - 2] && !is_vowel_at(stem, n - 1) &&
      std::string_view("lsfz").find(stem[n - 1]) == std::string_view::npos) {
    return std::string(stem.substr(0, n - 1));
  }
  if (stem.back() == 'e') return std::string(stem);
  if (needs_final_e(stem)) return std::string(stem) + "e";
  return std::string(stem);
}

bool plain_keep(std::string_view w) {
  return w.size() <= 3 || kKeepS.count(w) || w.ends_with("ss") || w.ends_with("us") || w.ends_with("is") ||
         w.ends_with("js");
}

// Shared -s stripping for plural nouns and third-person verbs.
std::string strip_s(std::string_view w) {
  if (plain_keep(w)) return std::string(w);
  const auto n = w.size();
  if (w.ends_with("ies")) {
    if (n == 4) return std::string(w.substr(0, 3));  // dies, lies, ties
    return std::string(w.substr(0, n - 3)) + "y";
  }
  if (w.ends_with("ves")) {
    return std::string(w.substr(0, n - 1));
  }
  if (w.ends_with("sses") || w.ends_with("shes") || w.ends_with("xes") || w.ends_with("zzes")) {
    return std::string(w.substr(0, n - 2));
  }
  if (w.ends_with("ches")) {
    return kCheExceptions.count(w) ? std::string(w.substr(0, n - 1)) : std::string(w.substr(0, n - 2));
  }
  if (w.ends_with("oes")) {
    const auto stem = w.substr(0, n - 2);
    return kOWords.count(stem) ? std::string(stem) : std::string(w.substr(0, n - 1));
  }
  if (w.ends_with("uses") || w.ends_with("ases")) {
    const auto stem = w.substr(0, n - 2);
    if (kUsStems.count(stem)) return std::string(stem);
  }
  return std::string(w.substr(0, n - 1));
}

template <typename Fn>
std::string on_last_segment(std::string_view word, Fn fn) {
  const auto hyphen = word.rfind('-');
  if (hyphen == std::string_view::npos || hyphen + 1 >= word.size()) return fn(word);
  return std::string(word.substr(0, hyphen + 1)) + fn(word.substr(hyphen + 1));
}

std::string min_length_guard(std::string_view original, std::string lemma) {
  return lemma.size() < 2 ? std::string(original) : lemma;
}

std::string noun_lemma(std::string_view w) {
  if (const auto it = kIrregularNouns.find(w); it != kIrregularNouns.end()) return std::string(it->second);
  if (!w.ends_with("s")) return std::string(w);
  return strip_s(w);
}

std::string verb_lemma(std::string_view w) {
  if (kProtected.count(w)) return std::string(w);
  if (const auto base = irregular_verb_base(w); !base.empty()) return std::string(base);
  const auto n = w.size();
  if (n >= 5 && w.ends_with("ing")) {
    const auto stem = w.substr(0, n - 3);
    if (!has_vowel(stem)) return std::string(w);
    return restore_stem(stem);
  }
  if (n >= 4 && w.ends_with("ed")) {
    if (w.ends_with("ied")) {
      if (n == 4) return std::string(w.substr(0, 3));
      return std::string(w.substr(0, n - 3)) + "y";
    }
    if (w.ends_with("eed")) return std::string(w.substr(0, n - 1));
    const auto stem = w.substr(0, n - 2);
    if (!has_vowel(stem)) return std::string(w);
    return restore_stem(stem);
  }
  if (w.ends_with("s")) return strip_s(w);
  return std::string(w);
}

}  // namespace

std::string_view irregular_verb_base(std::string_view word) {
  const auto& table = irregular_verbs();
  const auto it = table.find(word);
  return it == table.end() ? std::string_view{} : it->second;
}

std::string lemmatize_noun(std::string_view word) {
  return min_length_guard(word, on_last_segment(word, noun_lemma));
}

std::string lemmatize_verb(std::string_view word) {
  return min_length_guard(word, on_last_segment(word, verb_lemma));
}

std::string lemmatize_adjective(std::string_view word) {
  return min_length_guard(word, on_last_segment(word, [](std::string_view w) {
    const auto it = kComparatives.find(w);
    return it == kComparatives.end() ? std::string(w) : std::string(it->second);
  }));
}

std::string lemmatize(std::string_view word, Pos pos) {
  switch (pos) {
    case Pos::noun:
      return lemmatize_noun(word);
    case Pos::verb:
      return lemmatize_verb(word);
    case Pos::adjective:
      return lemmatize_adjective(word);
    default:
      return std::string(word);
  }
}

}  // namespace issuemask
