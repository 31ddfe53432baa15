#include "issuemask/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <tuple>

#include "issuemask/rng.hpp"

namespace issuemask {

namespace {

const std::vector<std::string> kSecurityWords = {
    "vulnerability", "exploit",     "injection",    "overflow",     "xss",          "csrf",
    "sanitizer",     "privilege",   "escalation",   "attacker",     "malicious",    "leak",
    "credential",    "password",    "secret",       "bypass",       "authentication", "authorization",
    "cve",           "disclosure",  "forgery",      "spoof",        "hijack",       "traversal",
    "payload",       "untrusted",   "denial",       "ssrf",         "deserialization", "unsafe",
    "insecure",      "encryption",  "cipher",       "certificate",  "tls",          "salt",
    "nonce",         "cookie",      "sandbox",      "advisory",     "mitigation",   "threat",
    "exposure",      "sensitive",   "plaintext",    "brute",        "phishing",     "backdoor",
    "malware",       "rootkit",     "ransomware",   "firewall",     "permission",   "acl",
    "rbac",          "jwt",         "oauth",        "saml",         "csp",          "hsts",
    "clickjacking",  "smuggling",   "cryptography", "keystore",     "vault",        "intrusion",
    "breach",        "impersonation", "replay",     "entropy",      "signature",    "integrity",
    "confidentiality", "exfiltration", "botnet",    "trojan",       "heap",         "pointer",
    "fuzzer",        "scanner",     "pentest",      "hardening",    "isolation",    "seccomp",
    "capability",    "secure",      "attack",       "victim",       "forensic",     "compliance",
};

const std::vector<std::string> kNonSecurityWords = {
    "button",     "layout",      "typo",        "documentation", "scroll",     "font",
    "color",      "theme",       "icon",        "tooltip",       "dropdown",   "animation",
    "translation", "locale",     "compile",     "deprecation",   "upgrade",    "dependency",
    "install",    "flaky",       "refactor",    "rename",        "cleanup",    "feature",
    "setting",    "dark",        "keyboard",    "shortcut",      "menu",       "dialog",
    "window",     "resize",      "screenshot",  "export",        "csv",        "pdf",
    "print",      "chart",       "graph",       "table",         "column",     "sort",
    "pagination", "timezone",    "calendar",    "unicode",       "emoji",      "markdown",
    "preview",    "editor",      "plugin",      "extension",     "sidebar",    "tab",
    "notification", "template",  "spinner",     "checkbox",      "slider",     "margin",
    "padding",    "alignment",   "border",      "gradient",      "wallpaper",  "playlist",
    "volume",     "audio",       "video",       "thumbnail",     "gallery",    "avatar",
    "bookmark",   "clipboard",   "zoom",        "rotation",      "cursor",     "highlight",
    "syntax",     "indentation", "autocomplete", "linter",       "formatter",  "benchmark",
    "latency",    "throughput",  "glitch",      "flicker",       "wizard",     "banner",
};

const std::vector<std::string> kSharedWords = {
    "app",       "user",      "page",      "file",      "error",     "server",    "client",
    "data",      "module",    "function",  "version",   "release",   "code",      "problem",
    "system",    "service",   "api",       "endpoint",  "browser",   "library",   "project",
    "repository", "config",   "option",    "value",     "field",     "input",     "output",
    "message",   "request",   "response",  "update",    "change",    "test",      "step",
    "result",    "behavior",  "environment", "platform", "device",   "linux",     "docker",
    "python",    "java",      "database",  "query",     "connection", "network",  "process",
    "thread",    "script",    "command",   "log",       "screen",    "view",      "component",
    "handler",   "parser",    "router",    "controller", "object",   "string",    "list",
    "array",     "event",     "callback",  "image",     "link",      "url",       "path",
    "folder",    "directory", "account",   "admin",     "team",      "state",     "storage",
    "upload",    "download",  "node",      "header",    "form",      "token",     "session",
};

// {c}: class term slot, {s}: shared word slot. Slots are separated by function
// words, which preprocessing drops, so each slot forms its own keyword phrase.
const std::vector<std::string> kBodyTemplates = {
    "When the {s} is open, the {c} is wrong.",
    "The {c} in the {s} does not match the {c}.",
    "I see the {c} after an {s} of the {s}.",
    "Steps: go to the {s}, then to the {c}, and then to the {s}.",
    "It is the {c} that is broken for the {c}.",
    "We should look at the {c} in the {s} before the next {s}.",
    "The {s} has the {c} when the {s} has a {c}.",
    "Please look at the {c} of this {s}.",
    "This is about the {s} and maybe the {c} too.",
    "After the {s}, the {c} is there again.",
    "There is an issue with the {c} on the {s}.",
    "Could the {c} be related to the {s} or the {c}?",
};

const std::vector<std::string> kTitleTemplates = {
    "The {c} in the {s}",
    "{s} with {c}",
    "{c} when using the {s}",
    "Unexpected {c} in the {s}",
};

const std::vector<std::string> kSecurityTags = {"security", "cve", "vulnerability", "cvss/high"};
const std::vector<std::string> kOtherTags = {"bug", "enhancement", "documentation", "ui", "question"};

class ZipfSampler {
 public:
  ZipfSampler(std::size_t n, double exponent) : cumulative_(n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      acc += 1.0 / std::pow(static_cast<double>(i + 1), exponent);
      cumulative_[i] = acc;
    }
  }
  std::size_t draw(SeededRng& rng) const {
    const double u = rng.uniform() * cumulative_.back();
    return static_cast<std::size_t>(std::upper_bound(cumulative_.begin(), cumulative_.end(), u) -
                                    cumulative_.begin());
  }

 private:
  std::vector<double> cumulative_;
};

// Class vocabulary is grouped into fixed technical terms: the first 48 words of
// each list form three-word terms, the rest two-word terms. Terms interleave so
// both lengths sit near the head of the frequency distribution.
std::vector<std::string> build_terms(const std::vector<std::string>& words) {
  std::vector<std::string> triples;
  std::vector<std::string> pairs;
  for (std::size_t i = 0; i + 2 < 48 && i + 2 < words.size(); i += 3) {
    triples.push_back(words[i] + " " + words[i + 1] + " " + words[i + 2]);
  }
  for (std::size_t i = 48; i + 1 < words.size(); i += 2) pairs.push_back(words[i] + " " + words[i + 1]);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < std::max(triples.size(), pairs.size()); ++i) {
    if (i < triples.size()) out.push_back(triples[i]);
    if (i < pairs.size()) out.push_back(pairs[i]);
  }
  return out;
}

struct Generator {
  const SyntheticConfig& config;
  std::array<std::vector<std::string>, kNumLabels> terms{build_terms(kSecurityWords), build_terms(kNonSecurityWords)};
  ZipfSampler term_zipf;
  ZipfSampler shared_zipf;

  explicit Generator(const SyntheticConfig& cfg)
      : config(cfg), term_zipf(terms[0].size(), cfg.zipf_exponent), shared_zipf(kSharedWords.size(), 0.5) {}

  std::string class_word(Label label, bool weak, SeededRng& rng) const {
    if (weak && rng.bernoulli(0.7)) return kSharedWords[shared_zipf.draw(rng)];
    if (rng.bernoulli(config.cross_talk)) {
      // A passing mention of the other class: one word, not a full term.
      const auto& pool = synthetic_class_vocabulary(other(label));
      return pool[rng.uniform_index(pool.size())];
    }
    const auto& list = terms[label_index(label)];
    return list[term_zipf.draw(rng) % list.size()];
  }

  std::string fill(const std::string& tmpl, Label label, bool weak, SeededRng& rng) const {
    std::string out;
    for (std::size_t i = 0; i < tmpl.size();) {
      if (tmpl.compare(i, 3, "{c}") == 0) {
        out += class_word(label, weak, rng);
        i += 3;
      } else if (tmpl.compare(i, 3, "{s}") == 0) {
        out += kSharedWords[shared_zipf.draw(rng)];
        i += 3;
      } else {
        out += tmpl[i++];
      }
    }
    return out;
  }

  std::pair<std::string, std::string> text(Label label, SeededRng& rng) const {
    const bool weak = rng.bernoulli(config.weak_fraction);
    std::string title = fill(kTitleTemplates[rng.uniform_index(kTitleTemplates.size())], label, weak, rng);
    if (!title.empty()) title[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(title[0])));
    const auto sentences =
        config.min_sentences + rng.uniform_index(config.max_sentences - config.min_sentences + 1);
    std::string body;
    for (std::size_t i = 0; i < sentences; ++i) {
      if (i) body += ' ';
      body += fill(kBodyTemplates[rng.uniform_index(kBodyTemplates.size())], label, weak, rng);
    }
    return {title, body};
  }
};

std::string date_after(std::size_t days) {
  using namespace std::chrono;
  const year_month_day ymd{sys_days{year{2022} / January / 1} + std::chrono::days{static_cast<long>(days)}};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT12:00:00Z", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

}  // namespace

void SyntheticConfig::validate() const {
  if (per_class == 0) throw ValidationError("synthetic.per_class", "must be positive");
  if (min_sentences == 0 || max_sentences < min_sentences) {
    throw ValidationError("synthetic.sentences", "need 1 <= min_sentences <= max_sentences");
  }
  if (cross_talk < 0.0 || cross_talk >= 0.5) throw ValidationError("synthetic.cross_talk", "must be in [0, 0.5)");
  if (weak_fraction < 0.0 || weak_fraction > 1.0) throw ValidationError("synthetic.weak_fraction", "must be in [0, 1]");
  if (zipf_exponent < 0.0) throw ValidationError("synthetic.zipf_exponent", "must be non-negative");
}

const std::vector<std::string>& synthetic_class_vocabulary(Label label) {
  return label == Label::security ? kSecurityWords : kNonSecurityWords;
}

const std::vector<std::string>& synthetic_shared_vocabulary() { return kSharedWords; }

LabeledCorpus generate_synthetic_corpus(const SyntheticConfig& config) {
  config.validate();
  const Generator gen(config);
  SeededRng rng(derive_seed(config.seed, 1));
  LabeledCorpus corpus;
  std::size_t number = 1;
  for (std::size_t i = 0; i < config.per_class; ++i) {
    for (auto label : kLabelOrder) {
      IssueReport issue;
      issue.repo = config.repo;
      issue.id = config.repo + "#" + std::to_string(number++);
      std::tie(issue.title, issue.body) = gen.text(label, rng);
      const auto& tags = label == Label::security ? kSecurityTags : kOtherTags;
      issue.tags = {tags[rng.uniform_index(tags.size())]};
      issue.created_at = date_after(rng.uniform_index(790));
      issue.label = label;
      corpus.issues.push_back(std::move(issue));
    }
  }
  std::sort(corpus.issues.begin(), corpus.issues.end(),
            [](const IssueReport& a, const IssueReport& b) { return a.id < b.id; });
  corpus.provenance = {{"source", "synthetic"},
                       {"seed", config.seed},
                       {"per_class", config.per_class},
                       {"cross_talk", config.cross_talk},
                       {"weak_fraction", config.weak_fraction},
                       {"zipf_exponent", config.zipf_exponent}};
  return corpus;
}

std::vector<std::string> generate_pretraining_text(const SyntheticConfig& config, std::size_t documents) {
  config.validate();
  const Generator gen(config);
  SeededRng rng(derive_seed(config.seed, 2));
  std::vector<std::string> out;
  out.reserve(documents);
  for (std::size_t i = 0; i < documents; ++i) {
    const Label label = kLabelOrder[i % kNumLabels];
    auto [title, body] = gen.text(label, rng);
    out.push_back(title + " " + body);
  }
  return out;
}

}  // namespace issuemask
