#include "pipeline_config.hpp"

#include <fstream>
#include <set>

namespace issuemask::cli {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Reads the keys of one JSON object and rejects any it was not asked about.
class Section {
 public:
  Section(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ValidationError(where_, "expected an object");
  }

  bool has(const char* key) const { return j_.contains(key); }
  std::string at(const char* key) const { return where_ + "." + key; }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ValidationError(at(key), e.what());
    }
  }

  const json* raw(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  void optional_path(const char* key, std::optional<fs::path>& out, const fs::path& base, bool must_exist) {
    seen_.insert(key);
    if (!j_.contains(key) || j_.at(key).is_null()) return;
    if (!j_.at(key).is_string()) throw ValidationError(at(key), "expected a path string");
    fs::path p = j_.at(key).get<std::string>();
    if (p.is_relative()) p = (base / p).lexically_normal();
    if (must_exist && !fs::exists(p)) throw ValidationError(at(key), "file not found: " + p.string());
    out = p;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.contains(key)) throw ValidationError(where_ + "." + key, "unknown key");
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path out = p;
  return (out.is_relative() ? base / out : out).lexically_normal();
}

void parse_paths(const json& j, const fs::path& base, Paths& paths) {
  Section s(j, "paths");
  std::string workdir = ".";
  s.get("workdir", workdir);
  const auto wd = resolve(base, workdir);
  const std::vector<std::pair<const char*, fs::path*>> entries{
      {"corpus", &paths.corpus},           {"preprocessed", &paths.preprocessed},
      {"lexicon", &paths.lexicon},         {"random_lists", &paths.random_lists},
      {"masked", &paths.masked},           {"masked_random", &paths.masked_random},
      {"pretrained", &paths.pretrained},   {"checkpoint", &paths.checkpoint},
      {"report", &paths.report},           {"ablation_report", &paths.ablation_report},
      {"predictions", &paths.predictions}, {"plots", &paths.plots}};
  for (const auto& [key, target] : entries) {
    std::string value = target->string();
    s.get(key, value);
    *target = resolve(wd, value);
  }
  s.finish();
}

Label label_key(const std::string& key, const std::string& where) {
  const auto label = try_parse_label(key);
  if (!label) throw ValidationError(where, "unknown class '" + key + "'");
  return *label;
}

void parse_ingest(const json& j, const fs::path& base, IngestSection& in) {
  Section s(j, "ingest");
  s.get("source", in.source);
  if (in.source != "github" && in.source != "synthetic") {
    throw ValidationError("ingest.source", "must be \"github\" or \"synthetic\"");
  }
  s.get("api_base", in.api_base);
  s.optional_path("fixtures", in.fixtures, base, true);
  if (const auto* q = s.raw("queries")) {
    if (!q->is_object()) throw ValidationError("ingest.queries", "expected an object keyed by class");
    for (const auto& [key, value] : q->items()) {
      try {
        in.queries[label_key(key, "ingest.queries")] = value.get<std::vector<std::string>>();
      } catch (const json::exception& e) {
        throw ValidationError("ingest.queries." + key, e.what());
      }
    }
  }
  s.get("quota_per_query", in.quota_per_query);
  s.get("per_class", in.per_class);
  s.get("seed", in.seed);
  s.get("reference_date", in.reference_date);
  if (const auto* w = s.raw("window")) {
    Section ws(*w, "ingest.window");
    ws.get("first", in.filter.window.first);
    ws.get("last", in.filter.window.last);
    ws.finish();
    in.filter.window.validate();
  }
  s.get("require_nonempty", in.filter.require_nonempty);
  s.get("exclude_prs", in.filter.exclude_prs);
  if (const auto* t = s.raw("tags")) {
    Section ts(*t, "ingest.tags");
    ts.get("core", in.core_tags);
    ts.optional_path("synonyms", in.synonyms, base, true);
    ts.optional_path("allow", in.tag_allow, base, true);
    ts.optional_path("deny", in.tag_deny, base, true);
    ts.finish();
  }
  if (const auto* p = s.raw("project_filter")) {
    Section ps(*p, "ingest.project_filter");
    auto& f = in.project_filter;
    ps.get("enabled", f.enabled);
    ps.get("min_stars", f.min_stars);
    ps.get("active_within_days", f.active_within_days);
    ps.get("exclude_forks", f.exclude_forks);
    ps.get("min_commits", f.min_commits);
    ps.get("min_contributors", f.min_contributors);
    ps.get("min_merged_prs", f.min_merged_prs);
    ps.finish();
    f.validate();
  }
  s.finish();
  if (in.source == "github" && in.per_class == 0) {
    throw ValidationError("ingest.per_class", "required and must be positive");
  }
}

void parse_synthetic(const json& j, SyntheticConfig& c) {
  Section s(j, "synthetic");
  s.get("per_class", c.per_class);
  s.get("seed", c.seed);
  s.get("min_sentences", c.min_sentences);
  s.get("max_sentences", c.max_sentences);
  s.get("cross_talk", c.cross_talk);
  s.get("weak_fraction", c.weak_fraction);
  s.get("zipf_exponent", c.zipf_exponent);
  s.get("repo", c.repo);
  s.finish();
  c.validate();
}

void parse_surrogates(const json& j, const fs::path& base, SurrogateSection& c) {
  Section s(j, "surrogates");
  s.get("k", c.k);
  s.optional_path("allow", c.allow, base, true);
  s.optional_path("deny", c.deny, base, true);
  s.get("random_seed", c.random_seed);
  s.finish();
  if (c.k == 0) throw ValidationError("surrogates.k", "must be >= 1");
}

void parse_pretrain(const json& j, const fs::path& base, PretrainSection& c) {
  json rest = j;
  if (!rest.is_object()) throw ValidationError("pretrain", "expected an object");
  if (rest.contains("text")) {
    try {
      c.text = rest["text"].get<std::string>();
    } catch (const json::exception& e) {
      throw ValidationError("pretrain.text", e.what());
    }
    rest.erase("text");
    if (c.text != "synthetic" && c.text != "corpus") {
      const auto p = resolve(base, c.text);
      if (!fs::exists(p)) throw ValidationError("pretrain.text", "file not found: " + p.string());
      c.text = p.string();
    }
  }
  if (rest.contains("synthetic_documents")) {
    try {
      c.synthetic_documents = rest["synthetic_documents"].get<std::size_t>();
    } catch (const json::exception& e) {
      throw ValidationError("pretrain.synthetic_documents", e.what());
    }
    rest.erase("synthetic_documents");
  }
  c.config = PretrainConfig::from_json(rest, "pretrain");
  c.config.validate();
}

void parse_evaluate(const json& j, EvaluateSection& c) {
  Section s(j, "evaluate");
  s.get("folds", c.folds);
  s.get("seeds", c.seeds);
  s.get("alpha", c.alpha);
  s.get("threshold", c.threshold);
  s.get("plots", c.plots);
  s.finish();
  if (c.folds < 2) throw ValidationError("evaluate.folds", "must be >= 2");
  if (c.seeds.empty()) throw ValidationError("evaluate.seeds", "need at least one seed");
  if (!(c.alpha > 0 && c.alpha < 1)) throw ValidationError("evaluate.alpha", "must lie in (0, 1)");
  if (!(c.threshold >= 0 && c.threshold <= 1)) throw ValidationError("evaluate.threshold", "must lie in [0, 1]");
}

Paths default_paths() {
  Paths p;
  p.corpus = "corpus.jsonl";
  p.preprocessed = "preprocessed.jsonl";
  p.lexicon = "lexicon.json";
  p.random_lists = "random_lists.json";
  p.masked = "masked.jsonl";
  p.masked_random = "masked_random.jsonl";
  p.pretrained = "pretrained";
  p.checkpoint = "checkpoint";
  p.report = "report.json";
  p.ablation_report = "ablation.json";
  p.predictions = "predictions.jsonl";
  p.plots = "plots";
  return p;
}

}  // namespace

PipelineConfig PipelineConfig::parse(const json& doc, const fs::path& base_dir) {
  PipelineConfig c;
  c.base_dir = base_dir;
  c.paths = default_paths();
  Section s(doc, "config");
  if (!doc.contains("schema_version")) throw ValidationError("config.schema_version", "missing");
  s.get("schema_version", c.schema_version);
  if (c.schema_version != kSchemaVersion) {
    throw ValidationError("config.schema_version", "unsupported version " + std::to_string(c.schema_version));
  }
  parse_paths(s.has("paths") ? *s.raw("paths") : json::object(), base_dir, c.paths);
  if (const auto* j = s.raw("ingest")) parse_ingest(*j, base_dir, c.ingest);
  if (const auto* j = s.raw("synthetic")) parse_synthetic(*j, c.synthetic);
  if (const auto* j = s.raw("preprocess")) {
    c.preprocess = PreprocessConfig::from_json(*j, "preprocess");
    if (!c.preprocess.stopwords_file.empty()) {
      if (c.preprocess.stopwords_file.is_relative()) c.preprocess.stopwords_file = base_dir / c.preprocess.stopwords_file;
      if (!fs::exists(c.preprocess.stopwords_file)) {
        throw ValidationError("preprocess.stopwords_file", "file not found: " + c.preprocess.stopwords_file.string());
      }
    }
  }
  if (const auto* j = s.raw("surrogates")) parse_surrogates(*j, base_dir, c.surrogates);
  if (const auto* j = s.raw("pretrain")) parse_pretrain(*j, base_dir, c.pretrain);
  if (const auto* j = s.raw("train")) c.train = TrainConfig::from_json(*j, "train");
  c.train.validate();
  if (const auto* j = s.raw("evaluate")) parse_evaluate(*j, c.evaluate);
  s.finish();
  return c;
}

PipelineConfig PipelineConfig::load(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ValidationError(file.string(), "cannot open config file");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError(file.string(), e.what());
  }
  auto c = parse(doc, fs::absolute(file).parent_path());
  c.source_file = file;
  return c;
}

}  // namespace issuemask::cli
