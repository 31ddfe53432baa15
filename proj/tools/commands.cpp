#include "commands.hpp"

#include <fstream>
#include <iomanip>

#include "issuemask/checkpoint.hpp"
#include "issuemask/cross_validation.hpp"
#include "issuemask/http_transport.hpp"
#include "issuemask/jsonl.hpp"
#include "issuemask/masking.hpp"
#include "issuemask/report.hpp"
#include "issuemask/rng.hpp"
#include "issuemask/surrogates.hpp"

namespace issuemask::cli {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path output_or(const Options& options, const fs::path& fallback) {
  const auto out = options.out.value_or(fallback);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  return out;
}

std::set<std::string> word_list_or_empty(const std::optional<fs::path>& path) {
  return path ? read_word_list(*path) : std::set<std::string>{};
}

Preprocessor make_preprocessor(const PipelineConfig& config) { return Preprocessor(config.preprocess); }

// Loads the preprocessed corpus after checking it is fresh and matches the
// current preprocessing configuration.
std::vector<PreprocessedIssue> load_current_preprocessed(const PipelineConfig& config, const Preprocessor& pp) {
  require_fresh(config.paths.preprocessed, "preprocessed");
  const auto prov = read_provenance(config.paths.preprocessed);
  if (prov.meta.value("preprocess_digest", std::string{}) != pp.digest()) {
    throw DependencyError("upstream artifact 'preprocessed' was built with a different preprocessing configuration; "
                          "re-run preprocess");
  }
  return load_preprocessed(config.paths.preprocessed).issues;
}

std::array<std::vector<RakeDocument>, kNumLabels> rake_documents(const std::vector<PreprocessedIssue>& issues) {
  std::array<std::vector<RakeDocument>, kNumLabels> docs;
  for (const auto& issue : issues) {
    if (!issue.label) throw ValidationError("preprocessed", "issue " + issue.issue_id + " has no label");
    docs[label_index(*issue.label)].push_back({issue.tokens, issue.phrase_breaks});
  }
  return docs;
}

SurrogateLexicon load_checked_lexicon(const fs::path& path, std::string_view role, const Preprocessor& pp) {
  require_fresh(path, role);
  auto lexicon = load_lexicon(path);
  if (lexicon.preprocess_digest != pp.digest()) {
    throw DependencyError("upstream artifact '" + std::string(role) +
                          "' was mined under a different preprocessing configuration");
  }
  return lexicon;
}

std::vector<ProvenanceInput> inputs_for(const fs::path& artifact,
                                        std::initializer_list<std::pair<const char*, fs::path>> inputs) {
  std::vector<ProvenanceInput> out;
  for (const auto& [role, path] : inputs) out.push_back(hash_input(role, path, artifact));
  return out;
}

void print_summary(std::ostream& log, const std::string& name, const EvalReport& r) {
  log << std::fixed << std::setprecision(4) << name << ": precision " << r.summary.at("precision").mean << " ± "
      << r.summary.at("precision").std << ", recall " << r.summary.at("recall").mean << " ± "
      << r.summary.at("recall").std << ", F1 " << r.summary.at("f1").mean << " ± " << r.summary.at("f1").std
      << '\n';
}

fs::path random_report_path(const PipelineConfig& config) {
  auto p = config.paths.report;
  return p.replace_filename(p.stem().string() + "_random" + p.extension().string());
}

}  // namespace

void cmd_ingest(const PipelineConfig& config, const Options& options, std::ostream& log) {
  const auto out = output_or(options, config.paths.corpus);
  const auto& in = config.ingest;

  if (in.source == "synthetic") {
    auto sc = config.synthetic;
    if (options.seed) sc.seed = *options.seed;
    const auto corpus = generate_synthetic_corpus(sc);
    save_corpus(out, corpus);
    log << "wrote " << corpus.issues.size() << " synthetic issues to " << out.string() << '\n';
    return;
  }

  std::optional<SynonymDb> synonyms;
  if (in.synonyms) synonyms = SynonymDb::load(*in.synonyms);
  auto expansion = expand_tagset(in.core_tags, synonyms ? &*synonyms : nullptr, word_list_or_empty(in.tag_allow),
                                 word_list_or_empty(in.tag_deny));
  for (const auto& w : expansion.warnings) log << "warning: " << w << '\n';

  std::unique_ptr<HttpTransport> transport;
  std::unique_ptr<Clock> clock;
  std::string token;
  if (options.offline) {
    if (!in.fixtures) throw ValidationError("ingest.fixtures", "--offline needs a fixture directory");
    transport = std::make_unique<FixtureTransport>(*in.fixtures);
    clock = std::make_unique<ManualClock>(std::chrono::system_clock::now());
  } else {
    token = resolve_credential();
    transport = std::make_unique<LiveTransport>(in.api_base);
    clock = std::make_unique<SystemClock>();
  }
  GithubIssueSource source(*transport, *clock, token);

  std::map<Label, std::vector<IssueReport>> pools;
  std::set<std::string> seen;
  for (const auto& [query_label, queries] : in.queries) {
    for (const auto& query : queries) {
      FetchRequest request;
      request.repo_query = query;
      request.issue_filter = in.filter;
      request.tag_set = expansion.tag_set;
      request.quota = in.quota_per_query;
      request.project_filter = in.project_filter;
      request.reference_date = in.reference_date;
      auto issues = source.fetch_issues(request);
      log << "query [" << to_string(query_label) << "] " << query << ": " << issues.size() << " issues\n";
      for (auto& issue : issues) {
        if (!seen.insert(issue.id).second) continue;
        const auto label = adjudicate_label(issue, expansion.tag_set);
        issue.label = label;
        pools[label].push_back(std::move(issue));
      }
    }
  }
  for (const auto& w : source.warnings) log << "warning: " << w << '\n';

  const auto seed = options.seed.value_or(in.seed);
  auto corpus = build_balanced_corpus(pools, in.per_class, seed);
  const auto& stats = source.stats();
  json queries = json::object();
  for (const auto& [label, qs] : in.queries) queries[std::string(to_string(label))] = qs;
  corpus.provenance = {{"source", options.offline ? "fixtures" : in.api_base},
                       {"queries", queries},
                       {"window", {{"first", in.filter.window.first}, {"last", in.filter.window.last}}},
                       {"tag_set", std::vector<std::string>(expansion.tag_set.tags.begin(), expansion.tag_set.tags.end())},
                       {"tag_set_degraded", expansion.degraded},
                       {"per_class", in.per_class},
                       {"seed", seed},
                       {"fetch", {{"pages", stats.pages},
                                  {"seen", stats.seen},
                                  {"rejected_by_issue_filter", stats.rejected_by_issue_filter},
                                  {"rejected_by_project_filter", stats.rejected_by_project_filter},
                                  {"duplicates", stats.duplicates},
                                  {"retries", stats.retries}}}};
  std::vector<ProvenanceInput> inputs;
  if (options.offline) inputs.push_back(hash_input("fixtures", *in.fixtures, out));
  if (in.synonyms) inputs.push_back(hash_input("synonyms", *in.synonyms, out));
  save_corpus(out, corpus, inputs);
  log << "wrote " << corpus.issues.size() << " issues to " << out.string() << '\n';
}

void cmd_preprocess(const PipelineConfig& config, const Options& options, std::ostream& log) {
  const auto out = output_or(options, config.paths.preprocessed);
  require_fresh(config.paths.corpus, "corpus");
  const auto corpus = load_corpus(config.paths.corpus);
  const auto pp = make_preprocessor(config);
  std::vector<PreprocessedIssue> issues;
  issues.reserve(corpus.issues.size());
  std::size_t empty = 0;
  for (const auto& issue : corpus.issues) {
    issues.push_back(pp.process(issue));
    if (issues.back().tokens.empty()) ++empty;
  }
  save_preprocessed(out, issues, inputs_for(out, {{"corpus", config.paths.corpus}}),
                    {{"preprocess_digest", pp.digest()}, {"config", config.preprocess.to_json()}});
  log << "preprocessed " << issues.size() << " issues (" << empty << " left without tokens) into " << out.string()
      << '\n';
}

void cmd_mine_surrogates(const PipelineConfig& config, const Options& options, std::ostream& log) {
  const auto pp = make_preprocessor(config);
  const auto issues = load_current_preprocessed(config, pp);
  if (!fs::exists(phrases_path(config.paths.preprocessed))) {
    log << "warning: no phrase-break file next to " << config.paths.preprocessed.string()
        << "; candidates are split on stop words only\n";
  }
  const auto& sc = config.surrogates;
  auto mined = mine_surrogates(rake_documents(issues), pp.stopwords(), sc.k, word_list_or_empty(sc.allow),
                               word_list_or_empty(sc.deny), pp.digest());

  if (!options.random) {
    const auto out = output_or(options, config.paths.lexicon);
    for (const auto& w : mined.lexicon.warnings) log << "warning: " << w << '\n';
    auto inputs = inputs_for(out, {{"preprocessed", config.paths.preprocessed}});
    if (sc.allow) inputs.push_back(hash_input("allow", *sc.allow, out));
    if (sc.deny) inputs.push_back(hash_input("deny", *sc.deny, out));
    save_lexicon(out, mined.lexicon, inputs);
    log << "lexicon: " << mined.lexicon.of(Label::security).size() << " security, "
        << mined.lexicon.of(Label::non_security).size() << " non-security keywords (" << mined.tied.size()
        << " ties dropped) -> " << out.string() << '\n';
    return;
  }

  const auto out = output_or(options, config.paths.random_lists);
  const auto lexicon = load_checked_lexicon(config.paths.lexicon, "lexicon", pp);
  const auto seed = options.seed.value_or(sc.random_seed);
  const auto lists = sample_random_keywords(mined.vocabulary(), lexicon, sc.k, seed);
  save_lexicon(out, lists,
               inputs_for(out, {{"preprocessed", config.paths.preprocessed}, {"lexicon", config.paths.lexicon}}),
               "random_keyword_lists");
  log << "random keyword lists (seed " << seed << ") -> " << out.string() << '\n';
}

void cmd_mask(const PipelineConfig& config, const Options& options, std::ostream& log) {
  const auto pp = make_preprocessor(config);
  const auto issues = load_current_preprocessed(config, pp);
  const auto& source_path = options.random ? config.paths.random_lists : config.paths.lexicon;
  const auto source = load_checked_lexicon(source_path, options.random ? "random_keyword_lists" : "lexicon", pp);
  const auto out = output_or(options, options.random ? config.paths.masked_random : config.paths.masked);

  std::vector<MaskedInstance> instances;
  instances.reserve(issues.size());
  std::size_t masks = 0;
  std::size_t cls_only = 0;
  for (const auto& issue : issues) {
    if (!issue.label) {
      instances.push_back(apply_masks_unlabeled(issue, source));
    } else {
      instances.push_back(options.random ? apply_random_masks(issue, source) : apply_masks(issue, source));
    }
    masks += instances.back().mask_positions.size();
    if (instances.back().decision_hint == DecisionHint::cls_only) ++cls_only;
  }
  save_masked(out, instances,
              inputs_for(out, {{"preprocessed", config.paths.preprocessed},
                               {options.random ? "random_keyword_lists" : "lexicon", source_path}}),
              {{"condition", options.random ? "random" : "surrogate"}});
  log << "masked " << instances.size() << " issues: " << masks << " masks, " << cls_only << " without any -> "
      << out.string() << '\n';
}

void cmd_pretrain(const PipelineConfig& config, const Options& options, std::ostream& log) {
  const auto out = output_or(options, config.paths.pretrained);
  const auto pp = make_preprocessor(config);
  auto pc = config.pretrain.config;
  if (options.seed) pc.seed = *options.seed;
  if (options.epochs) pc.epochs = *options.epochs;

  std::vector<std::vector<std::string>> docs;
  std::vector<ProvenanceInput> inputs;
  const auto& text = config.pretrain.text;
  if (text == "synthetic") {
    auto sc = config.synthetic;
    sc.seed = derive_seed(sc.seed, 99);
    for (const auto& doc : generate_pretraining_text(sc, config.pretrain.synthetic_documents)) {
      docs.push_back(pp.tokens(doc));
    }
  } else if (text == "corpus") {
    for (auto& issue : load_current_preprocessed(config, pp)) docs.push_back(std::move(issue.tokens));
    inputs.push_back(hash_input("preprocessed", config.paths.preprocessed, out));
  } else {
    std::ifstream in(text);
    if (!in) throw DependencyError("cannot open pretraining text " + text);
    for (std::string line; std::getline(in, line);) docs.push_back(pp.tokens(line));
    inputs.push_back(hash_input("text", text, out));
  }
  std::erase_if(docs, [](const auto& d) { return d.empty(); });
  if (docs.empty()) throw ValidationError("pretrain.text", "no usable documents");

  const auto model = pretrain_mlm(docs, pc);
  save_pretrained(out, model, inputs);
  log << "pretrained encoder on " << docs.size() << " documents; epoch losses:";
  for (auto l : model.epoch_losses) log << ' ' << l;
  log << " -> " << out.string() << '\n';
}

void cmd_train(const PipelineConfig& config, const Options& options, std::ostream& log) {
  const auto& masked_path = options.random ? config.paths.masked_random : config.paths.masked;
  require_fresh(masked_path, options.random ? "masked_random" : "masked");
  require_fresh(config.paths.pretrained, "pretrained");
  const auto instances = load_masked(masked_path);
  const auto base = load_pretrained(config.paths.pretrained);
  auto tc = config.train;
  if (options.seed) tc.seed = *options.seed;
  if (options.epochs) tc.epochs = *options.epochs;
  tc.validate(base.encoder.config().max_positions);
  if (!tc.encoder_id.empty() && tc.encoder_id != base.id) {
    throw DependencyError("train.encoder_id '" + tc.encoder_id + "' does not match the pretrained encoder '" +
                          base.id + "'");
  }

  const auto out = output_or(options, config.paths.checkpoint);
  const auto model = fine_tune(base, instances, tc);
  save_classifier(out, model, inputs_for(out, {{"masked", masked_path}, {"pretrained", config.paths.pretrained}}));
  log << "fine-tuned on " << instances.size() << " instances; epoch losses:";
  for (auto l : model.epoch_losses) log << ' ' << l;
  log << "\ninitial weights " << model.initial_weights_digest << " -> " << out.string() << '\n';
}

void cmd_evaluate(const PipelineConfig& config, const Options& options, std::ostream& log) {
  const auto pp = make_preprocessor(config);
  const auto issues = load_current_preprocessed(config, pp);
  const auto lexicon = load_checked_lexicon(config.paths.lexicon, "lexicon", pp);
  require_fresh(config.paths.pretrained, "pretrained");
  const auto base = load_pretrained(config.paths.pretrained);

  CvConfig cv;
  cv.folds = options.folds.value_or(config.evaluate.folds);
  cv.fold_seed = options.seed.value_or(config.evaluate.seeds.front());
  cv.train = config.train;
  cv.train.seed = cv.fold_seed;
  if (options.epochs) cv.train.epochs = *options.epochs;
  cv.threshold = config.evaluate.threshold;
  CvHooks hooks;
  hooks.log = [&](const std::string& line) { log << line << '\n' << std::flush; };

  if (options.ablation) {
    const auto out = output_or(options, config.paths.ablation_report);
    const auto vocabulary = mine_surrogates(rake_documents(issues), pp.stopwords(), config.surrogates.k,
                                            word_list_or_empty(config.surrogates.allow),
                                            word_list_or_empty(config.surrogates.deny), pp.digest())
                                .vocabulary();
    auto seeds = config.evaluate.seeds;
    if (options.seed) seeds = {*options.seed};
    const auto report = run_ablation(
        issues, lexicon,
        [&](std::uint64_t seed) { return sample_random_keywords(vocabulary, lexicon, config.surrogates.k, seed); },
        base, cv, seeds, config.evaluate.alpha, hooks);
    save_ablation_report(out, report,
                         inputs_for(out, {{"preprocessed", config.paths.preprocessed},
                                          {"lexicon", config.paths.lexicon},
                                          {"pretrained", config.paths.pretrained}}));
    if (config.evaluate.plots) {
      for (std::size_t i = 0; i < report.seeds.size(); ++i) {
        const auto sub = "seed_" + std::to_string(report.seeds[i]);
        write_confusion_plots(config.paths.plots / "surrogate" / sub, report.surrogate[i].decomposition);
        write_confusion_plots(config.paths.plots / "random" / sub, report.random[i].decomposition);
      }
    }
    log << std::fixed << std::setprecision(4);
    for (const auto& metric : {"precision", "recall", "f1"}) {
      log << metric << ": surrogate " << report.surrogate_mean.at(metric) << ", random "
          << report.random_mean.at(metric) << '\n';
    }
    for (const auto& c : report.stats.comparisons) {
      log << c.metric << ": " << c.test << " p=" << c.p_value << " vs " << c.threshold
          << (c.significant ? " (significant)" : " (not significant)") << '\n';
    }
    log << "-> " << out.string() << '\n';
    return;
  }

  const auto& source_path = options.random ? config.paths.random_lists : config.paths.lexicon;
  const auto source =
      options.random ? load_checked_lexicon(source_path, "random_keyword_lists", pp) : lexicon;
  const auto out = output_or(options, options.random ? random_report_path(config) : config.paths.report);
  const auto report = run_cross_validation(
      issues, source, options.random ? MaskingCondition::random : MaskingCondition::surrogate, base, cv, hooks);
  save_eval_report(out, report,
                   inputs_for(out, {{"preprocessed", config.paths.preprocessed},
                                    {options.random ? "random_keyword_lists" : "lexicon", source_path},
                                    {"pretrained", config.paths.pretrained}}));
  if (config.evaluate.plots) write_confusion_plots(config.paths.plots / report.condition, report.decomposition);
  print_summary(log, report.condition, report);
  log << "-> " << out.string() << '\n';
}

void cmd_classify(const PipelineConfig& config, const Options& options, std::ostream& log) {
  if (!options.input) throw ValidationError("--input", "classify needs an input corpus file");
  const auto checkpoint = options.checkpoint.value_or(config.paths.checkpoint);
  if (!fs::exists(*options.input)) throw DependencyError("missing input " + options.input->string());
  require_fresh(checkpoint, "checkpoint");
  const auto pp = make_preprocessor(config);
  const auto lexicon = load_checked_lexicon(config.paths.lexicon, "lexicon", pp);
  const auto model = load_classifier(checkpoint);
  const auto corpus = load_corpus(*options.input);

  std::vector<MaskedInstance> instances;
  for (const auto& issue : corpus.issues) instances.push_back(apply_masks_unlabeled(pp.process(issue), lexicon));
  const auto outcomes = predict_batch(model, instances, config.evaluate.threshold);

  const auto out = output_or(options, config.paths.predictions);
  JsonlWriter writer(out);
  std::size_t fallback = 0;
  for (const auto& o : outcomes) {
    writer.write(to_json(o));
    if (o.decision_path == DecisionPath::cls_fallback) ++fallback;
  }
  writer.close();
  write_provenance(out, Provenance{"predictions", "",
                                   inputs_for(out, {{"input", *options.input},
                                                    {"checkpoint", checkpoint},
                                                    {"lexicon", config.paths.lexicon}}),
                                   {{"threshold", config.evaluate.threshold}}});
  log << "classified " << outcomes.size() << " issues (" << fallback << " via [CLS] fallback) -> " << out.string()
      << '\n';
}

void cmd_verify(const PipelineConfig& config, const Options&, std::ostream& log) {
  const auto& p = config.paths;
  std::size_t checked = 0;
  std::vector<std::string> problems;
  for (const auto& artifact : {p.corpus, p.preprocessed, p.lexicon, p.random_lists, p.masked, p.masked_random,
                               p.pretrained, p.checkpoint, p.report, random_report_path(config), p.ablation_report,
                               p.predictions}) {
    if (!fs::exists(artifact)) continue;
    ++checked;
    auto found = verify_provenance(artifact);
    log << (found.empty() ? "ok    " : "FAIL  ") << artifact.string() << '\n';
    problems.insert(problems.end(), found.begin(), found.end());
  }
  for (const auto& problem : problems) log << "  " << problem << '\n';
  if (!problems.empty()) throw DependencyError(std::to_string(problems.size()) + " provenance problem(s)");
  log << checked << " artifact(s) verified\n";
}

int exit_code_for(const std::exception& error) {
  if (dynamic_cast<const ValidationError*>(&error)) return 2;
  if (dynamic_cast<const DependencyError*>(&error)) return 3;
  if (dynamic_cast<const CredentialError*>(&error)) return 4;
  if (dynamic_cast<const TransportError*>(&error)) return 5;
  if (dynamic_cast<const ShortfallError*>(&error)) return 6;
  if (dynamic_cast<const DegenerateSampleError*>(&error)) return 7;
  if (dynamic_cast<const BackendUnavailableError*>(&error)) return 8;
  return 1;
}

}  // namespace issuemask::cli
