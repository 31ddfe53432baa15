#include "issuemask/cross_validation.hpp"

#include <algorithm>

#include "issuemask/hashing.hpp"
#include "issuemask/masking.hpp"
#include "issuemask/rng.hpp"

namespace issuemask {
using nlohmann::json;

std::vector<std::vector<std::size_t>> stratified_folds(const std::vector<Label>& labels, std::size_t folds,
                                                       std::uint64_t seed) {
  if (folds < 2) throw ValidationError("folds", "need at least 2 folds");
  if (folds > labels.size()) throw ValidationError("folds", "more folds than issues");

  std::vector<std::vector<std::size_t>> out(folds);
  std::size_t next = 0;
  for (std::size_t c = 0; c < kNumLabels; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (label_index(labels[i]) == c) members.push_back(i);
    }
    SeededRng rng(derive_seed(seed, c));
    rng.shuffle(members);
    for (auto i : members) {
      out[next].push_back(i);
      next = (next + 1) % folds;
    }
  }
  for (auto& f : out) std::sort(f.begin(), f.end());
  return out;
}

std::string_view to_string(MaskingCondition condition) {
  return condition == MaskingCondition::surrogate ? "surrogate" : "random";
}

MaskingCondition parse_masking_condition(std::string_view text) {
  if (text == "surrogate") return MaskingCondition::surrogate;
  if (text == "random") return MaskingCondition::random;
  throw ValidationError("condition", "unknown masking condition '" + std::string(text) + "'");
}

json CvConfig::to_json() const {
  return {{"folds", folds}, {"fold_seed", fold_seed}, {"train", train.to_json()}, {"threshold", threshold}};
}

std::map<std::string, MetricSummary> summarize(const std::vector<FoldMetrics>& folds) {
  std::map<std::string, std::vector<double>> values;
  for (const auto& f : folds) {
    values["precision"].push_back(f.weighted.precision);
    values["recall"].push_back(f.weighted.recall);
    values["f1"].push_back(f.weighted.f1);
    values["binary_precision"].push_back(f.binary.precision);
    values["binary_recall"].push_back(f.binary.recall);
    values["binary_f1"].push_back(f.binary.f1);
  }
  std::map<std::string, MetricSummary> out;
  for (const auto& [name, xs] : values) out[name] = {mean(xs), sample_std(xs)};
  return out;
}

EvalReport run_cross_validation(const std::vector<PreprocessedIssue>& corpus, const SurrogateLexicon& source,
                                MaskingCondition condition, const PretrainedEncoder& base, const CvConfig& config,
                                const CvHooks& hooks) {
  config.train.validate(base.encoder.config().max_positions);
  std::vector<Label> labels;
  std::vector<MaskedInstance> instances;
  labels.reserve(corpus.size());
  instances.reserve(corpus.size());
  for (const auto& issue : corpus) {
    if (!issue.label) throw ValidationError("corpus", "issue " + issue.issue_id + " has no label");
    labels.push_back(*issue.label);
    instances.push_back(condition == MaskingCondition::surrogate ? apply_masks(issue, source)
                                                                 : apply_random_masks(issue, source));
  }
  const auto assignment = stratified_folds(labels, config.folds, config.fold_seed);

  EvalReport report;
  report.condition = std::string(to_string(condition));
  std::vector<PredictionOutcome> all_outcomes;
  std::vector<Label> all_truths;
  std::vector<char> in_validation(corpus.size());

  for (std::size_t k = 0; k < assignment.size(); ++k) {
    std::fill(in_validation.begin(), in_validation.end(), 0);
    for (auto i : assignment[k]) in_validation[i] = 1;
    std::vector<MaskedInstance> train;
    std::vector<MaskedInstance> validation;
    FoldContext ctx;
    ctx.fold_index = k;
    for (std::size_t i = 0; i < instances.size(); ++i) {
      if (in_validation[i]) {
        validation.push_back(instances[i]);
        ctx.validation_ids.push_back(instances[i].issue_id);
      } else {
        train.push_back(instances[i]);
        ctx.train_ids.push_back(instances[i].issue_id);
      }
    }

    const auto model = fine_tune(base, train, config.train);
    ctx.initial_weights_digest = model.initial_weights_digest;
    if (!report.folds.empty() && report.folds.front().initial_weights_digest != model.initial_weights_digest) {
      throw Error("fold " + std::to_string(k) + " did not start from the pristine pretrained weights");
    }
    if (hooks.on_fold) hooks.on_fold(ctx);

    const auto outcomes = predict_batch(model, validation, config.threshold);
    std::vector<Label> truths;
    std::vector<Label> predicted;
    for (std::size_t i = 0; i < validation.size(); ++i) {
      truths.push_back(*validation[i].truth_label);
      predicted.push_back(outcomes[i].final_label);
    }
    FoldMetrics fm;
    fm.fold_index = k;
    fm.confusion = confusion_matrix(truths, predicted);
    fm.weighted = compute_prf(fm.confusion, Label::security, Weighting::class_weighted);
    fm.binary = compute_prf(fm.confusion, Label::security, Weighting::binary_positive);
    fm.validation_ids = std::move(ctx.validation_ids);
    fm.train_size = train.size();
    fm.initial_weights_digest = model.initial_weights_digest;
    fm.epoch_losses = model.epoch_losses;
    if (hooks.log) {
      hooks.log(report.condition + " fold " + std::to_string(k + 1) + "/" + std::to_string(assignment.size()) +
                ": weighted F1 " + std::to_string(fm.weighted.f1));
    }
    report.folds.push_back(std::move(fm));
    all_outcomes.insert(all_outcomes.end(), outcomes.begin(), outcomes.end());
    all_truths.insert(all_truths.end(), truths.begin(), truths.end());
  }

  report.summary = summarize(report.folds);
  report.decomposition = confusion_decompose(all_outcomes, all_truths);
  report.config = config.to_json();
  report.config["condition"] = report.condition;
  report.config["pretrained_digest"] = base.digest();
  report.config["source_digest"] = sha256_hex(to_json(source).dump());
  return report;
}

StatsBlock compare_conditions(const std::map<std::string, std::vector<double>>& treatment,
                              const std::map<std::string, std::vector<double>>& baseline, double alpha) {
  StatsBlock block;
  block.alpha = alpha;
  block.hypotheses = static_cast<int>(treatment.size());
  block.threshold = bonferroni_threshold(alpha, block.hypotheses);
  for (const auto& [metric, a] : treatment) {
    const auto it = baseline.find(metric);
    if (it == baseline.end()) throw ValidationError("compare_conditions", "baseline lacks metric " + metric);
    block.comparisons.push_back(compare_paired(metric, a, it->second, alpha, block.hypotheses));
    try {
      block.variance_ratios[metric] = variance_ratio(a, it->second);
    } catch (const DegenerateSampleError&) {
      // No spread in the baseline; the ratio is undefined and is left out.
    }
  }
  return block;
}

AblationReport run_ablation(const std::vector<PreprocessedIssue>& corpus, const SurrogateLexicon& lexicon,
                            const std::function<RandomKeywordLists(std::uint64_t)>& random_lists_for_seed,
                            const PretrainedEncoder& base,
                            const CvConfig& config, const std::vector<std::uint64_t>& seeds, double alpha,
                            const CvHooks& hooks) {
  if (seeds.empty()) throw ValidationError("seeds", "need at least one seed");
  AblationReport out;
  out.seeds = seeds;
  std::map<std::string, std::vector<double>> treatment;
  std::map<std::string, std::vector<double>> baseline;
  for (auto seed : seeds) {
    CvConfig cfg = config;
    cfg.fold_seed = seed;
    cfg.train.seed = seed;
    auto sur = run_cross_validation(corpus, lexicon, MaskingCondition::surrogate, base, cfg, hooks);
    auto rnd = run_cross_validation(corpus, random_lists_for_seed(seed), MaskingCondition::random, base, cfg, hooks);
    for (std::size_t k = 0; k < sur.folds.size(); ++k) {
      if (sur.folds[k].validation_ids != rnd.folds[k].validation_ids) {
        throw Error("ablation conditions saw different folds");
      }
      treatment["precision"].push_back(sur.folds[k].weighted.precision);
      treatment["recall"].push_back(sur.folds[k].weighted.recall);
      treatment["f1"].push_back(sur.folds[k].weighted.f1);
      baseline["precision"].push_back(rnd.folds[k].weighted.precision);
      baseline["recall"].push_back(rnd.folds[k].weighted.recall);
      baseline["f1"].push_back(rnd.folds[k].weighted.f1);
    }
    out.surrogate.push_back(std::move(sur));
    out.random.push_back(std::move(rnd));
  }
  for (const auto& metric : {"precision", "recall", "f1"}) {
    std::vector<double> s;
    std::vector<double> r;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      s.push_back(out.surrogate[i].summary.at(metric).mean);
      r.push_back(out.random[i].summary.at(metric).mean);
    }
    out.surrogate_mean[metric] = mean(s);
    out.random_mean[metric] = mean(r);
  }
  out.stats = compare_conditions(treatment, baseline, alpha);
  return out;
}

}  // namespace issuemask
