#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "issuemask/classifier.hpp"
#include "issuemask/metrics.hpp"
#include "issuemask/preprocess.hpp"
#include "issuemask/pretrain.hpp"
#include "issuemask/stats.hpp"
#include "issuemask/surrogates.hpp"

namespace issuemask {

/// Stratified, seeded assignment of indices to `folds` folds. Each class is
/// shuffled and dealt round-robin, continuing the fold counter across
/// classes, so fold sizes and per-class counts differ by at most one.
/// Folds are returned with indices sorted. Throws ValidationError when
/// folds < 2 or folds > labels.size().
std::vector<std::vector<std::size_t>> stratified_folds(const std::vector<Label>& labels, std::size_t folds,
                                                       std::uint64_t seed);

enum class MaskingCondition { surrogate, random };
std::string_view to_string(MaskingCondition condition);
MaskingCondition parse_masking_condition(std::string_view text);

struct CvConfig {
  std::size_t folds = 10;
  std::uint64_t fold_seed = 0;
  TrainConfig train;
  double threshold = 0.5;

  nlohmann::json to_json() const;
};

struct FoldMetrics {
  std::size_t fold_index = 0;
  Prf weighted;  // support-weighted over both classes
  Prf binary;    // security as the positive class
  Confusion confusion{};
  std::vector<std::string> validation_ids;
  std::size_t train_size = 0;
  std::string initial_weights_digest;
  std::vector<double> epoch_losses;

  friend bool operator==(const FoldMetrics&, const FoldMetrics&) = default;
};

struct MetricSummary {
  double mean = 0.0;
  double std = 0.0;
  friend bool operator==(const MetricSummary&, const MetricSummary&) = default;
};

struct StatsBlock {
  double alpha = 0.05;
  int hypotheses = 3;
  double threshold = 0.05 / 3;
  std::vector<PairedComparison> comparisons;
  std::map<std::string, VarianceRatioResult> variance_ratios;
  friend bool operator==(const StatsBlock&, const StatsBlock&) = default;
};

struct EvalReport {
  std::string condition;
  std::vector<FoldMetrics> folds;
  // Keys: precision, recall, f1 (weighted) and binary_precision, binary_recall, binary_f1.
  std::map<std::string, MetricSummary> summary;
  Decomposition decomposition;
  std::optional<StatsBlock> stats;
  nlohmann::json config;

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

/// What the trainer and evaluator saw in one fold; passed to CvHooks::on_fold.
struct FoldContext {
  std::size_t fold_index = 0;
  std::vector<std::string> train_ids;
  std::vector<std::string> validation_ids;
  std::string initial_weights_digest;
};

struct CvHooks {
  std::function<void(const FoldContext&)> on_fold;
  std::function<void(const std::string&)> log;
};

/// Masks every issue with `source` (own-class keywords), then for each fold
/// fine-tunes a fresh copy of `base` on the other folds and evaluates on the
/// held-out one. Every fold must start from the same initial weights.
EvalReport run_cross_validation(const std::vector<PreprocessedIssue>& corpus, const SurrogateLexicon& source,
                                MaskingCondition condition, const PretrainedEncoder& base, const CvConfig& config,
                                const CvHooks& hooks = {});

/// Per-metric mean and sample standard deviation over fold values.
std::map<std::string, MetricSummary> summarize(const std::vector<FoldMetrics>& folds);

struct AblationReport {
  std::vector<std::uint64_t> seeds;
  std::vector<EvalReport> surrogate;
  std::vector<EvalReport> random;
  std::map<std::string, double> surrogate_mean;  // metric -> mean over seeds of the per-seed means
  std::map<std::string, double> random_mean;
  StatsBlock stats;  // paired over (seed, fold) pairs

  friend bool operator==(const AblationReport&, const AblationReport&) = default;
};

/// Runs both masking conditions on identical folds for every seed (the seed
/// drives the fold assignment, training, and the random keyword draw), then
/// compares the paired per-fold weighted precision, recall and F1.
AblationReport run_ablation(const std::vector<PreprocessedIssue>& corpus, const SurrogateLexicon& lexicon,
                            const std::function<RandomKeywordLists(std::uint64_t)>& random_lists_for_seed,
                            const PretrainedEncoder& base,
                            const CvConfig& config, const std::vector<std::uint64_t>& seeds, double alpha = 0.05,
                            const CvHooks& hooks = {});

StatsBlock compare_conditions(const std::map<std::string, std::vector<double>>& treatment,
                              const std::map<std::string, std::vector<double>>& baseline, double alpha);

}  // namespace issuemask
