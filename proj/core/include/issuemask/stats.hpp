#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace issuemask {

double mean(const std::vector<double>& xs);
/// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
double sample_std(const std::vector<double>& xs);
double sample_variance(const std::vector<double>& xs);

struct ShapiroWilkResult {
  double w = 0.0;
  double p = 0.0;
  friend bool operator==(const ShapiroWilkResult&, const ShapiroWilkResult&) = default;
};

/// Royston's AS R94 approximation. Requires 3 <= n <= 50 (ValidationError);
/// a constant sample raises DegenerateSampleError.
ShapiroWilkResult shapiro_wilk(std::vector<double> sample);

enum class WilcoxonMode { exact, normal_approx };

struct WilcoxonResult {
  double statistic = 0.0;  // min(W+, W-)
  double w_plus = 0.0;
  double p_two_sided = 1.0;
  std::size_t n = 0;  // after dropping zero differences
  WilcoxonMode mode = WilcoxonMode::exact;
};

/// Signed-rank test on a - b. Zero differences are dropped, ties get average
/// ranks. Exact mode counts all 2^n sign assignments and requires n <= 25;
/// normal_approx applies tie and continuity corrections.
WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& a, const std::vector<double>& b, WilcoxonMode mode);
/// Exact for n <= 25 after dropping zeros, normal approximation above.
WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& a, const std::vector<double>& b);

struct PairedTResult {
  double t = 0.0;
  double p_two_sided = 1.0;
  double df = 0.0;
};

PairedTResult paired_t(const std::vector<double>& a, const std::vector<double>& b);

double bonferroni_threshold(double alpha, int k);

struct VarianceRatioResult {
  double f = 0.0;
  double p_two_sided = 1.0;
  double df_num = 0.0;
  double df_den = 0.0;
  friend bool operator==(const VarianceRatioResult&, const VarianceRatioResult&) = default;
};

VarianceRatioResult variance_ratio(const std::vector<double>& a, const std::vector<double>& b);

/// One paired comparison under the testing protocol: Shapiro-Wilk on the
/// differences, paired t when normality is not rejected at alpha, Wilcoxon
/// otherwise, judged against alpha / hypotheses.
struct PairedComparison {
  std::string metric;
  std::size_t n = 0;
  std::optional<ShapiroWilkResult> normality;
  std::string normality_note;  // set when Shapiro-Wilk could not run
  std::string test;            // "paired_t", "wilcoxon", or "none"
  double statistic = 0.0;
  double p_value = 1.0;
  double threshold = 0.0;
  bool significant = false;
  std::string note;
  friend bool operator==(const PairedComparison&, const PairedComparison&) = default;
};

PairedComparison compare_paired(const std::string& metric, const std::vector<double>& a, const std::vector<double>& b,
                                double alpha, int hypotheses);

nlohmann::json to_json(const PairedComparison& c);
PairedComparison paired_comparison_from_json(const nlohmann::json& j, const std::string& where);

}  // namespace issuemask
