#include <gtest/gtest.h>

#include <cmath>

#include "issuemask/common.hpp"
#include "issuemask/rng.hpp"
#include "issuemask/stats.hpp"

using namespace issuemask;

namespace {

// Reference values below were produced once with scipy.stats and frozen here.
const std::vector<double> kWeights{148, 154, 158, 160, 161, 162, 166, 170, 182, 195, 236};
const std::vector<double> kSleep1{0.7, -1.6, -0.2, -1.2, -0.1, 3.4, 3.7, 0.8, 0.0, 2.0};
const std::vector<double> kSleep2{1.9, 0.8, 1.1, 0.1, -0.1, 4.4, 5.5, 1.6, 4.6, 3.4};
const std::vector<double> kA{0.91, 0.93, 0.95, 0.90, 0.92, 0.94, 0.96, 0.89, 0.93, 0.92};
const std::vector<double> kB{0.88, 0.91, 0.90, 0.89, 0.90, 0.92, 0.91, 0.87, 0.90, 0.88};

std::vector<double> zeros(std::size_t n) { return std::vector<double>(n, 0.0); }

// Two-sided exact p by listing every sign assignment of the average ranks.
double enumerate_wilcoxon_p(const std::vector<double>& d_in) {
  std::vector<double> d;
  for (double v : d_in) {
    if (v != 0.0) d.push_back(v);
  }
  const auto n = d.size();
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n; ++i) {
    double below = 0, equal = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (std::abs(d[j]) < std::abs(d[i])) ++below;
      if (std::abs(d[j]) == std::abs(d[i])) ++equal;
    }
    ranks[i] = below + (equal + 1) / 2;
  }
  double observed = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (d[i] > 0) observed += ranks[i];
  }
  double le = 0, ge = 0;
  const std::size_t total = std::size_t{1} << n;
  for (std::size_t mask = 0; mask < total; ++mask) {
    double w = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask >> i & 1) w += ranks[i];
    }
    if (w <= observed + 1e-9) ++le;
    if (w >= observed - 1e-9) ++ge;
  }
  return std::min(1.0, 2.0 * std::min(le, ge) / static_cast<double>(total));
}

}  // namespace

TEST(ShapiroWilk, ReferenceValues) {
  const auto r = shapiro_wilk(kWeights);
  EXPECT_NEAR(r.w, 0.7888146948631716, 1e-6);
  EXPECT_NEAR(r.p, 0.006703814061898823, 1e-5);
  EXPECT_NEAR(r.w, 0.79, 0.005);

  const auto x12 = shapiro_wilk({2.1, 3.4, 1.9, 5.6, 4.4, 3.3, 2.8, 4.9, 3.0, 4.1, 2.2, 3.9});
  EXPECT_NEAR(x12.w, 0.9654023206811778, 1e-6);
  EXPECT_NEAR(x12.p, 0.8572169193391159, 1e-4);
}

TEST(ShapiroWilk, NormalScoresGiveWNearOne) {
  // Blom-type scores (i - 0.375) / (n + 0.25) through the normal quantile.
  std::vector<double> twenty;
  for (int i = 1; i <= 20; ++i) {
    const double u = (i - 0.375) / 20.25;
    // Invert the normal CDF by bisection.
    double lo = -6, hi = 6;
    for (int it = 0; it < 200; ++it) {
      const double mid = (lo + hi) / 2;
      (0.5 * std::erfc(-mid / std::sqrt(2.0)) < u ? lo : hi) = mid;
    }
    twenty.push_back((lo + hi) / 2);
  }
  EXPECT_NEAR(shapiro_wilk(twenty).w, 0.997179693088336, 1e-6);
}

TEST(ShapiroWilk, Errors) {
  EXPECT_THROW(shapiro_wilk({1.0, 2.0}), ValidationError);
  EXPECT_THROW(shapiro_wilk({3.0, 3.0, 3.0, 3.0}), DegenerateSampleError);
}

TEST(PairedT, ReferenceValues) {
  const auto r = paired_t(kSleep1, kSleep2);
  EXPECT_NEAR(r.t, -4.062127683382037, 1e-9);
  EXPECT_NEAR(r.p_two_sided, 0.00283289019738427, 1e-9);
  EXPECT_EQ(r.df, 9.0);
  const auto ab = paired_t(kA, kB);
  EXPECT_NEAR(ab.t, 6.692307692307699, 1e-8);
  EXPECT_NEAR(ab.p_two_sided, 8.93162437373208e-05, 1e-10);
}

TEST(PairedT, ClosedFormTwoDegreesOfFreedom) {
  // d = [1, 2, 3]: mean 2, sd 1, t = 2 sqrt(3); with df 2 the two-sided p is 1 - |t| / sqrt(t^2 + 2).
  const auto r = paired_t({1, 2, 3}, zeros(3));
  const double t = 2 * std::sqrt(3.0);
  EXPECT_NEAR(r.t, t, 1e-12);
  EXPECT_NEAR(r.p_two_sided, 1 - t / std::sqrt(t * t + 2), 1e-9);
  const auto flat = paired_t({1, -1, 1, -1}, zeros(4));
  EXPECT_NEAR(flat.t, 0.0, 1e-15);
  EXPECT_NEAR(flat.p_two_sided, 1.0, 1e-9);
}

TEST(PairedT, ConstantDifferenceIsDegenerate) {
  EXPECT_THROW(paired_t({2, 3, 4}, {1, 2, 3}), DegenerateSampleError);
  EXPECT_THROW(paired_t({1}, {0}), ValidationError);
}

TEST(Wilcoxon, ReferenceValues) {
  const auto sleep = wilcoxon_signed_rank(kSleep1, kSleep2);
  EXPECT_EQ(sleep.statistic, 0.0);
  EXPECT_EQ(sleep.n, 9u);
  EXPECT_NEAR(sleep.p_two_sided, 0.00390625, 1e-12);

  const auto ab = wilcoxon_signed_rank(kA, kB, WilcoxonMode::exact);
  EXPECT_EQ(ab.statistic, 0.0);
  EXPECT_NEAR(ab.p_two_sided, 0.001953125, 1e-12);

  std::vector<double> d;
  for (int i = 1; i <= 30; ++i) d.push_back(i % 4 == 0 ? -i : i);
  const auto approx = wilcoxon_signed_rank(d, zeros(30), WilcoxonMode::normal_approx);
  EXPECT_EQ(approx.statistic, 112.0);
  EXPECT_NEAR(approx.p_two_sided, 0.013579415038448943, 1e-9);
  EXPECT_EQ(wilcoxon_signed_rank(d, zeros(30)).mode, WilcoxonMode::normal_approx);
}

TEST(Wilcoxon, SmallExactCases) {
  EXPECT_NEAR(wilcoxon_signed_rank({1, 2, 3, 4, 5}, zeros(5)).p_two_sided, 0.0625, 1e-12);
  EXPECT_NEAR(wilcoxon_signed_rank({1, -1, 2, -2, 3, -3}, zeros(6)).p_two_sided, 1.0, 1e-12);
}

TEST(Wilcoxon, MatchesSignEnumeration) {
  SeededRng rng(31);
  for (std::size_t n = 1; n <= 12; ++n) {
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> a;
      // Small integers give plenty of ties and zeros.
      for (std::size_t i = 0; i < n; ++i) a.push_back(static_cast<double>(rng.uniform_index(9)) - 4.0);
      if (std::all_of(a.begin(), a.end(), [](double v) { return v == 0.0; })) a[0] = 1.0;
      const auto r = wilcoxon_signed_rank(a, zeros(n), WilcoxonMode::exact);
      ASSERT_NEAR(r.p_two_sided, enumerate_wilcoxon_p(a), 1e-12) << "n=" << n << " trial=" << trial;
    }
  }
}

TEST(Wilcoxon, DegenerateInputs) {
  EXPECT_THROW(wilcoxon_signed_rank({1, 2}, {1, 2}), DegenerateSampleError);
  EXPECT_THROW(wilcoxon_signed_rank({1, 2}, {1}), ValidationError);
}

TEST(Bonferroni, Thresholds) {
  EXPECT_DOUBLE_EQ(bonferroni_threshold(0.05, 3), 0.05 / 3);
  EXPECT_NEAR(bonferroni_threshold(0.05, 3), 0.017, 5e-4);
  EXPECT_DOUBLE_EQ(bonferroni_threshold(0.05, 1), 0.05);
  EXPECT_DOUBLE_EQ(bonferroni_threshold(0.01, 5), 0.002);
  EXPECT_THROW(bonferroni_threshold(0.05, 0), ValidationError);
}

TEST(VarianceRatio, ReferenceAndScaling) {
  const auto r = variance_ratio(kA, kB);
  EXPECT_NEAR(r.f, 1.8973214285714208, 1e-9);
  EXPECT_NEAR(r.p_two_sided, 0.3540194552669905, 1e-7);
  EXPECT_EQ(r.df_num, 9.0);
  EXPECT_EQ(r.df_den, 9.0);
  const auto same = variance_ratio(kA, kA);
  EXPECT_DOUBLE_EQ(same.f, 1.0);
  EXPECT_NEAR(same.p_two_sided, 1.0, 1e-9);
  std::vector<double> doubled;
  for (double v : kA) doubled.push_back(2 * v);
  EXPECT_NEAR(variance_ratio(doubled, kA).f, 4.0, 1e-9);
}

TEST(ComparePaired, ChoosesTestByNormality) {
  const auto normal = compare_paired("f1", kA, kB, 0.05, 3);
  ASSERT_TRUE(normal.normality.has_value());
  EXPECT_EQ(normal.test, "paired_t");
  EXPECT_NEAR(normal.p_value, 8.93162437373208e-05, 1e-10);
  EXPECT_TRUE(normal.significant);
  EXPECT_DOUBLE_EQ(normal.threshold, 0.05 / 3);

  // Differences equal to the skewed weights sample fail the normality check.
  const auto skewed = compare_paired("f1", kWeights, zeros(kWeights.size()), 0.05, 3);
  EXPECT_EQ(skewed.test, "wilcoxon");
  EXPECT_EQ(paired_comparison_from_json(to_json(skewed), "c"), skewed);

  const auto none = compare_paired("f1", kA, kA, 0.05, 3);
  EXPECT_EQ(none.test, "none");
  EXPECT_FALSE(none.significant);
}
