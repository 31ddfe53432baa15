#include "issuemask/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "issuemask/common.hpp"

namespace issuemask {
using nlohmann::json;

double mean(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double sample_variance(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return ss / static_cast<double>(xs.size() - 1);
}

double sample_std(const std::vector<double>& xs) { return std::sqrt(sample_variance(xs)); }

namespace {

// Horner form used throughout AS R94: cc[0] + cc[1] x + ... + cc[n-1] x^(n-1).
double poly(const double* cc, int n, double x) {
  double result = cc[0];
  if (n > 1) {
    double p = x * cc[n - 1];
    for (int j = n - 2; j > 0; --j) p = (p + cc[j]) * x;
    result += p;
  }
  return result;
}

double norm_quantile(double p) { return boost::math::quantile(boost::math::normal_distribution<>(), p); }
double norm_sf(double z) { return boost::math::cdf(boost::math::complement(boost::math::normal_distribution<>(), z)); }

std::vector<double> differences(const std::vector<double>& a, const std::vector<double>& b, const char* where) {
  if (a.size() != b.size()) throw ValidationError(where, "samples differ in length");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return d;
}

}  // namespace

ShapiroWilkResult shapiro_wilk(std::vector<double> x) {
  const int n = static_cast<int>(x.size());
  if (n < 3 || n > 50) throw ValidationError("shapiro_wilk", "sample size must be in [3, 50]");
  std::sort(x.begin(), x.end());
  const double range = x.back() - x.front();
  if (range < 1e-19) throw DegenerateSampleError("shapiro_wilk: constant sample");

  static const double g[2] = {-2.273, 0.459};
  static const double c1[6] = {0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056};
  static const double c2[6] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
  static const double c3[4] = {0.544, -0.39978, 0.025054, -6.714e-4};
  static const double c4[4] = {1.3822, -0.77857, 0.062767, -0.0020322};
  static const double c5[4] = {-1.5861, -0.31082, -0.083751, 0.0038915};
  static const double c6[3] = {-0.4803, -0.082676, 0.0030302};

  const double an = n;
  const int nn2 = n / 2;
  std::vector<double> a(nn2 + 1, 0.0);  // 1-based
  if (n == 3) {
    a[1] = std::sqrt(0.5);
  } else {
    const double an25 = an + 0.25;
    std::vector<double> m(nn2 + 1, 0.0);
    double summ2 = 0.0;
    for (int i = 1; i <= nn2; ++i) {
      m[i] = norm_quantile((i - 0.375) / an25);
      summ2 += m[i] * m[i];
    }
    summ2 *= 2.0;
    const double ssumm2 = std::sqrt(summ2);
    const double rsn = 1.0 / std::sqrt(an);
    const double a1 = poly(c1, 6, rsn) - m[1] / ssumm2;
    int i1 = 0;
    double fac = 0.0;
    if (n > 5) {
      i1 = 3;
      const double a2 = -m[2] / ssumm2 + poly(c2, 6, rsn);
      fac = std::sqrt((summ2 - 2.0 * m[1] * m[1] - 2.0 * m[2] * m[2]) / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
      a[2] = a2;
    } else {
      i1 = 2;
      fac = std::sqrt((summ2 - 2.0 * m[1] * m[1]) / (1.0 - 2.0 * a1 * a1));
    }
    a[1] = a1;
    for (int i = i1; i <= nn2; ++i) a[i] = -m[i] / fac;
  }

  auto coef = [&](int i) {
    // Antisymmetric coefficient for the i-th order statistic (0-based).
    const int j = n - 1 - i;
    if (i == j) return 0.0;
    return i < j ? -a[i + 1] : a[j + 1];
  };
  double sa = 0.0;
  double sx = 0.0;
  for (int i = 0; i < n; ++i) {
    sa += coef(i);
    sx += x[i] / range;
  }
  sa /= n;
  sx /= n;
  double ssa = 0.0;
  double ssx = 0.0;
  double sax = 0.0;
  for (int i = 0; i < n; ++i) {
    const double asa = coef(i) - sa;
    const double xsx = x[i] / range - sx;
    ssa += asa * asa;
    ssx += xsx * xsx;
    sax += asa * xsx;
  }
  const double ssassx = std::sqrt(ssa * ssx);
  const double w1 = (ssassx - sax) * (ssassx + sax) / (ssa * ssx);
  ShapiroWilkResult out;
  out.w = 1.0 - w1;

  if (n == 3) {
    const double pi6 = 6.0 / M_PI;
    const double stqr = M_PI / 3.0;
    out.p = std::max(0.0, pi6 * (std::asin(std::sqrt(out.w)) - stqr));
    return out;
  }
  double y = std::log(w1);
  const double xx = std::log(an);
  double mu = 0.0;
  double sigma = 0.0;
  if (n <= 11) {
    const double gamma = poly(g, 2, an);
    if (y >= gamma) {
      out.p = 1e-99;
      return out;
    }
    y = -std::log(gamma - y);
    mu = poly(c3, 4, an);
    sigma = std::exp(poly(c4, 4, an));
  } else {
    mu = poly(c5, 4, xx);
    sigma = std::exp(poly(c6, 3, xx));
  }
  out.p = norm_sf((y - mu) / sigma);
  return out;
}

WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& a, const std::vector<double>& b, WilcoxonMode mode) {
  auto d = differences(a, b, "wilcoxon_signed_rank");
  std::erase(d, 0.0);
  const std::size_t n = d.size();
  if (n == 0) throw DegenerateSampleError("wilcoxon_signed_rank: all differences are zero");
  if (mode == WilcoxonMode::exact && n > 25) {
    throw ValidationError("wilcoxon_signed_rank", "exact mode supports at most 25 non-zero differences");
  }

  // Average ranks of |d|, kept doubled so ties stay integral.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return std::abs(d[i]) < std::abs(d[j]); });
  std::vector<std::uint64_t> rank2(n);
  double tie_term = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && std::abs(d[order[j + 1]]) == std::abs(d[order[i]])) ++j;
    const std::uint64_t doubled = (i + 1) + (j + 1);  // 2 * average of ranks i+1..j+1
    for (std::size_t k = i; k <= j; ++k) rank2[order[k]] = doubled;
    const double t = static_cast<double>(j - i + 1);
    tie_term += t * t * t - t;
    i = j + 1;
  }

  std::uint64_t w_plus2 = 0;
  std::uint64_t total2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    total2 += rank2[i];
    if (d[i] > 0) w_plus2 += rank2[i];
  }
  WilcoxonResult out;
  out.n = n;
  out.mode = mode;
  out.w_plus = static_cast<double>(w_plus2) / 2.0;
  out.statistic = static_cast<double>(std::min(w_plus2, total2 - w_plus2)) / 2.0;

  if (mode == WilcoxonMode::exact) {
    // counts[s] = number of sign assignments with doubled positive-rank sum s.
    std::vector<std::uint64_t> counts(total2 + 1, 0);
    counts[0] = 1;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t s = total2; s + 1 > rank2[i]; --s) counts[s] += counts[s - rank2[i]];
    }
    std::uint64_t lower = 0;
    std::uint64_t upper = 0;
    for (std::size_t s = 0; s <= total2; ++s) {
      if (s <= w_plus2) lower += counts[s];
      if (s >= w_plus2) upper += counts[s];
    }
    const double denom = std::ldexp(1.0, static_cast<int>(n));
    out.p_two_sided = std::min(1.0, 2.0 * static_cast<double>(std::min(lower, upper)) / denom);
    return out;
  }

  const double nn = static_cast<double>(n);
  const double mu = nn * (nn + 1.0) / 4.0;
  const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
  if (var <= 0.0) throw DegenerateSampleError("wilcoxon_signed_rank: zero variance under the null");
  const double dev = std::max(0.0, std::abs(out.w_plus - mu) - 0.5);
  out.p_two_sided = std::min(1.0, 2.0 * norm_sf(dev / std::sqrt(var)));
  return out;
}

WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& a, const std::vector<double>& b) {
  const auto d = differences(a, b, "wilcoxon_signed_rank");
  const auto nonzero = std::count_if(d.begin(), d.end(), [](double v) { return v != 0.0; });
  return wilcoxon_signed_rank(a, b, nonzero <= 25 ? WilcoxonMode::exact : WilcoxonMode::normal_approx);
}

PairedTResult paired_t(const std::vector<double>& a, const std::vector<double>& b) {
  const auto d = differences(a, b, "paired_t");
  if (d.size() < 2) throw ValidationError("paired_t", "need at least two pairs");
  const double sd = sample_std(d);
  if (!(sd > 0.0)) throw DegenerateSampleError("paired_t: differences have zero variance");
  PairedTResult out;
  out.df = static_cast<double>(d.size() - 1);
  out.t = mean(d) / (sd / std::sqrt(static_cast<double>(d.size())));
  boost::math::students_t_distribution<> dist(out.df);
  out.p_two_sided = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(out.t))));
  return out;
}

double bonferroni_threshold(double alpha, int k) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("bonferroni_threshold", "alpha must be in (0, 1)");
  if (k < 1) throw ValidationError("bonferroni_threshold", "k must be at least 1");
  return alpha / k;
}

VarianceRatioResult variance_ratio(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2) throw ValidationError("variance_ratio", "both samples need at least two values");
  const double vb = sample_variance(b);
  if (!(vb > 0.0)) throw DegenerateSampleError("variance_ratio: denominator sample has zero variance");
  VarianceRatioResult out;
  out.f = sample_variance(a) / vb;
  out.df_num = static_cast<double>(a.size() - 1);
  out.df_den = static_cast<double>(b.size() - 1);
  boost::math::fisher_f_distribution<> dist(out.df_num, out.df_den);
  const double lower = boost::math::cdf(dist, out.f);
  const double upper = boost::math::cdf(boost::math::complement(dist, out.f));
  out.p_two_sided = std::min(1.0, 2.0 * std::min(lower, upper));
  return out;
}

PairedComparison compare_paired(const std::string& metric, const std::vector<double>& a, const std::vector<double>& b,
                                double alpha, int hypotheses) {
  const auto d = differences(a, b, "compare_paired");
  PairedComparison out;
  out.metric = metric;
  out.n = d.size();
  out.threshold = bonferroni_threshold(alpha, hypotheses);
  if (std::all_of(d.begin(), d.end(), [](double v) { return v == 0.0; })) {
    out.test = "none";
    out.note = "all paired differences are zero";
    return out;
  }
  try {
    out.normality = shapiro_wilk(d);
  } catch (const Error& e) {
    out.normality_note = e.what();
  }
  if (out.normality && out.normality->p > alpha) {
    const auto t = paired_t(a, b);
    out.test = "paired_t";
    out.statistic = t.t;
    out.p_value = t.p_two_sided;
  } else {
    const auto w = wilcoxon_signed_rank(a, b);
    out.test = "wilcoxon";
    out.statistic = w.statistic;
    out.p_value = w.p_two_sided;
  }
  out.significant = out.p_value < out.threshold;
  return out;
}

json to_json(const PairedComparison& c) {
  json j{{"metric", c.metric},
         {"n", c.n},
         {"normality", nullptr},
         {"normality_note", c.normality_note},
         {"test", c.test},
         {"statistic", c.statistic},
         {"p_value", c.p_value},
         {"threshold", c.threshold},
         {"significant", c.significant},
         {"note", c.note}};
  if (c.normality) j["normality"] = {{"w", c.normality->w}, {"p", c.normality->p}};
  return j;
}

PairedComparison paired_comparison_from_json(const json& j, const std::string& where) {
  PairedComparison c;
  try {
    c.metric = j.at("metric").get<std::string>();
    c.n = j.at("n").get<std::size_t>();
    if (!j.at("normality").is_null()) {
      c.normality = ShapiroWilkResult{j["normality"].at("w").get<double>(), j["normality"].at("p").get<double>()};
    }
    c.normality_note = j.at("normality_note").get<std::string>();
    c.test = j.at("test").get<std::string>();
    c.statistic = j.at("statistic").get<double>();
    c.p_value = j.at("p_value").get<double>();
    c.threshold = j.at("threshold").get<double>();
    c.significant = j.at("significant").get<bool>();
    c.note = j.at("note").get<std::string>();
  } catch (const json::exception& e) {
    throw ValidationError(where, e.what());
  }
  return c;
}

}  // namespace issuemask
