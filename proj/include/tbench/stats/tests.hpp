#pragma once

#include <span>
#include <string>
#include <vector>

#include "tbench/stats/descriptive.hpp"

namespace tbench::stats {

inline constexpr double kDefaultAlpha = 0.05;  // confidence level 0.95

/// Outcome of any hypothesis test. reject_null is evaluated at the alpha
/// the test was run with, so reject_null <=> p_value < alpha always holds.
struct TestResult {
  std::string test_name;
  double statistic = 0.0;
  double p_value = 1.0;
  double alpha = kDefaultAlpha;
  bool reject_null = false;

  std::string to_json() const;
  static TestResult from_json(const std::string& json_text);
};

TestResult make_result(std::string name, double statistic, double p_value,
                       double alpha);

/// Shapiro-Wilk normality test, Royston's AS R94 approximation
/// (3 <= n <= 5000). reject_null means "not normal".
TestResult shapiro_wilk(const SampleGroup& group, double alpha = kDefaultAlpha);

/// Mean-centered (classic) Levene test for homogeneity of variances.
/// reject_null means heteroscedastic.
TestResult levene(std::span<const SampleGroup> groups,
                  double alpha = kDefaultAlpha);

/// One-way fixed-effects ANOVA; p from F(k-1, N-k).
TestResult anova_oneway(std::span<const SampleGroup> groups,
                        double alpha = kDefaultAlpha);

/// Welch's heteroscedasticity-robust one-way ANOVA; fallback omnibus when
/// Levene rejects.
TestResult welch_anova(std::span<const SampleGroup> groups,
                       double alpha = kDefaultAlpha);

/// One-tailed two-sample t test of mean(a) > mean(b). Pooled variance by
/// default (the pipeline reaches it only after Levene accepts); set
/// pooled=false for the Welch variant.
TestResult t_test_one_tailed(const SampleGroup& a, const SampleGroup& b,
                             double alpha = kDefaultAlpha, bool pooled = true);

/// One-tailed Mann-Whitney U ("a stochastically greater than b"), normal
/// approximation with tie and continuity corrections. The statistic is U of
/// the first sample.
TestResult mann_whitney_one_tailed(const SampleGroup& a, const SampleGroup& b,
                                   double alpha = kDefaultAlpha);

/// Kruskal-Wallis H with tie correction; p from chi2(k-1).
TestResult kruskal_wallis(std::span<const SampleGroup> groups,
                          double alpha = kDefaultAlpha);

}  // namespace tbench::stats
