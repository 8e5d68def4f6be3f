#pragma once

#include <span>
#include <string>
#include <vector>

namespace tbench::stats {

/// One labeled accuracy sample set, e.g. the repeated-experiment accuracies
/// of a single split ratio.
struct SampleGroup {
  std::string label;
  std::vector<double> values;
};

struct SemCurvePoint {
  int n = 0;      // prefix length, >= 2
  double sem = 0;  // estimated standard error of the mean at that n
};

double mean(std::span<const double> values);

/// Sample standard deviation with the n-1 divisor. Throws
/// UndefinedStatisticError for n < 2 (the statistic does not exist at n=1).
double sample_std(std::span<const double> values);

/// Estimated standard error of the mean, s/sqrt(n). Same n >= 2 requirement.
double sem(std::span<const double> values);

/// SEM over every prefix of the input in collection order: one point per
/// m = 2..n. Visualizes how the error of the mean shrinks as experiments
/// are repeated.
std::vector<SemCurvePoint> sem_curve(std::span<const double> values);

}  // namespace tbench::stats
