#include "tbench/stats/descriptive.hpp"

#include <cmath>

#include "tbench/error.hpp"

namespace tbench::stats {

double mean(std::span<const double> values) {
  if (values.empty()) throw UndefinedStatisticError("mean of empty sample");
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

double sample_std(std::span<const double> values) {
  if (values.size() < 2)
    throw UndefinedStatisticError(
        "sample standard deviation undefined for n < 2 (n-1 divisor)");
  // exact zero for constant samples, not accumulated roundoff
  bool constant = true;
  for (double v : values) {
    if (v != values.front()) { constant = false; break; }
  }
  if (constant) return 0.0;
  double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

double sem(std::span<const double> values) {
  return sample_std(values) / std::sqrt(static_cast<double>(values.size()));
}

std::vector<SemCurvePoint> sem_curve(std::span<const double> values) {
  if (values.size() < 2)
    throw UndefinedStatisticError("sem_curve needs at least 2 values");
  std::vector<SemCurvePoint> curve;
  curve.reserve(values.size() - 1);
  for (std::size_t m = 2; m <= values.size(); ++m)
    curve.push_back({static_cast<int>(m), sem(values.subspan(0, m))});
  return curve;
}

}  // namespace tbench::stats
