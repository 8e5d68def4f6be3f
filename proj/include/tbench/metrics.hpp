#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tbench/dataset.hpp"
#include "tbench/model.hpp"

namespace tbench {

/// C x C counts: rows = true class, columns = predicted class.
class ConfusionMatrix {
public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(int num_classes);

  void add(int true_label, int predicted);
  void merge(const ConfusionMatrix& other);

  int num_classes() const { return c_; }
  std::int64_t at(int t, int p) const;
  std::int64_t total() const;
  std::int64_t trace() const;
  std::int64_t row_sum(int t) const;
  double accuracy() const;  // trace/total

  /// 1 - M_ii / row_sum(i); nullopt when the class never appears (reported
  /// as undefined, never as 0).
  std::optional<double> per_class_error(int i) const;

  std::string to_json() const;
  static ConfusionMatrix from_json(const std::string& json_text);
  /// Aligned text table with row sums, suitable for reports.
  std::string render_text(const std::vector<std::string>& class_names) const;

private:
  int c_ = 0;
  std::vector<std::int64_t> counts_;
};

struct EvalResult {
  double accuracy = 0.0;
  std::vector<std::optional<double>> per_class_error;
  ConfusionMatrix confusion;
};

/// Argmax prediction (lowest class index wins ties) over the view; never
/// augmented.
EvalResult evaluate(const ModelParams& params, const DatasetView& view);

}  // namespace tbench
