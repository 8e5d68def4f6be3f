#include "tbench/metrics.hpp"

#include <algorithm>
#include <cstdio>

#include <json.hpp>

#include "tbench/error.hpp"

namespace tbench {

ConfusionMatrix::ConfusionMatrix(int num_classes) : c_(num_classes) {
  if (num_classes < 1) throw ShapeError("confusion matrix: need >= 1 class");
  counts_.assign(static_cast<std::size_t>(c_) * c_, 0);
}

void ConfusionMatrix::add(int true_label, int predicted) {
  if (true_label < 0 || true_label >= c_ || predicted < 0 || predicted >= c_)
    throw ShapeError("confusion matrix: label out of range");
  counts_[static_cast<std::size_t>(true_label) * c_ + predicted]++;
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
  if (other.c_ != c_) throw ShapeError("confusion matrix: size mismatch in merge");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
}

std::int64_t ConfusionMatrix::at(int t, int p) const {
  return counts_[static_cast<std::size_t>(t) * c_ + p];
}

std::int64_t ConfusionMatrix::total() const {
  std::int64_t s = 0;
  for (std::int64_t v : counts_) s += v;
  return s;
}

std::int64_t ConfusionMatrix::trace() const {
  std::int64_t s = 0;
  for (int i = 0; i < c_; ++i) s += at(i, i);
  return s;
}

std::int64_t ConfusionMatrix::row_sum(int t) const {
  std::int64_t s = 0;
  for (int p = 0; p < c_; ++p) s += at(t, p);
  return s;
}

double ConfusionMatrix::accuracy() const {
  std::int64_t tot = total();
  if (tot == 0) throw DegenerateSampleError("confusion matrix: empty");
  return static_cast<double>(trace()) / static_cast<double>(tot);
}

std::optional<double> ConfusionMatrix::per_class_error(int i) const {
  std::int64_t rs = row_sum(i);
  if (rs == 0) return std::nullopt;
  return 1.0 - static_cast<double>(at(i, i)) / static_cast<double>(rs);
}

std::string ConfusionMatrix::to_json() const {
  nlohmann::json j;
  j["num_classes"] = c_;
  nlohmann::json rows = nlohmann::json::array();
  for (int t = 0; t < c_; ++t) {
    nlohmann::json row = nlohmann::json::array();
    for (int p = 0; p < c_; ++p) row.push_back(at(t, p));
    rows.push_back(row);
  }
  j["counts"] = rows;  // rows = true class, cols = predicted
  return j.dump();
}

ConfusionMatrix ConfusionMatrix::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  ConfusionMatrix m(j.at("num_classes").get<int>());
  const auto& rows = j.at("counts");
  for (int t = 0; t < m.c_; ++t)
    for (int p = 0; p < m.c_; ++p)
      m.counts_[static_cast<std::size_t>(t) * m.c_ + p] =
          rows.at(static_cast<std::size_t>(t)).at(static_cast<std::size_t>(p)).get<std::int64_t>();
  return m;
}

std::string ConfusionMatrix::render_text(const std::vector<std::string>& names) const {
  if (static_cast<int>(names.size()) != c_)
    throw ShapeError("confusion matrix: class name count mismatch");
  std::size_t name_w = 9;
  for (const auto& n : names) name_w = std::max(name_w, n.size());

  std::string out;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%*s", static_cast<int>(name_w), "true\\pred");
  out += buf;
  for (const auto& n : names) {
    std::snprintf(buf, sizeof(buf), " %9s", n.c_str());
    out += buf;
  }
  out += "       sum\n";
  for (int t = 0; t < c_; ++t) {
    std::snprintf(buf, sizeof(buf), "%*s", static_cast<int>(name_w), names[static_cast<std::size_t>(t)].c_str());
    out += buf;
    for (int p = 0; p < c_; ++p) {
      std::snprintf(buf, sizeof(buf), " %9lld", static_cast<long long>(at(t, p)));
      out += buf;
    }
    std::snprintf(buf, sizeof(buf), " %9lld\n", static_cast<long long>(row_sum(t)));
    out += buf;
  }
  return out;
}

EvalResult evaluate(const ModelParams& params, const DatasetView& view) {
  if (view.size() == 0) throw ShapeError("evaluate: empty view");
  const int cls = params.arch.num_classes;

  EvalResult r;
  r.confusion = ConfusionMatrix(cls);

  constexpr std::size_t kEvalBatch = 32;
  for (std::size_t start = 0; start < view.size(); start += kEvalBatch) {
    std::size_t end = std::min(view.size(), start + kEvalBatch);
    Batch batch;
    for (std::size_t i = start; i < end; ++i) {
      batch.images.push_back(&view.sample(i).image);
      batch.labels.push_back(view.sample(i).label);
    }
    std::vector<double> logits = forward(params, batch);
    for (std::size_t s = 0; s < batch.size(); ++s) {
      const double* row = logits.data() + s * static_cast<std::size_t>(cls);
      int best = 0;
      for (int j = 1; j < cls; ++j)
        if (row[j] > row[best]) best = j;  // lowest index wins ties
      r.confusion.add(batch.labels[s], best);
    }
  }

  r.accuracy = r.confusion.accuracy();
  for (int i = 0; i < cls; ++i)
    r.per_class_error.push_back(r.confusion.per_class_error(i));
  return r;
}

}  // namespace tbench
