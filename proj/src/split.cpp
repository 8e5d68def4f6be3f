#include "tbench/split.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "tbench/error.hpp"

namespace tbench {

namespace {

using nlohmann::json;

json seed_to_json(const SeedProvenance& s) {
  return json{{"master_seed", s.master_seed}, {"stream_key", s.stream_key}};
}

SeedProvenance seed_from_json(const json& j) {
  SeedProvenance s;
  s.master_seed = j.at("master_seed").get<std::uint64_t>();
  s.stream_key = j.at("stream_key").get<std::string>();
  return s;
}

std::size_t round_half_up(double x) {
  return static_cast<std::size_t>(std::floor(x + 0.5));
}

}  // namespace

const char* to_string(SamplingStrategy s) {
  return s == SamplingStrategy::simple_random ? "simple_random"
                                              : "stratified_random";
}

SamplingStrategy sampling_strategy_from_string(const std::string& s) {
  if (s == "simple_random") return SamplingStrategy::simple_random;
  if (s == "stratified_random") return SamplingStrategy::stratified_random;
  throw ConfigError("unknown sampling strategy: " + s);
}

std::string SplitPlan::to_json() const {
  json j;
  j["test_ratio"] = test_ratio;
  j["strategy"] = tbench::to_string(strategy);
  j["seed"] = seed_to_json(seed);
  j["test_indices"] = test_indices;
  j["rest_indices"] = rest_indices;
  return j.dump();
}

SplitPlan SplitPlan::from_json(const std::string& text) {
  json j = json::parse(text);
  SplitPlan p;
  p.test_ratio = j.at("test_ratio").get<double>();
  p.strategy = sampling_strategy_from_string(j.at("strategy").get<std::string>());
  p.seed = seed_from_json(j.at("seed"));
  p.test_indices = j.at("test_indices").get<std::vector<std::size_t>>();
  p.rest_indices = j.at("rest_indices").get<std::vector<std::size_t>>();
  return p;
}

std::string FoldAssignment::to_json() const {
  json j;
  j["k"] = k;
  j["strategy"] = tbench::to_string(strategy);
  j["seed"] = seed_to_json(seed);
  j["domain"] = domain;
  j["fold_of"] = fold_of;
  j["warnings"] = warnings;
  return j.dump();
}

FoldAssignment FoldAssignment::from_json(const std::string& text) {
  json j = json::parse(text);
  FoldAssignment a;
  a.k = j.at("k").get<int>();
  a.strategy = sampling_strategy_from_string(j.at("strategy").get<std::string>());
  a.seed = seed_from_json(j.at("seed"));
  a.domain = j.at("domain").get<std::vector<std::size_t>>();
  a.fold_of = j.at("fold_of").get<std::vector<int>>();
  a.warnings = j.at("warnings").get<std::vector<std::string>>();
  return a;
}

SplitPlan holdout_split_subset(const Dataset& dataset,
                               const std::vector<std::size_t>& subset,
                               double ratio, SamplingStrategy strategy,
                               RngStream& rng) {
  std::size_t n = subset.size();
  if (!(ratio > 0.0 && ratio < 1.0))
    throw ConfigError("holdout_split: ratio must be in (0,1)");
  if (n < 2) throw ConfigError("holdout_split: need at least 2 samples");

  std::vector<std::size_t> domain = subset;
  std::sort(domain.begin(), domain.end());

  std::size_t test_total = round_half_up(ratio * static_cast<double>(n));
  if (test_total == 0 || test_total >= n)
    throw ConfigError("holdout_split: ratio leaves an empty side");

  std::vector<std::size_t> test;
  if (strategy == SamplingStrategy::simple_random) {
    std::vector<std::size_t> order = domain;
    shuffle(order, rng);
    test.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(test_total));
  } else {
    int c = dataset.num_classes();
    std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(c));
    for (std::size_t i : domain)
      by_class[static_cast<std::size_t>(dataset.samples[i].label)].push_back(i);
    for (int label = 0; label < c; ++label) {
      if (by_class[static_cast<std::size_t>(label)].empty())
        throw ConfigError("holdout_split: class '" +
                          dataset.class_names[static_cast<std::size_t>(label)] +
                          "' has no samples");
    }

    // Largest-remainder apportionment of the global test_total.
    std::vector<std::size_t> take(static_cast<std::size_t>(c));
    std::vector<std::pair<double, int>> remainders;
    std::size_t assigned = 0;
    for (int label = 0; label < c; ++label) {
      double quota = ratio * static_cast<double>(by_class[static_cast<std::size_t>(label)].size());
      take[static_cast<std::size_t>(label)] = static_cast<std::size_t>(std::floor(quota));
      assigned += take[static_cast<std::size_t>(label)];
      remainders.emplace_back(quota - std::floor(quota), label);
    }
    std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    for (std::size_t i = 0; assigned < test_total; ++i, ++assigned)
      take[static_cast<std::size_t>(remainders[i % remainders.size()].second)]++;

    for (int label = 0; label < c; ++label) {
      auto& members = by_class[static_cast<std::size_t>(label)];
      std::size_t t = take[static_cast<std::size_t>(label)];
      if (t >= members.size())
        throw ConfigError("holdout_split: stratified split empties class '" +
                          dataset.class_names[static_cast<std::size_t>(label)] + "'");
      shuffle(members, rng);
      test.insert(test.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(t));
    }
  }

  std::sort(test.begin(), test.end());
  SplitPlan plan;
  plan.test_ratio = ratio;
  plan.strategy = strategy;
  plan.seed = {rng.master_seed(), rng.stream_key()};
  plan.test_indices = test;
  plan.rest_indices.reserve(n - test.size());
  std::size_t ti = 0;
  for (std::size_t i : domain) {
    if (ti < test.size() && test[ti] == i) { ++ti; continue; }
    plan.rest_indices.push_back(i);
  }
  return plan;
}

SplitPlan holdout_split(const Dataset& dataset, double ratio,
                        SamplingStrategy strategy, RngStream& rng) {
  std::vector<std::size_t> all(dataset.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return holdout_split_subset(dataset, all, ratio, strategy, rng);
}

FoldAssignment kfold_partition(const Dataset& dataset,
                               const std::vector<std::size_t>& rest_indices,
                               int k, SamplingStrategy strategy,
                               RngStream& rng) {
  std::size_t n = rest_indices.size();
  if (k < 2) throw ConfigError("kfold_partition: k must be >= 2");
  if (static_cast<std::size_t>(k) > n)
    throw ConfigError("kfold_partition: k exceeds the number of samples");

  FoldAssignment a;
  a.k = k;
  a.strategy = strategy;
  a.seed = {rng.master_seed(), rng.stream_key()};
  a.domain = rest_indices;
  std::sort(a.domain.begin(), a.domain.end());
  a.fold_of.assign(n, -1);

  // Rotating round-robin offset keeps overall fold sizes balanced even when
  // many small classes are assigned one after another.
  std::size_t offset = 0;
  auto assign_round_robin = [&](std::vector<std::size_t>& positions) {
    shuffle(positions, rng);
    for (std::size_t j = 0; j < positions.size(); ++j)
      a.fold_of[positions[j]] = static_cast<int>((offset + j) % static_cast<std::size_t>(k));
    offset = (offset + positions.size()) % static_cast<std::size_t>(k);
  };

  if (strategy == SamplingStrategy::simple_random) {
    std::vector<std::size_t> positions(n);
    std::iota(positions.begin(), positions.end(), std::size_t{0});
    assign_round_robin(positions);
  } else {
    int c = dataset.num_classes();
    std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(c));
    for (std::size_t pos = 0; pos < n; ++pos) {
      int label = dataset.samples[a.domain[pos]].label;
      by_class[static_cast<std::size_t>(label)].push_back(pos);
    }
    for (int label = 0; label < c; ++label) {
      auto& positions = by_class[static_cast<std::size_t>(label)];
      if (positions.empty()) continue;
      if (positions.size() < static_cast<std::size_t>(k)) {
        a.warnings.push_back("class '" +
                             dataset.class_names[static_cast<std::size_t>(label)] +
                             "' has " + std::to_string(positions.size()) +
                             " < k=" + std::to_string(k) +
                             " samples; simple assignment used for it");
      }
      assign_round_robin(positions);
    }
  }
  return a;
}

FoldView fold_view(const FoldAssignment& assignment, int i) {
  if (i < 0 || i >= assignment.k)
    throw ConfigError("fold_view: fold index " + std::to_string(i) +
                      " out of range [0," + std::to_string(assignment.k) + ")");
  FoldView v;
  for (std::size_t pos = 0; pos < assignment.domain.size(); ++pos) {
    if (assignment.fold_of[pos] == i)
      v.val_indices.push_back(assignment.domain[pos]);
    else
      v.train_indices.push_back(assignment.domain[pos]);
  }
  // domain is sorted, so both lists are already ascending
  return v;
}

}  // namespace tbench
