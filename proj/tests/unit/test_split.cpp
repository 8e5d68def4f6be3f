#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "tbench/error.hpp"
#include "tbench/split.hpp"

using namespace tbench;

namespace {

// Tiny images keep these datasets cheap; splitting only reads labels.
Dataset make_dataset(const std::vector<std::size_t>& class_counts) {
  Dataset ds;
  for (std::size_t c = 0; c < class_counts.size(); ++c)
    ds.class_names.push_back("class" + std::to_string(c));
  Image img = Image::zeros(4, 4, 1);
  for (std::size_t c = 0; c < class_counts.size(); ++c)
    for (std::size_t i = 0; i < class_counts[c]; ++i)
      ds.samples.push_back({img, static_cast<int>(c)});
  return ds;
}

void check_partition(const SplitPlan& plan, std::size_t n) {
  std::set<std::size_t> seen(plan.test_indices.begin(), plan.test_indices.end());
  CHECK(seen.size() == plan.test_indices.size());
  for (std::size_t i : plan.rest_indices) CHECK(seen.insert(i).second);
  CHECK(seen.size() == n);
  CHECK(*seen.rbegin() == n - 1);
}

}  // namespace

TEST_CASE("hold-out size is round-half-up of ratio*N (2527 at 10% -> 253)") {
  Dataset ds = make_dataset({2527});
  RngStream rng(42, "split");
  SplitPlan plan = holdout_split(ds, 0.10, SamplingStrategy::simple_random, rng);
  CHECK(plan.test_indices.size() == 253);
  CHECK(plan.rest_indices.size() == 2274);
  check_partition(plan, 2527);
}

TEST_CASE("stratified 50/50 with ratio 0.2 takes exactly 10 per class") {
  Dataset ds = make_dataset({50, 50});
  RngStream rng(1, "strat");
  SplitPlan plan = holdout_split(ds, 0.2, SamplingStrategy::stratified_random, rng);
  CHECK(plan.test_indices.size() == 20);
  std::size_t class0 = 0;
  for (std::size_t i : plan.test_indices)
    if (ds.samples[i].label == 0) ++class0;
  CHECK(class0 == 10);
}

TEST_CASE("same (dataset, ratio, strategy, seed) twice gives identical plans") {
  Dataset ds = make_dataset({30, 20, 13});
  RngStream a(9, "same"), b(9, "same");
  SplitPlan p1 = holdout_split(ds, 0.25, SamplingStrategy::stratified_random, a);
  SplitPlan p2 = holdout_split(ds, 0.25, SamplingStrategy::stratified_random, b);
  CHECK(p1.test_indices == p2.test_indices);
  CHECK(p1.rest_indices == p2.rest_indices);

  RngStream c(9, "other");
  SplitPlan p3 = holdout_split(ds, 0.25, SamplingStrategy::stratified_random, c);
  CHECK(p1.test_indices != p3.test_indices);
}

TEST_CASE("degenerate ratios and emptied classes are errors") {
  Dataset ds = make_dataset({4});
  RngStream rng(1, "bad");
  CHECK_THROWS_AS(holdout_split(ds, 0.01, SamplingStrategy::simple_random, rng),
                  ConfigError);
  Dataset tiny = make_dataset({10, 1});
  CHECK_THROWS_AS(
      holdout_split(tiny, 0.5, SamplingStrategy::stratified_random, rng),
      ConfigError);  // the 1-sample class would be emptied
}

TEST_CASE("disjointness, coverage, and stratified deviation over 1000 random configs") {
  RngStream meta(123, "property");
  for (int trial = 0; trial < 1000; ++trial) {
    int k_classes = 2 + static_cast<int>(meta.uniform_int(4));
    std::vector<std::size_t> counts;
    std::size_t n = 0;
    for (int c = 0; c < k_classes; ++c) {
      std::size_t cnt = 8 + meta.uniform_int(40);
      counts.push_back(cnt);
      n += cnt;
    }
    Dataset ds = make_dataset(counts);
    double ratio = 0.1 + 0.5 * meta.uniform();
    bool strat = meta.uniform() < 0.5;
    RngStream rng(meta.next_u64(), "trial:" + std::to_string(trial));
    SplitPlan plan = holdout_split(
        ds, ratio,
        strat ? SamplingStrategy::stratified_random : SamplingStrategy::simple_random,
        rng);
    check_partition(plan, n);
    CHECK(plan.test_indices.size() ==
          static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n) + 0.5)));
    if (strat) {
      std::vector<std::size_t> per_class(counts.size(), 0);
      for (std::size_t i : plan.test_indices)
        per_class[static_cast<std::size_t>(ds.samples[i].label)]++;
      for (std::size_t c = 0; c < counts.size(); ++c) {
        double expected = ratio * static_cast<double>(counts[c]);
        CHECK(std::abs(static_cast<double>(per_class[c]) - expected) < 1.0);
      }
    }
  }
}

TEST_CASE("k-fold with 90 samples and k=10 gives ten folds of nine") {
  Dataset ds = make_dataset({90});
  RngStream rng(3, "kf");
  auto rest = full_view(ds).indices;
  FoldAssignment a = kfold_partition(ds, rest, 10, SamplingStrategy::simple_random, rng);
  std::vector<int> sizes(10, 0);
  for (int f : a.fold_of) sizes[static_cast<std::size_t>(f)]++;
  for (int s : sizes) CHECK(s == 9);
}

TEST_CASE("table-one arithmetic: 10% hold-out + 10-fold = 81/9/10") {
  Dataset ds = make_dataset({1000});
  RngStream rng(4, "t1");
  SplitPlan plan = holdout_split(ds, 0.10, SamplingStrategy::simple_random, rng);
  CHECK(plan.test_indices.size() == 100);
  RngStream rng2(4, "t1/folds");
  FoldAssignment folds =
      kfold_partition(ds, plan.rest_indices, 10, SamplingStrategy::simple_random, rng2);
  FoldView v = fold_view(folds, 0);
  CHECK(v.val_indices.size() == 90);     // 9%
  CHECK(v.train_indices.size() == 810);  // 81%
}

TEST_CASE("stratified k-fold: 5 classes x 50, k=10 -> exactly 5 per class per fold") {
  Dataset ds = make_dataset({50, 50, 50, 50, 50});
  RngStream rng(5, "strat-kf");
  auto rest = full_view(ds).indices;
  FoldAssignment a =
      kfold_partition(ds, rest, 10, SamplingStrategy::stratified_random, rng);
  for (int f = 0; f < 10; ++f) {
    std::vector<int> per_class(5, 0);
    for (std::size_t pos = 0; pos < a.domain.size(); ++pos)
      if (a.fold_of[pos] == f)
        per_class[static_cast<std::size_t>(ds.samples[a.domain[pos]].label)]++;
    for (int c : per_class) CHECK(c == 5);
  }
  CHECK(a.warnings.empty());
}

TEST_CASE("stratified class smaller than k falls back with a warning") {
  Dataset ds = make_dataset({20, 3});
  RngStream rng(6, "warn");
  auto rest = full_view(ds).indices;
  FoldAssignment a =
      kfold_partition(ds, rest, 5, SamplingStrategy::stratified_random, rng);
  REQUIRE(a.warnings.size() == 1);
  CHECK(a.warnings[0].find("class1") != std::string::npos);
  // per-class fold counts still differ by at most 1
  std::vector<int> counts(5, 0);
  for (std::size_t pos = 0; pos < a.domain.size(); ++pos)
    if (ds.samples[a.domain[pos]].label == 1) counts[static_cast<std::size_t>(a.fold_of[pos])]++;
  int lo = *std::min_element(counts.begin(), counts.end());
  int hi = *std::max_element(counts.begin(), counts.end());
  CHECK(hi - lo <= 1);
}

TEST_CASE("fold_view covers every index exactly once across folds") {
  Dataset ds = make_dataset({37, 23});
  RngStream rng(7, "cover");
  auto rest = full_view(ds).indices;
  FoldAssignment a = kfold_partition(ds, rest, 7, SamplingStrategy::simple_random, rng);
  std::set<std::size_t> seen;
  for (int f = 0; f < 7; ++f) {
    FoldView v = fold_view(a, f);
    CHECK(std::is_sorted(v.val_indices.begin(), v.val_indices.end()));
    CHECK(std::is_sorted(v.train_indices.begin(), v.train_indices.end()));
    CHECK(v.val_indices.size() + v.train_indices.size() == 60);
    for (std::size_t i : v.val_indices) CHECK(seen.insert(i).second);
  }
  CHECK(seen.size() == 60);
  CHECK_THROWS_AS(fold_view(a, 7), ConfigError);
  CHECK_THROWS_AS(fold_view(a, -1), ConfigError);
}

TEST_CASE("k out of range is rejected") {
  Dataset ds = make_dataset({5});
  RngStream rng(8, "k");
  auto rest = full_view(ds).indices;
  CHECK_THROWS_AS(kfold_partition(ds, rest, 1, SamplingStrategy::simple_random, rng),
                  ConfigError);
  CHECK_THROWS_AS(kfold_partition(ds, rest, 6, SamplingStrategy::simple_random, rng),
                  ConfigError);
}

TEST_CASE("plans and fold assignments replay bit-exactly through JSON") {
  Dataset ds = make_dataset({12, 9});
  RngStream rng(11, "json");
  SplitPlan plan = holdout_split(ds, 0.3, SamplingStrategy::stratified_random, rng);
  SplitPlan plan2 = SplitPlan::from_json(plan.to_json());
  CHECK(plan2.test_indices == plan.test_indices);
  CHECK(plan2.rest_indices == plan.rest_indices);
  CHECK(plan2.seed.stream_key == plan.seed.stream_key);

  RngStream rng2(11, "json/folds");
  FoldAssignment a =
      kfold_partition(ds, plan.rest_indices, 3, SamplingStrategy::simple_random, rng2);
  FoldAssignment a2 = FoldAssignment::from_json(a.to_json());
  CHECK(a2.fold_of == a.fold_of);
  CHECK(a2.domain == a.domain);
}
