#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tbench/dataset.hpp"
#include "tbench/rng.hpp"

namespace tbench {

enum class SamplingStrategy { simple_random, stratified_random };

const char* to_string(SamplingStrategy s);
SamplingStrategy sampling_strategy_from_string(const std::string& s);

struct SeedProvenance {
  std::uint64_t master_seed = 0;
  std::string stream_key;
};

/// A frozen hold-out partition. Index lists are stored sorted ascending so
/// serialized plans are canonical and replays are bit-exact.
struct SplitPlan {
  double test_ratio = 0.0;
  SamplingStrategy strategy = SamplingStrategy::simple_random;
  SeedProvenance seed;
  std::vector<std::size_t> test_indices;
  std::vector<std::size_t> rest_indices;

  std::string to_json() const;
  static SplitPlan from_json(const std::string& json_text);
};

/// K-fold partition over a fixed index domain (usually the hold-out rest).
struct FoldAssignment {
  int k = 0;
  SamplingStrategy strategy = SamplingStrategy::simple_random;
  SeedProvenance seed;
  std::vector<std::size_t> domain;  // dataset indices being partitioned
  std::vector<int> fold_of;         // fold id per domain position, in [0,k)
  std::vector<std::string> warnings;

  std::string to_json() const;
  static FoldAssignment from_json(const std::string& json_text);
};

/// Hold-out split. |test| = round-half-up(ratio*N). Simple: uniform shuffle
/// + prefix cut. Stratified: per-class shuffle with largest-remainder
/// apportionment, so per-class counts deviate from ratio*class_count by < 1
/// while the total still matches exactly.
/// Errors: a side left empty; a class emptied under stratified sampling.
SplitPlan holdout_split(const Dataset& dataset, double ratio,
                        SamplingStrategy strategy, RngStream& rng);

/// Same split drawn over an index subset (e.g. probe experiments inside the
/// frozen hold-out rest). Returned index lists refer to the full dataset.
SplitPlan holdout_split_subset(const Dataset& dataset,
                               const std::vector<std::size_t>& subset,
                               double ratio, SamplingStrategy strategy,
                               RngStream& rng);

/// Shuffled round-robin fold assignment (per class when stratified, which
/// keeps per-class fold counts within 1 of each other). A class with fewer
/// than k samples falls back to simple assignment for that class and leaves
/// a warning record.
FoldAssignment kfold_partition(const Dataset& dataset,
                               const std::vector<std::size_t>& rest_indices,
                               int k, SamplingStrategy strategy,
                               RngStream& rng);

struct FoldView {
  std::vector<std::size_t> train_indices;  // sorted ascending
  std::vector<std::size_t> val_indices;    // sorted ascending
};

/// Validation fold i, training = all other folds.
FoldView fold_view(const FoldAssignment& assignment, int i);

}  // namespace tbench
