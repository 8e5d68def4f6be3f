#pragma once

#include <functional>
#include <string>
#include <vector>

#include "tbench/augment.hpp"
#include "tbench/dataset.hpp"
#include "tbench/metrics.hpp"
#include "tbench/model.hpp"
#include "tbench/split.hpp"
#include "tbench/train.hpp"

namespace tbench {

struct SweepValue {
  std::string label;
  std::function<void(TrainConfig&)> apply;
};

struct SweepSetting {
  std::string value_label;
  std::vector<double> fold_accuracies;   // NaN where the fold failed
  std::vector<std::string> fold_errors;  // empty string where the fold succeeded
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
  bool disqualified = false;  // every fold failed
};

struct SweepResult {
  std::string param_name;
  std::vector<SweepSetting> settings;
  int winner_index = -1;    // argmax mean; ties keep the earlier declared value
  int baseline_index = -1;  // the pre-sweep config's value, when it is in the grid

  /// winner mean - baseline mean: the accuracy gained by tuning this
  /// parameter (the bar height of the tuning-gain chart).
  double tuning_gain() const;

  std::string to_csv(const std::string& header_comment) const;
};

/// Trains every (value, fold) combination from the same initial params with
/// only the swept parameter changed, and reports mean +/- std of the k-fold
/// validation accuracies. A fold failure is recorded and excluded from the
/// mean; a value is disqualified only if all its folds fail.
SweepResult sweep_parameter(const std::string& name,
                            const std::vector<SweepValue>& values,
                            const TrainConfig& base_config,
                            const ModelParams& init_params,
                            const Dataset& dataset, const FoldAssignment& folds,
                            int parallelism);

struct FreezeState {
  std::string label;  // trainable layers, e.g. "head,dense1"
  FreezeMask mask;
};

/// All-frozen first, then cumulative unfreezing from the head down to conv1.
std::vector<FreezeState> default_unfreeze_sequence();

struct FreezeCurvePoint {
  std::string label;
  FreezeMask mask;
  std::vector<double> fold_accuracies;
  double mean_accuracy = 0.0;
};

struct FreezeSweepResult {
  std::vector<FreezeCurvePoint> curve;  // one point per boundary state
  int best_index = -1;

  std::string to_csv(const std::string& header_comment) const;
};

/// Evaluates each cumulative unfreeze state with k-fold CV, starting every
/// run from the same (pretrained) params.
FreezeSweepResult freezing_sweep(const ModelParams& pretrained,
                                 const std::vector<FreezeState>& boundaries,
                                 const TrainConfig& config, const Dataset& dataset,
                                 const FoldAssignment& folds, int parallelism);

struct AugmentCandidate {
  std::string family;  // none | flip | rotation | shear | zoom | brightness
  std::string label;   // e.g. "rotation(180)"
  AugmentSpec spec;
};

/// The magnitude grid evaluated per family (plus the mandatory benchmark).
std::vector<AugmentCandidate> default_augment_candidates();

struct AugmentEvaluation {
  std::string family;
  std::string label;
  std::vector<double> fold_accuracies;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
  ConfusionMatrix val_confusion;  // fold-aggregated validation confusion
};

struct AugmentSelectResult {
  std::vector<AugmentEvaluation> evaluations;  // declared order, benchmark first
  double benchmark_mean = 0.0;
  std::vector<std::string> family_best_labels;  // winning magnitude per family
  std::vector<std::string> chosen_families;     // families beating the benchmark
  AugmentSpec chosen_spec;                      // union of the winning families

  std::string to_csv(const std::string& header_comment) const;
};

/// Per-family magnitude search on k-fold validation accuracy; the final spec
/// is the union of the families whose best magnitude strictly beats the
/// no-augmentation benchmark. Candidates must include the empty spec.
AugmentSelectResult augmentation_select(const std::vector<AugmentCandidate>& candidates,
                                        const TrainConfig& config,
                                        const ModelParams& init_params,
                                        const Dataset& dataset,
                                        const FoldAssignment& folds,
                                        int parallelism);

}  // namespace tbench
