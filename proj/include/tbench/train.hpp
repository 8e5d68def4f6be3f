#pragma once

#include <functional>
#include <string>
#include <vector>

#include "tbench/augment.hpp"
#include "tbench/dataset.hpp"
#include "tbench/metrics.hpp"
#include "tbench/model.hpp"
#include "tbench/optimizer.hpp"
#include "tbench/schedule.hpp"

namespace tbench {

/// Full experiment configuration for one training run.
struct TrainConfig {
  int batch_size = 16;
  double learning_rate = 2e-5;
  OptimizerSpec optimizer;
  ScheduleSpec schedule;
  HeadKind head = HeadKind::softmax_cross_entropy;
  FreezeMask freeze;  // all trainable by default
  int patience_epochs = 100;
  int max_epochs = 1000;
  AugmentSpec augment;  // disabled by default; applied to train batches only

  // Seed provenance: every stream the run consumes derives from this pair.
  std::uint64_t master_seed = 42;
  std::string stream_key = "train";

  void validate() const;
  std::string to_json() const;
  static TrainConfig from_json(const std::string& json_text);
};

std::string optimizer_spec_to_json(const OptimizerSpec& spec);
OptimizerSpec optimizer_spec_from_json(const std::string& json_text);
std::string schedule_spec_to_json(const ScheduleSpec& spec);
ScheduleSpec schedule_spec_from_json(const std::string& json_text);
std::string freeze_mask_to_json(const FreezeMask& mask);
FreezeMask freeze_mask_from_json(const std::string& json_text);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;    // mean over the epoch's batches
  double val_accuracy = 0.0;  // in [0,1]
  double lr = 0.0;            // lr at the epoch's first optimizer step
};

struct TrainResult {
  ModelParams best_params;  // snapshot from best_epoch
  std::vector<EpochRecord> history;
  double best_val_accuracy = 0.0;
  int best_epoch = -1;
};

/// Early-stopped training. Per epoch: shuffle train indices, iterate batches
/// (last partial batch kept), augment train batches per config, apply the
/// freeze mask to gradients, step the optimizer. Stops when the validation
/// accuracy has not strictly improved for patience_epochs (ties do not reset
/// patience), or at max_epochs. Deterministic in (config, views).
TrainResult train_loop(const ModelParams& initial, const DatasetView& train_view,
                       const DatasetView& val_view, const TrainConfig& config);

/// CSV dump of a history: epoch,train_loss,val_acc,lr (with # header lines).
std::string history_to_csv(const std::vector<EpochRecord>& history,
                           const std::string& header_comment);

struct LrCurvePoint {
  double lr = 0.0;
  double raw_loss = 0.0;
  double smoothed_loss = 0.0;
};

struct LrFinderResult {
  double suggested_lr = 0.0;
  std::vector<LrCurvePoint> curve;
};

/// Exponential learning-rate sweep. step_with_lr performs one optimization
/// step at the given lr and returns the pre-step batch loss. The sweep stops
/// once the EMA-smoothed loss (beta=0.98, bias-corrected) exceeds 4x the
/// best seen; suggested_lr is the lr at the smoothed minimum divided by 10.
/// Throws NumericError if the very first step already diverges.
LrFinderResult lr_finder_core(const std::function<double(double)>& step_with_lr,
                              double lr_min, double lr_max, int n_steps);

/// Model-backed finder: sweeps over shuffled mini-batches of train_view
/// using the config's optimizer/head (a scratch copy of the params).
LrFinderResult lr_finder(const ModelParams& initial, const DatasetView& train_view,
                         const TrainConfig& config, double lr_min, double lr_max,
                         int n_steps);

/// Largest observed gap between successive strict validation-accuracy
/// improvements in a pilot history; a data-driven patience suggestion.
int suggest_patience(const std::vector<EpochRecord>& history);

/// Transfer emulation: trains `initial` (head sized for the source classes)
/// on the source dataset with an internal stratified train/val split, then
/// re-initializes only the head for target_classes. The returned trunk
/// carries the source-task features bit-exactly.
ModelParams pretrain_source(const ModelParams& initial, const Dataset& source,
                            const TrainConfig& config, int target_classes);

}  // namespace tbench
