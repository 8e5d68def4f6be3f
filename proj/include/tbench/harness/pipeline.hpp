#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tbench/harness/config.hpp"
#include "tbench/harness/ratio.hpp"
#include "tbench/harness/sweep.hpp"
#include "tbench/metrics.hpp"
#include "tbench/split.hpp"
#include "tbench/train.hpp"

namespace tbench {

/// Everything a finished campaign produced. Every number here is a pure
/// function of (config, master_seed); re-running from the recorded seeds
/// reproduces the report bit for bit.
struct Report {
  std::string config_hash;
  std::uint64_t master_seed = 0;
  std::string config_echo_json;
  std::vector<std::string> class_names;

  SplitPlan holdout;
  std::vector<RatioCandidate> ratio_candidates;
  RatioDecision ratio_decision;
  FoldAssignment folds;
  std::optional<SweepResult> k_selection;
  std::optional<SweepResult> strategy_selection;
  std::vector<SweepResult> sweeps;  // greedy tuning order
  FreezeSweepResult freeze;
  LrFinderResult lr_find;
  TrainConfig tuned_config;
  AugmentSelectResult augment;

  double benchmark_test_accuracy = 0.0;
  double final_test_accuracy = 0.0;
  ConfusionMatrix benchmark_confusion;
  ConfusionMatrix final_confusion;
  std::vector<EpochRecord> benchmark_history;
  std::vector<EpochRecord> final_history;
  int test_set_evaluations = 0;  // contract: exactly 2

  std::string to_json() const;
};

/// Shared campaign state: dataset, architecture, and the (pretrained)
/// initial parameters. Deterministic in the config, so staged CLI runs
/// recompute it identically.
struct CampaignContext {
  CampaignConfig config;
  std::string config_hash;
  Dataset dataset;
  Architecture arch;  // config arch with num_classes from the data
  ModelParams initial_params;

  /// Dataset + arch only; skips source pretraining (cheap).
  static CampaignContext prepare_dataset_only(const CampaignConfig& config);
  /// Full preparation including the transfer-pretrained trunk.
  static CampaignContext prepare(const CampaignConfig& config);
};

/// Stage: repeated probe experiments per candidate ratio until the SEM
/// converges (Fig. 2 analogue). Probes run entirely inside `rest`.
std::vector<RatioCandidate> run_sample_size_stage(
    const CampaignContext& ctx, const std::vector<std::size_t>& rest);

/// Stage: greedy one-parameter-at-a-time tuning over the config grids, in
/// the order scheduler, optimizer, patience, layer freezing, head, batch
/// size, then the learning-rate finder. Winners fold into `tuned`.
struct TuningOutcome {
  std::vector<SweepResult> sweeps;
  FreezeSweepResult freeze;
  LrFinderResult lr_find;
  TrainConfig tuned;
};
TuningOutcome run_tuning_stage(const CampaignContext& ctx,
                               const FoldAssignment& folds);

/// Stage: the learning-rate finder alone, on fold 0's training view.
LrFinderResult run_lr_find_stage(const CampaignContext& ctx,
                                 const FoldAssignment& folds,
                                 const TrainConfig& tuned);

/// Per-stage artifact writers (also used by run-all so staged and chained
/// runs emit identical files).
void write_sample_size_artifacts(const CampaignConfig& config,
                                 const std::vector<RatioCandidate>& candidates);
void write_lr_find_artifacts(const CampaignConfig& config,
                             const LrFinderResult& result);
void write_tuning_artifacts(const CampaignConfig& config,
                            const TuningOutcome& outcome);
void write_augment_artifacts(const CampaignConfig& config,
                             const AugmentSelectResult& result);

/// The full procedure: hold-out test split, sample-size determination,
/// ratio selection, k-fold setup, greedy parameter tuning, benchmark
/// train + test, augmentation selection, final train + test. The frozen
/// test set is evaluated exactly twice. If out_dir is non-empty, every
/// stage artifact is written there.
Report run_full_pipeline(const CampaignConfig& config, const std::string& out_dir);

/// Writes the per-stage artifact files for an existing report.
void write_report_artifacts(const Report& report, const std::string& out_dir);

/// Human-readable rendering of report.json (tables for the SEM curves,
/// sweeps, freeze curve, augmentation selection, and confusion matrices).
std::string render_report_text(const std::string& report_json);

/// `label` like "10%" -> file-system-safe "10pct".
std::string ratio_file_label(const std::string& label);

}  // namespace tbench
