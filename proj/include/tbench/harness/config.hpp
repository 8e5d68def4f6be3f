#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tbench/harness/sweep.hpp"
#include "tbench/model.hpp"
#include "tbench/split.hpp"
#include "tbench/synthetic.hpp"
#include "tbench/train.hpp"

namespace tbench {

/// Everything a campaign needs: dataset source, splitting and ratio-selection
/// settings, the base training configuration, the sweep grids, augmentation
/// candidates, and execution knobs. Parsed against a strict schema — unknown
/// keys are rejected.
struct CampaignConfig {
  int version = 1;

  // dataset source: a directory of per-class PPM/PGM images, or synthetic
  std::string dataset_path;  // empty -> synthetic
  SyntheticSpec synthetic;
  SyntheticSpec source_synthetic;  // transfer-pretraining source task
  bool pretrain = true;

  Architecture arch;  // num_classes is taken from the data

  // splitting
  double holdout_ratio = 0.10;
  SamplingStrategy holdout_strategy = SamplingStrategy::simple_random;
  SamplingStrategy kfold_strategy = SamplingStrategy::simple_random;
  int k = 5;
  std::vector<int> k_candidates{5, 10};
  bool select_k = false;          // optional stage: pick k by CV accuracy
  bool select_strategy = false;   // optional stage: pick the k-fold strategy

  // sample size + ratio selection
  std::vector<double> candidate_ratios{0.10, 0.15, 0.20, 0.25};
  double sem_tau = 0.0035;
  int n_min = 5;
  int n_max = 60;
  double alpha = 0.05;

  // base training configuration (seed/stream key are assigned by the harness)
  TrainConfig train;

  // sweep grids, in the greedy tuning order
  std::vector<std::pair<std::string, ScheduleSpec>> schedule_grid;
  std::vector<std::pair<std::string, OptimizerSpec>> optimizer_grid;
  std::vector<int> patience_grid{2, 4, 6};
  std::vector<std::pair<std::string, HeadKind>> head_grid;
  std::vector<int> batch_grid{8, 16, 32};
  double lr_find_min = 1e-6;
  double lr_find_max = 1.0;
  int lr_find_steps = 60;

  std::vector<AugmentCandidate> augment_candidates;  // must include "none"

  // execution
  std::uint64_t master_seed = 42;
  int parallelism = 2;
  std::string out_dir = "out";

  void validate() const;
  std::string to_json() const;
  static CampaignConfig from_json(const std::string& json_text);
  static CampaignConfig load(const std::string& path);

  /// Campaign identity: hash of the canonical config with execution-only
  /// fields (out_dir, parallelism) excluded. Hex string.
  std::string config_hash() const;

  /// Shipped presets: "desk" (small synthetic campaign that runs in minutes)
  /// and "table1" (the final production settings).
  static CampaignConfig preset(const std::string& name);
};

}  // namespace tbench
