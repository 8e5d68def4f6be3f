#include "tbench/harness/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "tbench/checkpoint.hpp"
#include "tbench/error.hpp"
#include "tbench/harness/parallel.hpp"

namespace fs = std::filesystem;

namespace tbench {

namespace {

using nlohmann::json;

void write_text(const fs::path& path, const std::string& content) {
  if (!path.parent_path().empty()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write: " + path.string());
  out << content;
}

std::string artifact_header(const CampaignConfig& config) {
  return "campaign_seed=" + std::to_string(config.master_seed) +
         " config_hash=" + config.config_hash();
}

json provenance(const CampaignConfig& config) {
  json j;
  j["master_seed"] = config.master_seed;
  j["config_hash"] = config.config_hash();
  return j;
}

json epoch_history_to_json(const std::vector<EpochRecord>& h) {
  json arr = json::array();
  for (const auto& r : h)
    arr.push_back({{"epoch", r.epoch},
                   {"train_loss", r.train_loss},
                   {"val_accuracy", r.val_accuracy},
                   {"lr", r.lr}});
  return arr;
}

json sweep_to_json(const SweepResult& s) {
  json j;
  j["param"] = s.param_name;
  j["winner_index"] = s.winner_index;
  j["baseline_index"] = s.baseline_index;
  j["tuning_gain"] = s.tuning_gain();
  json settings = json::array();
  for (const auto& v : s.settings) {
    json e;
    e["value"] = v.value_label;
    e["mean_val_accuracy"] = v.mean_accuracy;
    e["std_val_accuracy"] = v.std_accuracy;
    e["fold_accuracies"] = v.fold_accuracies;
    e["fold_errors"] = v.fold_errors;
    e["disqualified"] = v.disqualified;
    settings.push_back(e);
  }
  j["settings"] = settings;
  return j;
}

json lr_find_to_json(const LrFinderResult& r) {
  json j;
  j["suggested_lr"] = r.suggested_lr;
  json curve = json::array();
  for (const auto& p : r.curve)
    curve.push_back({{"lr", p.lr},
                     {"raw_loss", p.raw_loss},
                     {"smoothed_loss", p.smoothed_loss}});
  j["curve"] = curve;
  return j;
}

json augment_select_to_json(const AugmentSelectResult& a) {
  json j;
  j["benchmark_mean"] = a.benchmark_mean;
  j["family_best"] = a.family_best_labels;
  j["chosen_families"] = a.chosen_families;
  j["chosen_spec"] = json::parse(a.chosen_spec.to_json());
  json evals = json::array();
  for (const auto& e : a.evaluations) {
    evals.push_back({{"family", e.family},
                     {"label", e.label},
                     {"mean_val_accuracy", e.mean_accuracy},
                     {"std_val_accuracy", e.std_accuracy},
                     {"fold_accuracies", e.fold_accuracies},
                     {"val_confusion", json::parse(e.val_confusion.to_json())}});
  }
  j["evaluations"] = evals;
  return j;
}

json freeze_to_json(const FreezeSweepResult& f) {
  json j;
  j["best_index"] = f.best_index;
  json curve = json::array();
  for (const auto& p : f.curve)
    curve.push_back({{"trainable", p.label},
                     {"mean_val_accuracy", p.mean_accuracy},
                     {"fold_accuracies", p.fold_accuracies}});
  j["curve"] = curve;
  return j;
}

// One probe experiment for the sample-size stage: fresh probe split of the
// hold-out rest, an inner validation cut for early stopping, one training,
// one probe-test evaluation.
double ratio_probe_experiment(const CampaignContext& ctx,
                              const std::vector<std::size_t>& rest,
                              const std::string& label, double ratio, int rep) {
  std::string key = "campaign/samplesize/" + label + "/rep:" + std::to_string(rep);
  RngStream rng(ctx.config.master_seed, key);

  RngStream probe_rng = rng.child("probe");
  SplitPlan probe = holdout_split_subset(ctx.dataset, rest, ratio,
                                         ctx.config.holdout_strategy, probe_rng);
  RngStream val_rng = rng.child("val");
  SplitPlan inner = holdout_split_subset(ctx.dataset, probe.rest_indices, 0.15,
                                         ctx.config.holdout_strategy, val_rng);

  TrainConfig cfg = ctx.config.train;
  cfg.master_seed = ctx.config.master_seed;
  cfg.stream_key = key + "/train";

  DatasetView train_view{&ctx.dataset, inner.rest_indices};
  DatasetView val_view{&ctx.dataset, inner.test_indices};
  TrainResult r = train_loop(ctx.initial_params, train_view, val_view, cfg);

  DatasetView probe_view{&ctx.dataset, probe.test_indices};
  return evaluate(r.best_params, probe_view).accuracy;
}

// Winner of a hand-assembled single-value-per-candidate sweep (used by the
// optional k / strategy selection stages).
void pick_winner(SweepResult& r) {
  for (std::size_t i = 0; i < r.settings.size(); ++i) {
    if (r.settings[i].disqualified) continue;
    if (r.winner_index < 0 ||
        r.settings[i].mean_accuracy >
            r.settings[static_cast<std::size_t>(r.winner_index)].mean_accuracy)
      r.winner_index = static_cast<int>(i);
  }
}

}  // namespace

std::string ratio_file_label(const std::string& label) {
  std::string out;
  for (char c : label) {
    if (std::isalnum(static_cast<unsigned char>(c))) out += c;
    else if (c == '%') out += "pct";
    else out += '_';
  }
  return out;
}

CampaignContext CampaignContext::prepare_dataset_only(const CampaignConfig& config) {
  config.validate();
  CampaignContext ctx;
  ctx.config = config;
  ctx.config_hash = config.config_hash();

  RngStream rng(config.master_seed, "campaign");
  if (config.dataset_path.empty()) {
    RngStream data_rng = rng.child("dataset");
    ctx.dataset = generate_synthetic(config.synthetic, data_rng);
  } else {
    ctx.dataset = load_dataset(config.dataset_path);
  }

  ctx.arch = config.arch;
  ctx.arch.num_classes = ctx.dataset.num_classes();
  if (!ctx.dataset.samples.empty()) {
    const Image& first = ctx.dataset.samples.front().image;
    if (first.height != ctx.arch.input_side || first.width != ctx.arch.input_side ||
        first.channels != ctx.arch.input_channels)
      throw ConfigError("config: arch input dims do not match the dataset");
  }
  ctx.arch.validate();
  return ctx;
}

CampaignContext CampaignContext::prepare(const CampaignConfig& config) {
  CampaignContext ctx = prepare_dataset_only(config);
  RngStream rng(config.master_seed, "campaign");

  if (config.pretrain) {
    RngStream src_rng = rng.child("source-dataset");
    Dataset source = generate_synthetic(config.source_synthetic, src_rng);
    Architecture src_arch = ctx.arch;
    src_arch.num_classes = source.num_classes();
    RngStream init_rng = rng.child("init");
    ModelParams init = init_model(src_arch, init_rng);

    TrainConfig pre_cfg = config.train;
    pre_cfg.master_seed = config.master_seed;
    pre_cfg.stream_key = "campaign";
    pre_cfg.freeze = FreezeMask::all_trainable();
    pre_cfg.augment = AugmentSpec{};  // the source task is trained clean
    ctx.initial_params =
        pretrain_source(init, source, pre_cfg, ctx.dataset.num_classes());
  } else {
    RngStream init_rng = rng.child("init");
    ctx.initial_params = init_model(ctx.arch, init_rng);
  }
  return ctx;
}

std::vector<RatioCandidate> run_sample_size_stage(
    const CampaignContext& ctx, const std::vector<std::size_t>& rest) {
  std::vector<std::pair<std::string, double>> ratios;
  for (double r : ctx.config.candidate_ratios) {
    char label[16];
    std::snprintf(label, sizeof(label), "%g%%", r * 100.0);
    ratios.emplace_back(label, r);
  }
  return sample_size_procedure(
      ratios,
      [&](const std::string& label, double ratio, int rep) {
        return ratio_probe_experiment(ctx, rest, label, ratio, rep);
      },
      ctx.config.sem_tau, ctx.config.n_min, ctx.config.n_max,
      ctx.config.parallelism);
}

TuningOutcome run_tuning_stage(const CampaignContext& ctx,
                               const FoldAssignment& folds) {
  const CampaignConfig& config = ctx.config;
  const int par = config.parallelism;

  TuningOutcome out;
  TrainConfig& tuned = out.tuned;
  tuned = config.train;
  tuned.master_seed = config.master_seed;
  tuned.stream_key = "campaign/tuning";

  auto run_sweep = [&](const std::string& name, const std::vector<SweepValue>& values,
                       int baseline_index, auto commit) {
    SweepResult r = sweep_parameter(name, values, tuned, ctx.initial_params,
                                    ctx.dataset, folds, par);
    r.baseline_index = baseline_index;
    commit(static_cast<std::size_t>(r.winner_index));
    out.sweeps.push_back(std::move(r));
  };

  {
    std::vector<SweepValue> values;
    int baseline = -1;
    for (std::size_t i = 0; i < config.schedule_grid.size(); ++i) {
      const auto& [label, spec] = config.schedule_grid[i];
      if (spec == tuned.schedule) baseline = static_cast<int>(i);
      ScheduleSpec s = spec;
      values.push_back({label, [s](TrainConfig& c) { c.schedule = s; }});
    }
    run_sweep("scheduler", values, baseline, [&](std::size_t w) {
      tuned.schedule = config.schedule_grid[w].second;
    });
  }
  {
    std::vector<SweepValue> values;
    int baseline = -1;
    for (std::size_t i = 0; i < config.optimizer_grid.size(); ++i) {
      const auto& [label, spec] = config.optimizer_grid[i];
      if (spec == tuned.optimizer) baseline = static_cast<int>(i);
      OptimizerSpec o = spec;
      values.push_back({label, [o](TrainConfig& c) { c.optimizer = o; }});
    }
    run_sweep("optimizer", values, baseline, [&](std::size_t w) {
      tuned.optimizer = config.optimizer_grid[w].second;
    });
  }
  {
    std::vector<SweepValue> values;
    int baseline = -1;
    for (std::size_t i = 0; i < config.patience_grid.size(); ++i) {
      int p = config.patience_grid[i];
      if (p == tuned.patience_epochs) baseline = static_cast<int>(i);
      values.push_back({std::to_string(p),
                        [p](TrainConfig& c) { c.patience_epochs = p; }});
    }
    run_sweep("patience", values, baseline, [&](std::size_t w) {
      tuned.patience_epochs = config.patience_grid[w];
    });
  }
  {
    out.freeze = freezing_sweep(ctx.initial_params, default_unfreeze_sequence(),
                                tuned, ctx.dataset, folds, par);
    tuned.freeze =
        out.freeze.curve[static_cast<std::size_t>(out.freeze.best_index)].mask;
  }
  {
    std::vector<SweepValue> values;
    int baseline = -1;
    for (std::size_t i = 0; i < config.head_grid.size(); ++i) {
      const auto& [label, kind] = config.head_grid[i];
      if (kind == tuned.head) baseline = static_cast<int>(i);
      HeadKind k = kind;
      values.push_back({label, [k](TrainConfig& c) { c.head = k; }});
    }
    run_sweep("head", values, baseline, [&](std::size_t w) {
      tuned.head = config.head_grid[w].second;
    });
  }
  {
    std::vector<SweepValue> values;
    int baseline = -1;
    for (std::size_t i = 0; i < config.batch_grid.size(); ++i) {
      int b = config.batch_grid[i];
      if (b == tuned.batch_size) baseline = static_cast<int>(i);
      values.push_back({std::to_string(b), [b](TrainConfig& c) { c.batch_size = b; }});
    }
    run_sweep("batch_size", values, baseline, [&](std::size_t w) {
      tuned.batch_size = config.batch_grid[w];
    });
  }
  out.lr_find = run_lr_find_stage(ctx, folds, tuned);
  tuned.learning_rate = out.lr_find.suggested_lr;
  return out;
}

LrFinderResult run_lr_find_stage(const CampaignContext& ctx,
                                 const FoldAssignment& folds,
                                 const TrainConfig& tuned) {
  FoldView fv = fold_view(folds, 0);
  DatasetView train_view{&ctx.dataset, fv.train_indices};
  TrainConfig lr_cfg = tuned;
  lr_cfg.stream_key = "campaign/lrfind";
  return lr_finder(ctx.initial_params, train_view, lr_cfg, ctx.config.lr_find_min,
                   ctx.config.lr_find_max, ctx.config.lr_find_steps);
}

void write_sample_size_artifacts(const CampaignConfig& config,
                                 const std::vector<RatioCandidate>& candidates) {
  fs::path dir(config.out_dir);
  const std::string header = artifact_header(config);
  for (const auto& c : candidates) {
    std::string csv = "# " + header + "\nn,sem\n";
    char buf[64];
    for (const auto& p : c.sem_curve) {
      std::snprintf(buf, sizeof(buf), "%d,%.17g\n", p.n, p.sem);
      csv += buf;
    }
    write_text(dir / ("sem_curve_" + ratio_file_label(c.label) + ".csv"), csv);
  }
  json j = provenance(config);
  json cands = json::array();
  for (const auto& c : candidates) cands.push_back(json::parse(c.to_json()));
  j["candidates"] = cands;
  write_text(dir / "ratio_candidates.json", j.dump(1) + "\n");
}

void write_lr_find_artifacts(const CampaignConfig& config,
                             const LrFinderResult& result) {
  fs::path dir(config.out_dir);
  std::string csv = "# " + artifact_header(config) + "\nlr,raw_loss,smoothed_loss\n";
  char buf[96];
  for (const auto& p : result.curve) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", p.lr, p.raw_loss,
                  p.smoothed_loss);
    csv += buf;
  }
  write_text(dir / "lr_curve.csv", csv);
  json j = provenance(config);
  j["result"] = lr_find_to_json(result);
  write_text(dir / "lr_find.json", j.dump(1) + "\n");
}

void write_tuning_artifacts(const CampaignConfig& config,
                            const TuningOutcome& outcome) {
  fs::path dir(config.out_dir);
  const std::string header = artifact_header(config);
  for (const auto& s : outcome.sweeps)
    write_text(dir / ("sweep_" + s.param_name + ".csv"), s.to_csv(header));
  write_text(dir / "freeze_curve.csv", outcome.freeze.to_csv(header));
  write_lr_find_artifacts(config, outcome.lr_find);
  json j = provenance(config);
  j["config"] = json::parse(outcome.tuned.to_json());
  write_text(dir / "tuned_config.json", j.dump(1) + "\n");
}

void write_augment_artifacts(const CampaignConfig& config,
                             const AugmentSelectResult& result) {
  fs::path dir(config.out_dir);
  write_text(dir / "augment_select.csv", result.to_csv(artifact_header(config)));
  for (const auto& e : result.evaluations) {
    bool family_best =
        e.family == "none" ||
        std::find(result.family_best_labels.begin(), result.family_best_labels.end(),
                  e.label) != result.family_best_labels.end();
    if (!family_best) continue;
    json j = provenance(config);
    j["family"] = e.family;
    j["label"] = e.label;
    j["val_confusion"] = json::parse(e.val_confusion.to_json());
    write_text(dir / ("confusion_augment_" + ratio_file_label(e.family) + ".json"),
               j.dump(1) + "\n");
  }
}

Report run_full_pipeline(const CampaignConfig& config, const std::string& out_dir) {
  CampaignConfig cfg = config;
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  CampaignContext ctx = CampaignContext::prepare(cfg);
  const int par = cfg.parallelism;
  const bool writing = !out_dir.empty();

  Report report;
  report.config_hash = ctx.config_hash;
  report.master_seed = cfg.master_seed;
  report.config_echo_json = cfg.to_json();
  report.class_names = ctx.dataset.class_names;

  RngStream rng(cfg.master_seed, "campaign");

  // 1. Hold-out test split, drawn once and kept aside. Everything below
  // operates on `rest` until the two test evaluations at the end.
  RngStream holdout_rng = rng.child("holdout");
  report.holdout = holdout_split(ctx.dataset, cfg.holdout_ratio,
                                 cfg.holdout_strategy, holdout_rng);
  const std::vector<std::size_t>& rest = report.holdout.rest_indices;
  DatasetView test_view{&ctx.dataset, report.holdout.test_indices};

  // 2-3. Sample sizes per candidate ratio, then the ratio decision.
  report.ratio_candidates = run_sample_size_stage(ctx, rest);
  report.ratio_decision = select_split_ratio(report.ratio_candidates, cfg.alpha);

  // 4. k-fold setup (with the optional k / strategy selection stages).
  int chosen_k = cfg.k;
  SamplingStrategy chosen_strategy = cfg.kfold_strategy;
  TrainConfig probe_cfg = cfg.train;
  probe_cfg.master_seed = cfg.master_seed;
  probe_cfg.stream_key = "campaign/tuning";

  auto make_folds = [&](int k, SamplingStrategy strategy) {
    RngStream fold_rng = rng.child("folds/k:" + std::to_string(k) + "/" +
                                   to_string(strategy));
    return kfold_partition(ctx.dataset, rest, k, strategy, fold_rng);
  };

  if (cfg.select_k) {
    SweepResult best_of_k{"k", {}, -1, -1};
    for (int k : cfg.k_candidates) {
      FoldAssignment f = make_folds(k, chosen_strategy);
      SweepResult one =
          sweep_parameter("k", {{std::to_string(k), [](TrainConfig&) {}}},
                          probe_cfg, ctx.initial_params, ctx.dataset, f, par);
      best_of_k.settings.push_back(one.settings.front());
    }
    pick_winner(best_of_k);
    if (best_of_k.winner_index >= 0)
      chosen_k = cfg.k_candidates[static_cast<std::size_t>(best_of_k.winner_index)];
    report.k_selection = best_of_k;
  }

  if (cfg.select_strategy) {
    SweepResult best_of_s{"kfold_strategy", {}, -1, -1};
    const SamplingStrategy strategies[] = {SamplingStrategy::simple_random,
                                           SamplingStrategy::stratified_random};
    for (SamplingStrategy s : strategies) {
      FoldAssignment f = make_folds(chosen_k, s);
      SweepResult one =
          sweep_parameter("kfold_strategy", {{to_string(s), [](TrainConfig&) {}}},
                          probe_cfg, ctx.initial_params, ctx.dataset, f, par);
      best_of_s.settings.push_back(one.settings.front());
    }
    pick_winner(best_of_s);
    if (best_of_s.winner_index == 1)
      chosen_strategy = SamplingStrategy::stratified_random;
    report.strategy_selection = best_of_s;
  }

  report.folds = make_folds(chosen_k, chosen_strategy);

  // 5. Greedy parameter tuning (includes the freezing sweep and lr finder).
  TuningOutcome tuning = run_tuning_stage(ctx, report.folds);
  report.sweeps = tuning.sweeps;
  report.freeze = tuning.freeze;
  report.lr_find = tuning.lr_find;
  TrainConfig tuned = tuning.tuned;

  // 6. Benchmark model: tuned config without augmentation, trained on fold 0,
  // evaluated once on the frozen test set (touch #1).
  tuned.augment = AugmentSpec{};
  TrainResult benchmark;
  {
    FoldView fv = fold_view(report.folds, 0);
    DatasetView train_view{&ctx.dataset, fv.train_indices};
    DatasetView val_view{&ctx.dataset, fv.val_indices};
    TrainConfig bench_cfg = tuned;
    bench_cfg.stream_key = "campaign/benchmark";
    benchmark = train_loop(ctx.initial_params, train_view, val_view, bench_cfg);
    report.benchmark_history = benchmark.history;
    EvalResult ev = evaluate(benchmark.best_params, test_view);
    report.test_set_evaluations++;
    report.benchmark_test_accuracy = ev.accuracy;
    report.benchmark_confusion = ev.confusion;
  }

  // 7. Augmentation selection on k-fold validation accuracy.
  report.augment = augmentation_select(cfg.augment_candidates, tuned,
                                       ctx.initial_params, ctx.dataset,
                                       report.folds, par);

  // 8. Final model: tuned config + chosen augmentation (touch #2). An empty
  // selection means the final model IS the benchmark model; it is not
  // retrained under a different stream.
  tuned.augment = report.augment.chosen_spec;
  TrainResult final_run;
  {
    if (report.augment.chosen_spec.enabled()) {
      FoldView fv = fold_view(report.folds, 0);
      DatasetView train_view{&ctx.dataset, fv.train_indices};
      DatasetView val_view{&ctx.dataset, fv.val_indices};
      TrainConfig final_cfg = tuned;
      final_cfg.stream_key = "campaign/final";
      final_run = train_loop(ctx.initial_params, train_view, val_view, final_cfg);
    } else {
      final_run = benchmark;
    }
    report.final_history = final_run.history;
    EvalResult ev = evaluate(final_run.best_params, test_view);
    report.test_set_evaluations++;
    report.final_test_accuracy = ev.accuracy;
    report.final_confusion = ev.confusion;
  }

  report.tuned_config = tuned;

  if (writing) {
    write_report_artifacts(report, cfg.out_dir);
    save_checkpoint(benchmark.best_params, fs::path(cfg.out_dir) / "model_benchmark.ckpt");
    save_checkpoint(final_run.best_params, fs::path(cfg.out_dir) / "model_final.ckpt");
  }
  return report;
}

std::string Report::to_json() const {
  json j;
  j["config_hash"] = config_hash;
  j["master_seed"] = master_seed;
  j["config"] = json::parse(config_echo_json);
  j["class_names"] = class_names;
  j["holdout"] = json::parse(holdout.to_json());
  json cands = json::array();
  for (const auto& c : ratio_candidates) cands.push_back(json::parse(c.to_json()));
  j["ratio_candidates"] = cands;
  j["ratio_decision"] = json::parse(ratio_decision.to_json());
  j["folds"] = json::parse(folds.to_json());
  if (k_selection) j["k_selection"] = sweep_to_json(*k_selection);
  if (strategy_selection) j["strategy_selection"] = sweep_to_json(*strategy_selection);
  json sweeps_json = json::array();
  for (const auto& s : sweeps) sweeps_json.push_back(sweep_to_json(s));
  j["sweeps"] = sweeps_json;
  j["freeze_sweep"] = freeze_to_json(freeze);
  j["lr_find"] = lr_find_to_json(lr_find);
  j["tuned_config"] = json::parse(tuned_config.to_json());
  j["augment_select"] = augment_select_to_json(augment);
  j["benchmark_test_accuracy"] = benchmark_test_accuracy;
  j["final_test_accuracy"] = final_test_accuracy;
  j["benchmark_confusion"] = json::parse(benchmark_confusion.to_json());
  j["final_confusion"] = json::parse(final_confusion.to_json());
  j["benchmark_history"] = epoch_history_to_json(benchmark_history);
  j["final_history"] = epoch_history_to_json(final_history);
  j["test_set_evaluations"] = test_set_evaluations;
  return j.dump(1);
}

void write_report_artifacts(const Report& report, const std::string& out_dir) {
  fs::path dir(out_dir);
  CampaignConfig config = CampaignConfig::from_json(report.config_echo_json);
  config.out_dir = out_dir;
  const std::string header = artifact_header(config);

  write_sample_size_artifacts(config, report.ratio_candidates);
  {
    json j = provenance(config);
    j["decision"] = json::parse(report.ratio_decision.to_json());
    write_text(dir / "ratio_decision.json", j.dump(1) + "\n");
  }
  {
    json j = provenance(config);
    j["plan"] = json::parse(report.holdout.to_json());
    write_text(dir / "holdout_split.json", j.dump(1) + "\n");
  }
  {
    json j = provenance(config);
    j["folds"] = json::parse(report.folds.to_json());
    write_text(dir / "folds.json", j.dump(1) + "\n");
  }
  TuningOutcome tuning{report.sweeps, report.freeze, report.lr_find,
                       report.tuned_config};
  write_tuning_artifacts(config, tuning);
  write_augment_artifacts(config, report.augment);
  write_text(dir / "history_benchmark.csv",
             history_to_csv(report.benchmark_history, header));
  write_text(dir / "history_final.csv", history_to_csv(report.final_history, header));
  for (const char* stage : {"benchmark", "final"}) {
    json j = provenance(config);
    j["stage"] = stage;
    const bool is_benchmark = std::string(stage) == "benchmark";
    j["test_accuracy"] = is_benchmark ? report.benchmark_test_accuracy
                                      : report.final_test_accuracy;
    j["confusion"] = json::parse(is_benchmark ? report.benchmark_confusion.to_json()
                                              : report.final_confusion.to_json());
    write_text(dir / (std::string("confusion_") + stage + ".json"), j.dump(1) + "\n");
  }
  write_text(dir / "report.json", report.to_json() + "\n");
}

std::string render_report_text(const std::string& report_json) {
  json j;
  try {
    j = json::parse(report_json);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("report: JSON parse error: ") + e.what());
  }
  if (!j.contains("config_hash") || !j.contains("final_test_accuracy"))
    throw ConfigError("report: schema mismatch (not a campaign report)");

  std::string out;
  char buf[256];
  auto line = [&](const char* fmt, auto... args) {
    std::snprintf(buf, sizeof(buf), fmt, args...);
    out += buf;
    out += '\n';
  };

  line("campaign report  (seed=%llu  config=%s)",
       static_cast<unsigned long long>(j.at("master_seed").get<std::uint64_t>()),
       j.at("config_hash").get<std::string>().c_str());
  line("%s", "");
  line("benchmark test accuracy: %.4f",
       j.at("benchmark_test_accuracy").get<double>());
  line("final test accuracy:     %.4f", j.at("final_test_accuracy").get<double>());
  line("test set evaluations:    %d", j.at("test_set_evaluations").get<int>());

  out += "\n== standard error of the mean vs sample size ==\n";
  for (const auto& c : j.at("ratio_candidates")) {
    line("ratio %s: n=%d%s", c.at("label").get<std::string>().c_str(),
         c.at("chosen_n").get<int>(),
         c.at("converged").get<bool>() ? "" : "  [unconverged]");
    out += "  n:   ";
    for (const auto& p : c.at("sem_curve")) {
      std::snprintf(buf, sizeof(buf), "%7d", p.at("n").get<int>());
      out += buf;
    }
    out += "\n  sem: ";
    for (const auto& p : c.at("sem_curve")) {
      std::snprintf(buf, sizeof(buf), "%7.4f", p.at("sem").get<double>());
      out += buf;
    }
    out += "\n";
  }

  out += "\n== split ratio decision ==\n";
  const json& dec = j.at("ratio_decision");
  for (const auto& t : dec.at("trail")) {
    const json& r = t.at("result");
    line("  %-12s %-24s p=%-10.4g %s", t.at("stage").get<std::string>().c_str(),
         t.at("subject").get<std::string>().c_str(), r.at("p_value").get<double>(),
         r.at("reject_null").get<bool>() ? "reject" : "accept");
  }
  std::string cands;
  for (const auto& c : dec.at("candidate_labels"))
    cands += (cands.empty() ? "" : ", ") + c.get<std::string>();
  line("  branch: %s; candidates: {%s}; selected: %s",
       dec.at("branch").get<std::string>().c_str(), cands.c_str(),
       dec.at("selected_label").get<std::string>().c_str());

  out += "\n== parameter tuning (k-fold mean validation accuracy) ==\n";
  if (j.at("sweeps").empty()) out += "  no sweeps run\n";
  for (const auto& s : j.at("sweeps")) {
    line("  sweep %-12s (tuning gain %+.4f)",
         s.at("param").get<std::string>().c_str(), s.at("tuning_gain").get<double>());
    int wi = s.at("winner_index").get<int>();
    int idx = 0;
    for (const auto& v : s.at("settings")) {
      line("    %-28s mean=%.4f  std=%.4f%s",
           v.at("value").get<std::string>().c_str(),
           v.at("mean_val_accuracy").get<double>(),
           v.at("std_val_accuracy").get<double>(), idx == wi ? "  <- winner" : "");
      ++idx;
    }
  }

  out += "\n== layer freezing curve ==\n";
  {
    const json& f = j.at("freeze_sweep");
    int bi = f.at("best_index").get<int>();
    int idx = 0;
    for (const auto& p : f.at("curve")) {
      line("  trainable={%-28s} mean=%.4f%s",
           p.at("trainable").get<std::string>().c_str(),
           p.at("mean_val_accuracy").get<double>(), idx == bi ? "  <- best" : "");
      ++idx;
    }
  }

  line("\nlearning-rate finder: suggested lr = %.6g",
       j.at("lr_find").at("suggested_lr").get<double>());

  out += "\n== augmentation selection ==\n";
  {
    const json& a = j.at("augment_select");
    line("  benchmark mean: %.4f", a.at("benchmark_mean").get<double>());
    for (const auto& e : a.at("evaluations")) {
      line("  %-12s %-24s mean=%.4f  delta=%+.4f",
           e.at("family").get<std::string>().c_str(),
           e.at("label").get<std::string>().c_str(),
           e.at("mean_val_accuracy").get<double>(),
           e.at("mean_val_accuracy").get<double>() -
               a.at("benchmark_mean").get<double>());
    }
    std::string fams;
    for (const auto& f : a.at("chosen_families"))
      fams += (fams.empty() ? "" : ", ") + f.get<std::string>();
    line("  chosen families: {%s}", fams.c_str());
  }

  std::vector<std::string> names;
  for (const auto& n : j.at("class_names")) names.push_back(n.get<std::string>());
  for (const char* stage : {"benchmark_confusion", "final_confusion"}) {
    out += "\n== " + std::string(stage) + " (test set) ==\n";
    ConfusionMatrix m = ConfusionMatrix::from_json(j.at(stage).dump());
    out += m.render_text(names);
  }
  return out;
}

}  // namespace tbench
