// trainbench: experiment harness CLI. One subcommand per pipeline stage,
// plus run-all to chain the whole campaign. Exit codes: 0 success,
// 1 config/validation error, 2 runtime failure.
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "tbench/checkpoint.hpp"
#include "tbench/error.hpp"
#include "tbench/harness/config.hpp"
#include "tbench/harness/pipeline.hpp"
#include "tbench/harness/ratio.hpp"
#include "tbench/harness/sweep.hpp"
#include "tbench/metrics.hpp"
#include "tbench/synthetic.hpp"
#include "tbench/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tbench;

namespace {

struct CliOptions {
  std::string config_path;
  std::string preset;
  std::string out_dir;
  std::string stage_input;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int parallelism = 0;
  bool dry_run = false;
};

CampaignConfig resolve_config(const CliOptions& opt) {
  CampaignConfig cfg;
  if (!opt.config_path.empty() && !opt.preset.empty())
    throw ConfigError("give either --config or --preset, not both");
  if (!opt.config_path.empty())
    cfg = CampaignConfig::load(opt.config_path);
  else if (!opt.preset.empty())
    cfg = CampaignConfig::preset(opt.preset);
  else
    throw ConfigError("a configuration is required: --config FILE or --preset NAME");

  if (opt.seed_set) cfg.master_seed = opt.seed;
  if (!opt.out_dir.empty()) {
    cfg.out_dir = opt.out_dir;
  } else if (const char* env = std::getenv("TRAINBENCH_OUT"); env && *env) {
    cfg.out_dir = env;
  }
  if (opt.parallelism > 0) cfg.parallelism = opt.parallelism;
  cfg.validate();
  return cfg;
}

std::string slurp(const fs::path& path, const char* stage_hint) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("missing upstream artifact: " + path.string() +
                      " (produce it with `trainbench " + stage_hint + "`)");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json load_artifact(const fs::path& path, const char* stage_hint,
                   const std::string& expected_hash) {
  json j = json::parse(slurp(path, stage_hint));
  std::string found = j.value("config_hash", "");
  if (found != expected_hash)
    throw ConfigError("artifact " + path.string() + " belongs to config " + found +
                      ", but the current config hashes to " + expected_hash +
                      "; refusing to mix campaigns");
  return j;
}

void write_text_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write: " + path.string());
  out << content;
}

std::string header_of(const CampaignConfig& cfg) {
  return "campaign_seed=" + std::to_string(cfg.master_seed) +
         " config_hash=" + cfg.config_hash();
}

json with_provenance(const CampaignConfig& cfg) {
  json j;
  j["master_seed"] = cfg.master_seed;
  j["config_hash"] = cfg.config_hash();
  return j;
}

SplitPlan load_holdout(const CampaignConfig& cfg) {
  json j = load_artifact(fs::path(cfg.out_dir) / "holdout_split.json", "split",
                         cfg.config_hash());
  return SplitPlan::from_json(j.at("plan").dump());
}

FoldAssignment load_folds(const CampaignConfig& cfg) {
  json j = load_artifact(fs::path(cfg.out_dir) / "folds.json", "split",
                         cfg.config_hash());
  return FoldAssignment::from_json(j.at("folds").dump());
}

TrainConfig tuned_or_base(const CampaignConfig& cfg, const CampaignContext& ctx) {
  fs::path tuned_path = fs::path(cfg.out_dir) / "tuned_config.json";
  TrainConfig t = ctx.config.train;
  if (fs::exists(tuned_path)) {
    json j = load_artifact(tuned_path, "sweep", cfg.config_hash());
    t = TrainConfig::from_json(j.at("config").dump());
    std::cerr << "using tuned configuration from " << tuned_path << "\n";
  }
  t.master_seed = cfg.master_seed;
  return t;
}

int cmd_gen_data(const CampaignConfig& cfg) {
  RngStream rng(cfg.master_seed, "campaign");
  RngStream data_rng = rng.child("dataset");
  fs::path dir = fs::path(cfg.out_dir) / "dataset";
  generate_synthetic_to_dir(cfg.synthetic, data_rng, dir);
  std::cout << "wrote synthetic dataset to " << dir << "\n";
  return 0;
}

int cmd_split(const CampaignConfig& cfg) {
  CampaignContext ctx = CampaignContext::prepare_dataset_only(cfg);
  RngStream rng(cfg.master_seed, "campaign");
  RngStream holdout_rng = rng.child("holdout");
  SplitPlan plan = holdout_split(ctx.dataset, cfg.holdout_ratio,
                                 cfg.holdout_strategy, holdout_rng);
  RngStream fold_rng = rng.child("folds/k:" + std::to_string(cfg.k) + "/" +
                                 to_string(cfg.kfold_strategy));
  FoldAssignment folds = kfold_partition(ctx.dataset, plan.rest_indices, cfg.k,
                                         cfg.kfold_strategy, fold_rng);
  json jh = with_provenance(cfg);
  jh["plan"] = json::parse(plan.to_json());
  write_text_file(fs::path(cfg.out_dir) / "holdout_split.json", jh.dump(1) + "\n");
  json jf = with_provenance(cfg);
  jf["folds"] = json::parse(folds.to_json());
  write_text_file(fs::path(cfg.out_dir) / "folds.json", jf.dump(1) + "\n");
  std::cout << "hold-out: " << plan.test_indices.size() << " test / "
            << plan.rest_indices.size() << " rest; k=" << folds.k << "\n";
  return 0;
}

int cmd_sample_size(const CampaignConfig& cfg) {
  CampaignContext ctx = CampaignContext::prepare(cfg);
  SplitPlan holdout = load_holdout(cfg);
  auto candidates = run_sample_size_stage(ctx, holdout.rest_indices);
  write_sample_size_artifacts(cfg, candidates);
  for (const auto& c : candidates)
    std::cout << "ratio " << c.label << ": n=" << c.chosen_n
              << (c.converged ? "" : " [unconverged]") << "\n";
  return 0;
}

int cmd_select_ratio(const CampaignConfig& cfg, const CliOptions& opt) {
  RatioDecision decision;
  if (!opt.stage_input.empty()) {
    // Either live candidates or a recorded trail of p-values.
    json j = json::parse(slurp(opt.stage_input, "sample-size"));
    if (j.contains("normality_p")) {
      RecordedTestRunner runner = RecordedTestRunner::from_json(j.dump());
      decision = select_split_ratio_with_runner(runner.groups(), runner,
                                                runner.alpha());
    } else {
      std::vector<RatioCandidate> candidates;
      for (const auto& c : j.at("candidates"))
        candidates.push_back(RatioCandidate::from_json(c.dump()));
      decision = select_split_ratio(candidates, cfg.alpha);
    }
  } else {
    json j = load_artifact(fs::path(cfg.out_dir) / "ratio_candidates.json",
                           "sample-size", cfg.config_hash());
    std::vector<RatioCandidate> candidates;
    for (const auto& c : j.at("candidates"))
      candidates.push_back(RatioCandidate::from_json(c.dump()));
    decision = select_split_ratio(candidates, cfg.alpha);
  }
  json out = with_provenance(cfg);
  out["decision"] = json::parse(decision.to_json());
  write_text_file(fs::path(cfg.out_dir) / "ratio_decision.json", out.dump(1) + "\n");
  std::cout << "selected ratio: " << decision.selected_label << " (candidates:";
  for (const auto& l : decision.candidate_labels) std::cout << " " << l;
  std::cout << ")\n";
  return 0;
}

int cmd_lr_find(const CampaignConfig& cfg) {
  CampaignContext ctx = CampaignContext::prepare(cfg);
  FoldAssignment folds = load_folds(cfg);
  TrainConfig t = tuned_or_base(cfg, ctx);
  LrFinderResult r = run_lr_find_stage(ctx, folds, t);
  write_lr_find_artifacts(cfg, r);
  std::cout << "suggested learning rate: " << r.suggested_lr << "\n";
  return 0;
}

int cmd_sweep(const CampaignConfig& cfg) {
  CampaignContext ctx = CampaignContext::prepare(cfg);
  FoldAssignment folds = load_folds(cfg);
  TuningOutcome outcome = run_tuning_stage(ctx, folds);
  write_tuning_artifacts(cfg, outcome);
  for (const auto& s : outcome.sweeps)
    std::cout << "sweep " << s.param_name << ": winner "
              << s.settings[static_cast<std::size_t>(s.winner_index)].value_label
              << " (gain " << s.tuning_gain() << ")\n";
  std::cout << "freeze: "
            << outcome.freeze.curve[static_cast<std::size_t>(outcome.freeze.best_index)].label
            << "; lr: " << outcome.lr_find.suggested_lr << "\n";
  return 0;
}

int cmd_freeze_sweep(const CampaignConfig& cfg) {
  CampaignContext ctx = CampaignContext::prepare(cfg);
  FoldAssignment folds = load_folds(cfg);
  TrainConfig t = tuned_or_base(cfg, ctx);
  t.stream_key = "campaign/tuning";
  FreezeSweepResult r = freezing_sweep(ctx.initial_params, default_unfreeze_sequence(),
                                       t, ctx.dataset, folds, cfg.parallelism);
  write_text_file(fs::path(cfg.out_dir) / "freeze_curve.csv", r.to_csv(header_of(cfg)));
  for (const auto& p : r.curve)
    std::cout << "trainable={" << p.label << "}: " << p.mean_accuracy << "\n";
  return 0;
}

int cmd_augment_select(const CampaignConfig& cfg) {
  CampaignContext ctx = CampaignContext::prepare(cfg);
  FoldAssignment folds = load_folds(cfg);
  TrainConfig t = tuned_or_base(cfg, ctx);
  t.stream_key = "campaign/tuning";
  t.augment = AugmentSpec{};
  AugmentSelectResult r = augmentation_select(cfg.augment_candidates, t,
                                              ctx.initial_params, ctx.dataset,
                                              folds, cfg.parallelism);
  write_augment_artifacts(cfg, r);
  std::cout << "benchmark mean: " << r.benchmark_mean << "\nchosen families:";
  for (const auto& f : r.chosen_families) std::cout << " " << f;
  std::cout << "\nchosen spec: " << r.chosen_spec.to_json() << "\n";
  return 0;
}

int cmd_train(const CampaignConfig& cfg, const CliOptions& opt) {
  CampaignContext ctx = CampaignContext::prepare_dataset_only(cfg);
  TrainConfig t = cfg.train;
  fs::path tuned_path = fs::path(cfg.out_dir) / "tuned_config.json";
  if (fs::exists(tuned_path)) {
    json j = load_artifact(tuned_path, "sweep", cfg.config_hash());
    t = TrainConfig::from_json(j.at("config").dump());
  }
  t.master_seed = cfg.master_seed;
  t.stream_key = "campaign/train";
  std::cout << t.to_json() << "\n";  // config echo
  if (opt.dry_run) return 0;

  CampaignContext full = CampaignContext::prepare(cfg);
  DatasetView train_view, val_view;
  fs::path folds_path = fs::path(cfg.out_dir) / "folds.json";
  SplitPlan holdout;
  if (fs::exists(folds_path)) {
    FoldAssignment folds = load_folds(cfg);
    FoldView fv = fold_view(folds, 0);
    train_view = DatasetView{&full.dataset, fv.train_indices};
    val_view = DatasetView{&full.dataset, fv.val_indices};
  } else {
    RngStream rng(cfg.master_seed, "campaign/train/split");
    SplitPlan inner = holdout_split(full.dataset, 0.15, cfg.holdout_strategy, rng);
    train_view = DatasetView{&full.dataset, inner.rest_indices};
    val_view = DatasetView{&full.dataset, inner.test_indices};
  }
  TrainResult r = train_loop(full.initial_params, train_view, val_view, t);
  save_checkpoint(r.best_params, fs::path(cfg.out_dir) / "model.ckpt");
  write_text_file(fs::path(cfg.out_dir) / "history.csv",
                  history_to_csv(r.history, header_of(cfg)));
  std::cout << "best validation accuracy " << r.best_val_accuracy << " at epoch "
            << r.best_epoch << "; checkpoint written\n";
  return 0;
}

int cmd_evaluate(const CampaignConfig& cfg, const CliOptions& opt) {
  CampaignContext ctx = CampaignContext::prepare_dataset_only(cfg);
  fs::path ckpt = opt.stage_input.empty()
                      ? fs::path(cfg.out_dir) / "model.ckpt"
                      : fs::path(opt.stage_input);
  if (!fs::exists(ckpt))
    throw ConfigError("missing upstream artifact: " + ckpt.string() +
                      " (produce it with `trainbench train`)");
  ModelParams params = load_checkpoint(ckpt);
  SplitPlan holdout = load_holdout(cfg);
  DatasetView test_view{&ctx.dataset, holdout.test_indices};
  EvalResult r = evaluate(params, test_view);
  json out = with_provenance(cfg);
  out["test_accuracy"] = r.accuracy;
  json errors = json::array();
  for (const auto& e : r.per_class_error)
    errors.push_back(e ? json(*e) : json(nullptr));
  out["per_class_error"] = errors;
  out["confusion"] = json::parse(r.confusion.to_json());
  write_text_file(fs::path(cfg.out_dir) / "eval.json", out.dump(1) + "\n");
  std::cout << "test accuracy: " << r.accuracy << "\n"
            << r.confusion.render_text(ctx.dataset.class_names);
  return 0;
}

int cmd_report(const CampaignConfig& cfg, const CliOptions& opt) {
  fs::path path = opt.stage_input.empty() ? fs::path(cfg.out_dir) / "report.json"
                                          : fs::path(opt.stage_input);
  std::string text = render_report_text(slurp(path, "run-all"));
  write_text_file(fs::path(cfg.out_dir) / "report.txt", text);
  std::cout << text;
  return 0;
}

int cmd_run_all(const CampaignConfig& cfg) {
  Report report = run_full_pipeline(cfg, cfg.out_dir);
  std::string text = render_report_text(report.to_json());
  write_text_file(fs::path(cfg.out_dir) / "report.txt", text);
  std::cout << text;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"systematic model-training experiment harness"};
  app.require_subcommand(1);

  CliOptions opt;
  app.add_option("--config", opt.config_path, "campaign config JSON file");
  app.add_option("--preset", opt.preset, "built-in preset: desk or table1");
  app.add_option("--seed", opt.seed, "override the campaign master seed")
      ->each([&](const std::string&) { opt.seed_set = true; });
  app.add_option("--out", opt.out_dir,
                 "output directory (default: config out_dir or $TRAINBENCH_OUT)");
  app.add_option("--parallelism", opt.parallelism, "max concurrent trainings");
  app.add_option("--stage-input", opt.stage_input,
                 "explicit input artifact for this stage");
  app.add_flag("--dry-run", opt.dry_run, "validate and echo config, do no work");

  auto* gen = app.add_subcommand("gen-data", "write the synthetic dataset to disk");
  auto* split = app.add_subcommand("split", "draw the frozen hold-out split and folds");
  auto* ss = app.add_subcommand("sample-size", "run the SEM sample-size procedure");
  auto* sel = app.add_subcommand("select-ratio", "run the split-ratio decision");
  auto* lrf = app.add_subcommand("lr-find", "run the learning-rate finder");
  auto* sweep = app.add_subcommand("sweep", "greedy training-parameter tuning");
  auto* frz = app.add_subcommand("freeze-sweep", "layer-freezing sweep only");
  auto* aug = app.add_subcommand("augment-select", "augmentation selection");
  auto* train = app.add_subcommand("train", "train one model with the current config");
  auto* eval = app.add_subcommand("evaluate", "evaluate a checkpoint on the test split");
  auto* rep = app.add_subcommand("report", "render report.json as text");
  auto* all = app.add_subcommand("run-all", "run the complete campaign");

  for (CLI::App* sub : app.get_subcommands({})) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    CampaignConfig cfg = resolve_config(opt);
    if (gen->parsed()) return cmd_gen_data(cfg);
    if (split->parsed()) return cmd_split(cfg);
    if (ss->parsed()) return cmd_sample_size(cfg);
    if (sel->parsed()) return cmd_select_ratio(cfg, opt);
    if (lrf->parsed()) return cmd_lr_find(cfg);
    if (sweep->parsed()) return cmd_sweep(cfg);
    if (frz->parsed()) return cmd_freeze_sweep(cfg);
    if (aug->parsed()) return cmd_augment_select(cfg);
    if (train->parsed()) return cmd_train(cfg, opt);
    if (eval->parsed()) return cmd_evaluate(cfg, opt);
    if (rep->parsed()) return cmd_report(cfg, opt);
    if (all->parsed()) return cmd_run_all(cfg);
    std::cerr << "no subcommand\n";
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime failure: " << e.what() << "\n";
    return 2;
  }
}
