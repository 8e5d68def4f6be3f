#include "tbench/harness/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "tbench/error.hpp"
#include "tbench/harness/parallel.hpp"
#include "tbench/stats/descriptive.hpp"

namespace tbench {

namespace {

struct FoldRun {
  double accuracy = std::numeric_limits<double>::quiet_NaN();
  std::string error;
  ConfusionMatrix confusion;
};

// One (config, fold) training; returns the best validation accuracy and the
// confusion of the best snapshot on that fold's validation view.
FoldRun run_fold(const TrainConfig& config, const ModelParams& init_params,
                 const Dataset& dataset, const FoldAssignment& folds, int fold) {
  FoldRun out;
  try {
    FoldView view = fold_view(folds, fold);
    DatasetView train_view{&dataset, view.train_indices};
    DatasetView val_view{&dataset, view.val_indices};
    TrainResult r = train_loop(init_params, train_view, val_view, config);
    out.accuracy = r.best_val_accuracy;
    out.confusion = evaluate(r.best_params, val_view).confusion;
  } catch (const Error& e) {
    out.error = e.what();
  }
  return out;
}

void summarize(const std::vector<FoldRun>& runs, std::vector<double>* accs,
               std::vector<std::string>* errors, double* mean_out,
               double* std_out, bool* disqualified) {
  std::vector<double> ok;
  for (const auto& r : runs) {
    accs->push_back(r.accuracy);
    errors->push_back(r.error);
    if (r.error.empty()) ok.push_back(r.accuracy);
  }
  if (ok.empty()) {
    *disqualified = true;
    *mean_out = std::numeric_limits<double>::quiet_NaN();
    *std_out = std::numeric_limits<double>::quiet_NaN();
    return;
  }
  *disqualified = false;
  *mean_out = stats::mean(ok);
  *std_out = ok.size() >= 2 ? stats::sample_std(ok) : 0.0;
}

std::string csv_escape(const std::string& s) {
  std::string out;
  for (char c : s) out += (c == ',' ? ';' : c);
  return out;
}

}  // namespace

double SweepResult::tuning_gain() const {
  if (winner_index < 0 || settings.empty()) return 0.0;
  std::size_t base = baseline_index >= 0 ? static_cast<std::size_t>(baseline_index) : 0;
  return settings[static_cast<std::size_t>(winner_index)].mean_accuracy -
         settings[base].mean_accuracy;
}

std::string SweepResult::to_csv(const std::string& header_comment) const {
  std::string out;
  if (!header_comment.empty()) out += "# " + header_comment + "\n";
  out += "param,value,mean_val_accuracy,std_val_accuracy,winner";
  std::size_t k = settings.empty() ? 0 : settings.front().fold_accuracies.size();
  for (std::size_t f = 0; f < k; ++f) out += ",fold" + std::to_string(f);
  out += "\n";
  char buf[64];
  for (std::size_t i = 0; i < settings.size(); ++i) {
    const auto& s = settings[i];
    out += csv_escape(param_name) + "," + csv_escape(s.value_label) + ",";
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,", s.mean_accuracy, s.std_accuracy);
    out += buf;
    out += (static_cast<int>(i) == winner_index ? "1" : "0");
    for (double a : s.fold_accuracies) {
      std::snprintf(buf, sizeof(buf), ",%.17g", a);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

SweepResult sweep_parameter(const std::string& name,
                            const std::vector<SweepValue>& values,
                            const TrainConfig& base_config,
                            const ModelParams& init_params,
                            const Dataset& dataset, const FoldAssignment& folds,
                            int parallelism) {
  if (values.empty()) throw ConfigError("sweep_parameter: no values for " + name);

  const int k = folds.k;
  std::size_t total = values.size() * static_cast<std::size_t>(k);
  std::vector<FoldRun> runs = parallel_map<FoldRun>(
      total, parallelism, [&](std::size_t task) {
        std::size_t vi = task / static_cast<std::size_t>(k);
        int fold = static_cast<int>(task % static_cast<std::size_t>(k));
        TrainConfig cfg = base_config;
        values[vi].apply(cfg);
        cfg.stream_key = base_config.stream_key + "/sweep:" + name + "/" +
                         values[vi].label + "/fold:" + std::to_string(fold);
        return run_fold(cfg, init_params, dataset, folds, fold);
      });

  SweepResult result;
  result.param_name = name;
  for (std::size_t vi = 0; vi < values.size(); ++vi) {
    SweepSetting s;
    s.value_label = values[vi].label;
    std::vector<FoldRun> row(runs.begin() + static_cast<std::ptrdiff_t>(vi * k),
                             runs.begin() + static_cast<std::ptrdiff_t>((vi + 1) * k));
    summarize(row, &s.fold_accuracies, &s.fold_errors, &s.mean_accuracy,
              &s.std_accuracy, &s.disqualified);
    result.settings.push_back(std::move(s));
  }

  for (std::size_t i = 0; i < result.settings.size(); ++i) {
    const auto& s = result.settings[i];
    if (s.disqualified) continue;
    if (result.winner_index < 0 ||
        s.mean_accuracy >
            result.settings[static_cast<std::size_t>(result.winner_index)].mean_accuracy)
      result.winner_index = static_cast<int>(i);
  }
  if (result.winner_index < 0)
    throw NumericError("sweep_parameter: every value failed on every fold for " + name);
  return result;
}

std::vector<FreezeState> default_unfreeze_sequence() {
  std::vector<FreezeState> seq;
  FreezeMask m = FreezeMask::all_frozen();
  seq.push_back({"none", m});
  // unfreeze from the output head toward the input conv
  const LayerName order[] = {LayerName::head, LayerName::dense1,
                             LayerName::conv2, LayerName::conv1};
  for (LayerName n : order) {
    m.set_trainable(n, true);
    seq.push_back({m.describe(), m});
  }
  return seq;
}

std::string FreezeSweepResult::to_csv(const std::string& header_comment) const {
  std::string out;
  if (!header_comment.empty()) out += "# " + header_comment + "\n";
  out += "trainable_layers,mean_val_accuracy,best";
  std::size_t k = curve.empty() ? 0 : curve.front().fold_accuracies.size();
  for (std::size_t f = 0; f < k; ++f) out += ",fold" + std::to_string(f);
  out += "\n";
  char buf[64];
  for (std::size_t i = 0; i < curve.size(); ++i) {
    out += csv_escape(curve[i].label) + ",";
    std::snprintf(buf, sizeof(buf), "%.17g,", curve[i].mean_accuracy);
    out += buf;
    out += (static_cast<int>(i) == best_index ? "1" : "0");
    for (double a : curve[i].fold_accuracies) {
      std::snprintf(buf, sizeof(buf), ",%.17g", a);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

FreezeSweepResult freezing_sweep(const ModelParams& pretrained,
                                 const std::vector<FreezeState>& boundaries,
                                 const TrainConfig& config, const Dataset& dataset,
                                 const FoldAssignment& folds, int parallelism) {
  if (boundaries.empty()) throw ConfigError("freezing_sweep: empty boundary list");

  std::vector<SweepValue> values;
  for (const auto& b : boundaries) {
    FreezeMask mask = b.mask;
    values.push_back({b.label, [mask](TrainConfig& c) { c.freeze = mask; }});
  }
  SweepResult sweep = sweep_parameter("freeze", values, config, pretrained,
                                      dataset, folds, parallelism);

  FreezeSweepResult result;
  for (std::size_t i = 0; i < boundaries.size(); ++i) {
    FreezeCurvePoint p;
    p.label = boundaries[i].label;
    p.mask = boundaries[i].mask;
    p.fold_accuracies = sweep.settings[i].fold_accuracies;
    p.mean_accuracy = sweep.settings[i].mean_accuracy;
    result.curve.push_back(std::move(p));
  }
  result.best_index = sweep.winner_index;
  return result;
}

std::vector<AugmentCandidate> default_augment_candidates() {
  std::vector<AugmentCandidate> c;
  auto spec = [] { return AugmentSpec{}; };

  c.push_back({"none", "benchmark", spec()});

  AugmentSpec h = spec();
  h.horizontal_flip = true;
  c.push_back({"flip", "flip(h)", h});
  AugmentSpec v = spec();
  v.vertical_flip = true;
  c.push_back({"flip", "flip(v)", v});
  AugmentSpec hv = spec();
  hv.horizontal_flip = hv.vertical_flip = true;
  c.push_back({"flip", "flip(h+v)", hv});

  for (double deg : {15.0, 40.0, 90.0, 180.0}) {
    AugmentSpec s = spec();
    s.rotation_range = deg;
    c.push_back({"rotation", "rotation(" + std::to_string(static_cast<int>(deg)) + ")", s});
  }
  for (double deg : {1.0, 10.0, 30.0, 60.0, 89.0}) {
    AugmentSpec s = spec();
    s.shear_range = deg;
    c.push_back({"shear", "shear(" + std::to_string(static_cast<int>(deg)) + ")", s});
  }
  for (double z : {0.25, 0.5, 1.0}) {
    AugmentSpec s = spec();
    s.zoom_range = z;
    c.push_back({"zoom", "zoom(" + std::to_string(static_cast<int>(z * 100)) + "%)", s});
  }
  for (double b : {0.1, 0.25, 0.5}) {
    AugmentSpec s = spec();
    s.brightness_range = b;
    c.push_back({"brightness", "brightness(" + std::to_string(static_cast<int>(b * 100)) + "%)", s});
  }
  return c;
}

std::string AugmentSelectResult::to_csv(const std::string& header_comment) const {
  std::string out;
  if (!header_comment.empty()) out += "# " + header_comment + "\n";
  out += "family,value,mean_val_accuracy,std_val_accuracy,delta_vs_benchmark,family_best,in_final_spec\n";
  char buf[96];
  for (const auto& e : evaluations) {
    bool best = std::find(family_best_labels.begin(), family_best_labels.end(),
                          e.label) != family_best_labels.end();
    bool chosen = std::find(chosen_families.begin(), chosen_families.end(),
                            e.family) != chosen_families.end();
    std::snprintf(buf, sizeof(buf), ",%.17g,%.17g,%.17g,%d,%d\n", e.mean_accuracy,
                  e.std_accuracy, e.mean_accuracy - benchmark_mean, best ? 1 : 0,
                  (best && chosen) ? 1 : 0);
    out += csv_escape(e.family) + "," + csv_escape(e.label) + buf;
  }
  return out;
}

AugmentSelectResult augmentation_select(const std::vector<AugmentCandidate>& candidates,
                                        const TrainConfig& config,
                                        const ModelParams& init_params,
                                        const Dataset& dataset,
                                        const FoldAssignment& folds,
                                        int parallelism) {
  auto benchmark_it =
      std::find_if(candidates.begin(), candidates.end(),
                   [](const AugmentCandidate& c) { return c.family == "none"; });
  if (benchmark_it == candidates.end() || benchmark_it->spec.enabled())
    throw ConfigError("augmentation_select: candidates must include the empty benchmark spec");

  const int k = folds.k;
  std::size_t total = candidates.size() * static_cast<std::size_t>(k);
  std::vector<FoldRun> runs = parallel_map<FoldRun>(
      total, parallelism, [&](std::size_t task) {
        std::size_t ci = task / static_cast<std::size_t>(k);
        int fold = static_cast<int>(task % static_cast<std::size_t>(k));
        TrainConfig cfg = config;
        cfg.augment = candidates[ci].spec;
        cfg.stream_key = config.stream_key + "/augment:" + candidates[ci].label +
                         "/fold:" + std::to_string(fold);
        return run_fold(cfg, init_params, dataset, folds, fold);
      });

  AugmentSelectResult result;
  for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
    AugmentEvaluation e;
    e.family = candidates[ci].family;
    e.label = candidates[ci].label;
    e.val_confusion = ConfusionMatrix(dataset.num_classes());
    std::vector<double> ok;
    for (int f = 0; f < k; ++f) {
      const FoldRun& r = runs[ci * static_cast<std::size_t>(k) + static_cast<std::size_t>(f)];
      e.fold_accuracies.push_back(r.accuracy);
      if (r.error.empty()) {
        ok.push_back(r.accuracy);
        e.val_confusion.merge(r.confusion);
      }
    }
    if (ok.empty())
      throw NumericError("augmentation_select: candidate '" + e.label +
                         "' failed on every fold");
    e.mean_accuracy = stats::mean(ok);
    e.std_accuracy = ok.size() >= 2 ? stats::sample_std(ok) : 0.0;
    result.evaluations.push_back(std::move(e));
  }

  const AugmentEvaluation* benchmark = nullptr;
  for (const auto& e : result.evaluations)
    if (e.family == "none") { benchmark = &e; break; }
  result.benchmark_mean = benchmark->mean_accuracy;

  // Family order = first appearance in the candidate list.
  std::vector<std::string> families;
  for (const auto& e : result.evaluations) {
    if (e.family == "none") continue;
    if (std::find(families.begin(), families.end(), e.family) == families.end())
      families.push_back(e.family);
  }

  for (const auto& fam : families) {
    const AugmentEvaluation* best = nullptr;
    const AugmentCandidate* best_cand = nullptr;
    for (std::size_t i = 0; i < result.evaluations.size(); ++i) {
      const auto& e = result.evaluations[i];
      if (e.family != fam) continue;
      if (!best || e.mean_accuracy > best->mean_accuracy) {
        best = &e;
        best_cand = &candidates[i];
      }
    }
    result.family_best_labels.push_back(best->label);
    if (best->mean_accuracy > result.benchmark_mean) {
      result.chosen_families.push_back(fam);
      // Union of winning families: each contributes its own fields.
      const AugmentSpec& s = best_cand->spec;
      result.chosen_spec.horizontal_flip |= s.horizontal_flip;
      result.chosen_spec.vertical_flip |= s.vertical_flip;
      result.chosen_spec.rotation_range =
          std::max(result.chosen_spec.rotation_range, s.rotation_range);
      result.chosen_spec.shear_range =
          std::max(result.chosen_spec.shear_range, s.shear_range);
      result.chosen_spec.zoom_range =
          std::max(result.chosen_spec.zoom_range, s.zoom_range);
      result.chosen_spec.brightness_range =
          std::max(result.chosen_spec.brightness_range, s.brightness_range);
    }
  }
  return result;
}

}  // namespace tbench
