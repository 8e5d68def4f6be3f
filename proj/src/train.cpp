#include "tbench/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <span>

#include <json.hpp>

#include "tbench/error.hpp"
#include "tbench/split.hpp"

namespace tbench {

namespace {

using nlohmann::json;

json optimizer_to_json(const OptimizerSpec& o) {
  json j;
  switch (o.kind) {
    case OptimizerSpec::Kind::sgd:
      j["kind"] = "sgd";
      j["momentum"] = o.momentum;
      break;
    case OptimizerSpec::Kind::adam:
      j["kind"] = "adam";
      j["beta1"] = o.beta1;
      j["beta2"] = o.beta2;
      j["eps"] = o.eps;
      break;
    case OptimizerSpec::Kind::adadelta:
      j["kind"] = "adadelta";
      j["rho"] = o.rho;
      j["eps"] = o.ada_eps;
      break;
  }
  return j;
}

OptimizerSpec optimizer_from_json(const json& j) {
  OptimizerSpec o;
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "sgd") {
    o.kind = OptimizerSpec::Kind::sgd;
    if (j.contains("momentum")) o.momentum = j.at("momentum").get<double>();
  } else if (kind == "adam") {
    o.kind = OptimizerSpec::Kind::adam;
    if (j.contains("beta1")) o.beta1 = j.at("beta1").get<double>();
    if (j.contains("beta2")) o.beta2 = j.at("beta2").get<double>();
    if (j.contains("eps")) o.eps = j.at("eps").get<double>();
  } else if (kind == "adadelta") {
    o.kind = OptimizerSpec::Kind::adadelta;
    if (j.contains("rho")) o.rho = j.at("rho").get<double>();
    if (j.contains("eps")) o.ada_eps = j.at("eps").get<double>();
  } else {
    throw ConfigError("unknown optimizer kind: " + kind);
  }
  o.validate();
  return o;
}

json schedule_to_json(const ScheduleSpec& s) {
  json j;
  switch (s.kind) {
    case ScheduleSpec::Kind::constant:
      j["kind"] = "constant";
      break;
    case ScheduleSpec::Kind::step_decay:
      j["kind"] = "step_decay";
      j["gamma"] = s.gamma;
      j["every_epochs"] = s.every_epochs;
      break;
    case ScheduleSpec::Kind::cyclic_triangular:
      j["kind"] = "cyclic_triangular";
      j["lr_base"] = s.lr_base;
      j["lr_max"] = s.lr_max;
      j["step_size"] = s.step_size;
      break;
  }
  return j;
}

ScheduleSpec schedule_from_json(const json& j) {
  ScheduleSpec s;
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "constant") {
    s.kind = ScheduleSpec::Kind::constant;
  } else if (kind == "step_decay") {
    s.kind = ScheduleSpec::Kind::step_decay;
    s.gamma = j.at("gamma").get<double>();
    s.every_epochs = j.at("every_epochs").get<int>();
  } else if (kind == "cyclic_triangular") {
    s.kind = ScheduleSpec::Kind::cyclic_triangular;
    s.lr_base = j.at("lr_base").get<double>();
    s.lr_max = j.at("lr_max").get<double>();
    s.step_size = j.at("step_size").get<int>();
  } else {
    throw ConfigError("unknown schedule kind: " + kind);
  }
  s.validate();
  return s;
}

json freeze_to_json(const FreezeMask& m) {
  json j;
  for (LayerName n : kLayerOrder) j[to_string(n)] = m.trainable(n);
  return j;
}

FreezeMask freeze_from_json(const json& j) {
  FreezeMask m;
  for (LayerName n : kLayerOrder)
    m.set_trainable(n, j.at(to_string(n)).get<bool>());
  return m;
}

}  // namespace

std::string optimizer_spec_to_json(const OptimizerSpec& spec) {
  return optimizer_to_json(spec).dump();
}
OptimizerSpec optimizer_spec_from_json(const std::string& text) {
  return optimizer_from_json(json::parse(text));
}
std::string schedule_spec_to_json(const ScheduleSpec& spec) {
  return schedule_to_json(spec).dump();
}
ScheduleSpec schedule_spec_from_json(const std::string& text) {
  return schedule_from_json(json::parse(text));
}
std::string freeze_mask_to_json(const FreezeMask& mask) {
  return freeze_to_json(mask).dump();
}
FreezeMask freeze_mask_from_json(const std::string& text) {
  return freeze_from_json(json::parse(text));
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  if (learning_rate <= 0.0) throw ConfigError("train: learning_rate must be > 0");
  if (patience_epochs < 1) throw ConfigError("train: patience_epochs must be >= 1");
  if (max_epochs < 1) throw ConfigError("train: max_epochs must be >= 1");
  optimizer.validate();
  schedule.validate();
  augment.validate();
}

std::string TrainConfig::to_json() const {
  json j;
  j["batch_size"] = batch_size;
  j["learning_rate"] = learning_rate;
  j["optimizer"] = optimizer_to_json(optimizer);
  j["schedule"] = schedule_to_json(schedule);
  j["head"] = to_string(head);
  j["freeze"] = freeze_to_json(freeze);
  j["patience_epochs"] = patience_epochs;
  j["max_epochs"] = max_epochs;
  j["augment"] = json::parse(augment.to_json());
  j["master_seed"] = master_seed;
  j["stream_key"] = stream_key;
  return j.dump();
}

TrainConfig TrainConfig::from_json(const std::string& text) {
  json j = json::parse(text);
  TrainConfig c;
  c.batch_size = j.at("batch_size").get<int>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.optimizer = optimizer_from_json(j.at("optimizer"));
  c.schedule = schedule_from_json(j.at("schedule"));
  c.head = head_kind_from_string(j.at("head").get<std::string>());
  c.freeze = freeze_from_json(j.at("freeze"));
  c.patience_epochs = j.at("patience_epochs").get<int>();
  c.max_epochs = j.at("max_epochs").get<int>();
  c.augment = AugmentSpec::from_json(j.at("augment").dump());
  c.master_seed = j.at("master_seed").get<std::uint64_t>();
  c.stream_key = j.at("stream_key").get<std::string>();
  c.validate();
  return c;
}

TrainResult train_loop(const ModelParams& initial, const DatasetView& train_view,
                       const DatasetView& val_view, const TrainConfig& config) {
  config.validate();
  if (train_view.size() == 0 || val_view.size() == 0)
    throw ShapeError("train_loop: empty train or validation view");
  if (static_cast<std::size_t>(config.batch_size) > train_view.size())
    throw ConfigError("train_loop: batch_size exceeds train set size");

  RngStream run_rng(config.master_seed, config.stream_key);
  RngStream shuffle_rng = run_rng.child("shuffle");
  RngStream augment_rng = run_rng.child("augment");
  const bool augmenting = config.augment.enabled();

  ModelParams current = initial;
  OptimizerState opt_state;
  TrainResult result;
  result.best_val_accuracy = -1.0;

  std::vector<std::size_t> order(train_view.indices);
  long global_step = 0;

  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    shuffle(order, shuffle_rng);
    double loss_sum = 0.0;
    int batches = 0;
    double epoch_first_lr = 0.0;

    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      std::size_t end = std::min(order.size(),
                                 start + static_cast<std::size_t>(config.batch_size));
      std::span<const std::size_t> batch_indices(order.data() + start, end - start);

      std::vector<Image> augmented;
      Batch batch;
      if (augmenting) {
        augmented = augment_batch(*train_view.dataset, batch_indices,
                                  config.augment, augment_rng);
        for (const Image& img : augmented) batch.images.push_back(&img);
      } else {
        for (std::size_t idx : batch_indices)
          batch.images.push_back(&train_view.dataset->samples[idx].image);
      }
      for (std::size_t idx : batch_indices)
        batch.labels.push_back(train_view.dataset->samples[idx].label);

      ForwardCache cache = forward_cached(current, batch);
      HeadLoss hl;
      try {
        hl = head_loss(config.head, cache.logits, batch.labels,
                       current.arch.num_classes);
      } catch (const NumericError& e) {
        throw NumericError(std::string(e.what()) + " (epoch " +
                           std::to_string(epoch) + ", step " +
                           std::to_string(global_step) + ")");
      }
      Gradients grads = backward(current, cache, hl.dlogits);
      apply_freeze(grads, config.freeze);

      double lr = lr_at(config.schedule, config.learning_rate, epoch, global_step);
      if (batches == 0) epoch_first_lr = lr;
      optimizer_step(opt_state, current, grads, lr, config.optimizer);

      loss_sum += hl.loss;
      ++batches;
      ++global_step;
    }

    double val_acc = evaluate(current, val_view).accuracy;
    result.history.push_back(EpochRecord{epoch, loss_sum / batches, val_acc,
                                         epoch_first_lr});

    // Strictly-higher rule: a tie does not reset patience.
    if (val_acc > result.best_val_accuracy) {
      result.best_val_accuracy = val_acc;
      result.best_epoch = epoch;
      result.best_params = current;
    }
    if (epoch - result.best_epoch >= config.patience_epochs) break;
  }
  return result;
}

std::string history_to_csv(const std::vector<EpochRecord>& history,
                           const std::string& header_comment) {
  std::string out;
  if (!header_comment.empty()) out += "# " + header_comment + "\n";
  out += "epoch,train_loss,val_accuracy,lr\n";
  char buf[128];
  for (const auto& r : history) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g\n", r.epoch,
                  r.train_loss, r.val_accuracy, r.lr);
    out += buf;
  }
  return out;
}

LrFinderResult lr_finder_core(const std::function<double(double)>& step_with_lr,
                              double lr_min, double lr_max, int n_steps) {
  if (!(lr_min < lr_max))
    throw ConfigError("lr_finder: lr_min must be < lr_max");
  if (lr_min <= 0.0) throw ConfigError("lr_finder: lr_min must be > 0");
  if (n_steps < 10) throw ConfigError("lr_finder: n_steps must be >= 10");

  constexpr double kEmaBeta = 0.98;
  constexpr double kDivergenceFactor = 4.0;

  LrFinderResult result;
  double ema = 0.0;
  double best_smoothed = std::numeric_limits<double>::infinity();
  double best_lr = lr_min;

  for (int i = 0; i < n_steps; ++i) {
    double t = static_cast<double>(i) / static_cast<double>(n_steps - 1);
    double lr = lr_min * std::pow(lr_max / lr_min, t);
    double loss = step_with_lr(lr);
    if (!std::isfinite(loss)) {
      if (i == 0)
        throw NumericError("lr_finder: immediate divergence at lr=" +
                           std::to_string(lr));
      break;
    }
    ema = kEmaBeta * ema + (1.0 - kEmaBeta) * loss;
    double smoothed = ema / (1.0 - std::pow(kEmaBeta, static_cast<double>(i + 1)));
    result.curve.push_back(LrCurvePoint{lr, loss, smoothed});

    if (smoothed < best_smoothed) {
      best_smoothed = smoothed;
      best_lr = lr;
    }
    if (smoothed > kDivergenceFactor * best_smoothed) break;
  }
  if (result.curve.empty())
    throw NumericError("lr_finder: no usable steps recorded");
  result.suggested_lr = best_lr / 10.0;
  return result;
}

LrFinderResult lr_finder(const ModelParams& initial, const DatasetView& train_view,
                         const TrainConfig& config, double lr_min, double lr_max,
                         int n_steps) {
  config.validate();
  if (train_view.size() == 0) throw ShapeError("lr_finder: empty train view");

  RngStream rng(config.master_seed, config.stream_key + "/lr_finder");
  std::vector<std::size_t> order(train_view.indices);
  shuffle(order, rng);

  ModelParams scratch = initial;
  OptimizerState opt_state;
  std::size_t cursor = 0;

  auto step = [&](double lr) -> double {
    Batch batch;
    for (int i = 0; i < config.batch_size; ++i) {
      std::size_t idx = order[cursor];
      cursor = (cursor + 1) % order.size();
      batch.images.push_back(&train_view.dataset->samples[idx].image);
      batch.labels.push_back(train_view.dataset->samples[idx].label);
    }
    ForwardCache cache = forward_cached(scratch, batch);
    HeadLoss hl = head_loss(config.head, cache.logits, batch.labels,
                            scratch.arch.num_classes);
    Gradients grads = backward(scratch, cache, hl.dlogits);
    apply_freeze(grads, config.freeze);
    optimizer_step(opt_state, scratch, grads, lr, config.optimizer);
    return hl.loss;
  };
  return lr_finder_core(step, lr_min, lr_max, n_steps);
}

int suggest_patience(const std::vector<EpochRecord>& history) {
  if (history.empty()) throw ConfigError("suggest_patience: empty history");
  int last_improvement = 0;
  double best = -1.0;
  int max_gap = 1;
  for (const auto& r : history) {
    if (r.val_accuracy > best) {
      max_gap = std::max(max_gap, r.epoch - last_improvement);
      best = r.val_accuracy;
      last_improvement = r.epoch;
    }
  }
  return max_gap;
}

ModelParams pretrain_source(const ModelParams& initial, const Dataset& source,
                            const TrainConfig& config, int target_classes) {
  if (initial.arch.num_classes != source.num_classes())
    throw ShapeError("pretrain_source: head width must match source classes");

  RngStream rng(config.master_seed, config.stream_key + "/pretrain");
  RngStream split_rng = rng.child("split");
  SplitPlan plan = holdout_split(source, 0.15,
                                 SamplingStrategy::stratified_random, split_rng);

  DatasetView train_view{&source, plan.rest_indices};
  DatasetView val_view{&source, plan.test_indices};

  TrainConfig cfg = config;
  cfg.stream_key = config.stream_key + "/pretrain/loop";
  TrainResult r = train_loop(initial, train_view, val_view, cfg);

  RngStream head_rng = rng.child("head");
  return reinit_head(r.best_params, target_classes, head_rng);
}

}  // namespace tbench
