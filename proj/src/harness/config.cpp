#include "tbench/harness/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "tbench/error.hpp"
#include "tbench/rng.hpp"

namespace tbench {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::set<std::string>& allowed,
                const std::string& context) {
  if (!j.is_object())
    throw ConfigError("config: expected an object at " + context);
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key()))
      throw ConfigError("config: unknown key '" + item.key() + "' in " + context);
  }
}

json synthetic_to_json(const SyntheticSpec& s) { return json::parse(s.to_json()); }

SyntheticSpec synthetic_from_json(const json& j, const std::string& ctx) {
  check_keys(j,
             {"per_class", "side", "noise_sigma", "channels", "hue_offset_deg",
              "hue_spread_deg", "pose_rotation_max", "pose_shear_max",
              "random_hflip"},
             ctx);
  return SyntheticSpec::from_json(j.dump());
}

json arch_to_json(const Architecture& a) {
  return json{{"input_side", a.input_side},
              {"input_channels", a.input_channels},
              {"conv1_channels", a.conv1_channels},
              {"conv2_channels", a.conv2_channels},
              {"dense1_units", a.dense1_units}};
}

Architecture arch_from_json(const json& j) {
  check_keys(j,
             {"input_side", "input_channels", "conv1_channels", "conv2_channels",
              "dense1_units"},
             "arch");
  Architecture a;
  a.input_side = j.at("input_side").get<int>();
  a.input_channels = j.at("input_channels").get<int>();
  a.conv1_channels = j.at("conv1_channels").get<int>();
  a.conv2_channels = j.at("conv2_channels").get<int>();
  a.dense1_units = j.at("dense1_units").get<int>();
  return a;
}

json train_to_json(const TrainConfig& t) {
  json j;
  j["batch_size"] = t.batch_size;
  j["learning_rate"] = t.learning_rate;
  j["optimizer"] = json::parse(optimizer_spec_to_json(t.optimizer));
  j["schedule"] = json::parse(schedule_spec_to_json(t.schedule));
  j["head"] = to_string(t.head);
  j["freeze"] = json::parse(freeze_mask_to_json(t.freeze));
  j["patience_epochs"] = t.patience_epochs;
  j["max_epochs"] = t.max_epochs;
  j["augment"] = json::parse(t.augment.to_json());
  return j;
}

void check_augment_keys(const json& j, const std::string& ctx) {
  check_keys(j,
             {"horizontal_flip", "vertical_flip", "rotation_range", "shear_range",
              "zoom_range", "brightness_range"},
             ctx);
}

TrainConfig train_from_json(const json& j) {
  check_keys(j,
             {"batch_size", "learning_rate", "optimizer", "schedule", "head",
              "freeze", "patience_epochs", "max_epochs", "augment"},
             "train");
  check_keys(j.at("optimizer"),
             {"kind", "momentum", "beta1", "beta2", "eps", "rho"}, "train.optimizer");
  check_keys(j.at("schedule"),
             {"kind", "gamma", "every_epochs", "lr_base", "lr_max", "step_size"},
             "train.schedule");
  check_keys(j.at("freeze"), {"conv1", "conv2", "dense1", "head"}, "train.freeze");
  check_augment_keys(j.at("augment"), "train.augment");
  TrainConfig t;
  t.batch_size = j.at("batch_size").get<int>();
  t.learning_rate = j.at("learning_rate").get<double>();
  t.optimizer = optimizer_spec_from_json(j.at("optimizer").dump());
  t.schedule = schedule_spec_from_json(j.at("schedule").dump());
  t.head = head_kind_from_string(j.at("head").get<std::string>());
  t.freeze = freeze_mask_from_json(j.at("freeze").dump());
  t.patience_epochs = j.at("patience_epochs").get<int>();
  t.max_epochs = j.at("max_epochs").get<int>();
  t.augment = AugmentSpec::from_json(j.at("augment").dump());
  t.validate();
  return t;
}

json augment_candidates_to_json(const std::vector<AugmentCandidate>& cands) {
  json arr = json::array();
  for (const auto& c : cands)
    arr.push_back({{"family", c.family},
                   {"label", c.label},
                   {"spec", json::parse(c.spec.to_json())}});
  return arr;
}

std::vector<AugmentCandidate> augment_candidates_from_json(const json& j) {
  if (j.is_string() && j.get<std::string>() == "default")
    return default_augment_candidates();
  std::vector<AugmentCandidate> out;
  for (const auto& e : j) {
    check_keys(e, {"family", "label", "spec"}, "augment_candidates[]");
    check_augment_keys(e.at("spec"), "augment_candidates[].spec");
    AugmentCandidate c;
    c.family = e.at("family").get<std::string>();
    c.label = e.at("label").get<std::string>();
    c.spec = AugmentSpec::from_json(e.at("spec").dump());
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace

void CampaignConfig::validate() const {
  if (version != 1) throw ConfigError("config: unsupported version");
  if (dataset_path.empty()) {
    if (synthetic.per_class < 1) throw ConfigError("config: synthetic.per_class must be >= 1");
  }
  arch.validate();
  if (!(holdout_ratio > 0.0 && holdout_ratio < 1.0))
    throw ConfigError("config: holdout_ratio must be in (0,1)");
  if (k < 2) throw ConfigError("config: k must be >= 2");
  if (candidate_ratios.size() < 2)
    throw ConfigError("config: need >= 2 candidate ratios");
  for (double r : candidate_ratios)
    if (!(r > 0.0 && r < 1.0))
      throw ConfigError("config: candidate ratios must be in (0,1)");
  if (sem_tau <= 0.0) throw ConfigError("config: sem_tau must be > 0");
  if (n_min < 3) throw ConfigError("config: n_min must be >= 3");
  if (n_max < n_min) throw ConfigError("config: n_max must be >= n_min");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("config: alpha must be in (0,1)");
  train.validate();
  if (schedule_grid.empty() || optimizer_grid.empty() || head_grid.empty() ||
      patience_grid.empty() || batch_grid.empty())
    throw ConfigError("config: sweep grids must be non-empty");
  if (!(lr_find_min > 0.0 && lr_find_min < lr_find_max))
    throw ConfigError("config: lr finder bounds invalid");
  if (lr_find_steps < 10) throw ConfigError("config: lr_find_steps must be >= 10");
  bool has_benchmark = false;
  for (const auto& c : augment_candidates)
    if (c.family == "none" && !c.spec.enabled()) has_benchmark = true;
  if (!has_benchmark)
    throw ConfigError("config: augment_candidates must include the empty benchmark spec");
  if (parallelism < 1) throw ConfigError("config: parallelism must be >= 1");
}

std::string CampaignConfig::to_json() const {
  json j;
  j["version"] = version;

  json ds;
  if (dataset_path.empty()) {
    ds["kind"] = "synthetic";
    ds["synthetic"] = synthetic_to_json(synthetic);
  } else {
    ds["kind"] = "path";
    ds["path"] = dataset_path;
  }
  ds["source_synthetic"] = synthetic_to_json(source_synthetic);
  ds["pretrain"] = pretrain;
  j["dataset"] = ds;

  j["arch"] = arch_to_json(arch);

  j["splitting"] = {{"holdout_ratio", holdout_ratio},
                    {"holdout_strategy", to_string(holdout_strategy)},
                    {"kfold_strategy", to_string(kfold_strategy)},
                    {"k", k},
                    {"k_candidates", k_candidates},
                    {"select_k", select_k},
                    {"select_strategy", select_strategy}};

  j["ratio_selection"] = {{"candidate_ratios", candidate_ratios},
                          {"sem_tau", sem_tau},
                          {"n_min", n_min},
                          {"n_max", n_max},
                          {"alpha", alpha}};

  j["train"] = train_to_json(train);

  json sweeps;
  json sch = json::array();
  for (const auto& [label, spec] : schedule_grid)
    sch.push_back({{"label", label}, {"spec", json::parse(schedule_spec_to_json(spec))}});
  sweeps["schedules"] = sch;
  json opt = json::array();
  for (const auto& [label, spec] : optimizer_grid)
    opt.push_back({{"label", label}, {"spec", json::parse(optimizer_spec_to_json(spec))}});
  sweeps["optimizers"] = opt;
  sweeps["patience"] = patience_grid;
  json heads = json::array();
  for (const auto& [label, kind] : head_grid) {
    (void)label;
    heads.push_back(to_string(kind));
  }
  sweeps["heads"] = heads;
  sweeps["batch_sizes"] = batch_grid;
  sweeps["lr_finder"] = {{"lr_min", lr_find_min},
                         {"lr_max", lr_find_max},
                         {"n_steps", lr_find_steps}};
  j["sweeps"] = sweeps;

  j["augment_candidates"] = augment_candidates_to_json(augment_candidates);
  j["seed"] = master_seed;
  j["parallelism"] = parallelism;
  j["out_dir"] = out_dir;
  return j.dump(1);
}

namespace {

CampaignConfig parse_config(const json& j) {
  check_keys(j,
             {"version", "dataset", "arch", "splitting", "ratio_selection",
              "train", "sweeps", "augment_candidates", "seed", "parallelism",
              "out_dir"},
             "config");

  CampaignConfig c;
  c.version = j.at("version").get<int>();
  if (c.version != 1)
    throw ConfigError("config: unsupported version " + std::to_string(c.version));

  const json& ds = j.at("dataset");
  check_keys(ds, {"kind", "path", "synthetic", "source_synthetic", "pretrain"},
             "dataset");
  std::string kind = ds.at("kind").get<std::string>();
  if (kind == "path") {
    c.dataset_path = ds.at("path").get<std::string>();
  } else if (kind == "synthetic") {
    c.dataset_path.clear();
    c.synthetic = synthetic_from_json(ds.at("synthetic"), "dataset.synthetic");
  } else {
    throw ConfigError("config: dataset.kind must be 'synthetic' or 'path'");
  }
  c.source_synthetic =
      synthetic_from_json(ds.at("source_synthetic"), "dataset.source_synthetic");
  c.pretrain = ds.at("pretrain").get<bool>();

  c.arch = arch_from_json(j.at("arch"));

  const json& sp = j.at("splitting");
  check_keys(sp,
             {"holdout_ratio", "holdout_strategy", "kfold_strategy", "k",
              "k_candidates", "select_k", "select_strategy"},
             "splitting");
  c.holdout_ratio = sp.at("holdout_ratio").get<double>();
  c.holdout_strategy =
      sampling_strategy_from_string(sp.at("holdout_strategy").get<std::string>());
  c.kfold_strategy =
      sampling_strategy_from_string(sp.at("kfold_strategy").get<std::string>());
  c.k = sp.at("k").get<int>();
  c.k_candidates = sp.at("k_candidates").get<std::vector<int>>();
  c.select_k = sp.at("select_k").get<bool>();
  c.select_strategy = sp.at("select_strategy").get<bool>();

  const json& rs = j.at("ratio_selection");
  check_keys(rs, {"candidate_ratios", "sem_tau", "n_min", "n_max", "alpha"},
             "ratio_selection");
  c.candidate_ratios = rs.at("candidate_ratios").get<std::vector<double>>();
  c.sem_tau = rs.at("sem_tau").get<double>();
  c.n_min = rs.at("n_min").get<int>();
  c.n_max = rs.at("n_max").get<int>();
  c.alpha = rs.at("alpha").get<double>();

  c.train = train_from_json(j.at("train"));

  const json& sw = j.at("sweeps");
  check_keys(sw,
             {"schedules", "optimizers", "patience", "heads", "batch_sizes",
              "lr_finder"},
             "sweeps");
  c.schedule_grid.clear();
  for (const auto& e : sw.at("schedules")) {
    check_keys(e, {"label", "spec"}, "sweeps.schedules[]");
    c.schedule_grid.emplace_back(e.at("label").get<std::string>(),
                                 schedule_spec_from_json(e.at("spec").dump()));
  }
  c.optimizer_grid.clear();
  for (const auto& e : sw.at("optimizers")) {
    check_keys(e, {"label", "spec"}, "sweeps.optimizers[]");
    c.optimizer_grid.emplace_back(e.at("label").get<std::string>(),
                                  optimizer_spec_from_json(e.at("spec").dump()));
  }
  c.patience_grid = sw.at("patience").get<std::vector<int>>();
  c.head_grid.clear();
  for (const auto& e : sw.at("heads")) {
    HeadKind kind = head_kind_from_string(e.get<std::string>());
    c.head_grid.emplace_back(to_string(kind), kind);
  }
  c.batch_grid = sw.at("batch_sizes").get<std::vector<int>>();
  const json& lf = sw.at("lr_finder");
  check_keys(lf, {"lr_min", "lr_max", "n_steps"}, "sweeps.lr_finder");
  c.lr_find_min = lf.at("lr_min").get<double>();
  c.lr_find_max = lf.at("lr_max").get<double>();
  c.lr_find_steps = lf.at("n_steps").get<int>();

  c.augment_candidates = augment_candidates_from_json(j.at("augment_candidates"));
  c.master_seed = j.at("seed").get<std::uint64_t>();
  c.parallelism = j.at("parallelism").get<int>();
  c.out_dir = j.at("out_dir").get<std::string>();

  c.validate();
  return c;
}

}  // namespace

CampaignConfig CampaignConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: JSON parse error: ") + e.what());
  }
  try {
    return parse_config(j);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: schema violation: ") + e.what());
  }
}

CampaignConfig CampaignConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

std::string CampaignConfig::config_hash() const {
  json j = json::parse(to_json());
  j.erase("out_dir");
  j.erase("parallelism");
  std::uint64_t h = fnv1a64(j.dump());
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

CampaignConfig CampaignConfig::preset(const std::string& name) {
  CampaignConfig c;

  // Shared grids: the tested scheduler/optimizer/classifier/batch options.
  c.schedule_grid = {
      {"constant", ScheduleSpec{}},
      {"step_decay", [] {
         ScheduleSpec s;
         s.kind = ScheduleSpec::Kind::step_decay;
         s.gamma = 0.5;
         s.every_epochs = 5;
         return s;
       }()},
      {"cyclic", [] {
         ScheduleSpec s;
         s.kind = ScheduleSpec::Kind::cyclic_triangular;
         s.lr_base = 3e-4;
         s.lr_max = 3e-3;
         s.step_size = 20;
         return s;
       }()}};
  c.optimizer_grid = {
      {"adam", OptimizerSpec{}},
      {"sgd", [] {
         OptimizerSpec o;
         o.kind = OptimizerSpec::Kind::sgd;
         o.momentum = 0.9;
         return o;
       }()},
      {"adadelta", [] {
         OptimizerSpec o;
         o.kind = OptimizerSpec::Kind::adadelta;
         return o;
       }()}};
  c.head_grid = {{"softmax_cross_entropy", HeadKind::softmax_cross_entropy},
                 {"linear_svm_hinge", HeadKind::linear_svm_hinge}};
  c.batch_grid = {8, 16, 32};
  c.augment_candidates = default_augment_candidates();

  if (name == "desk") {
    c.synthetic.per_class = 24;
    c.synthetic.side = 32;
    c.synthetic.noise_sigma = 0.05;
    c.synthetic.hue_spread_deg = 10.0;       // color is a weak cue; shape decides
    c.synthetic.pose_rotation_max = 180.0;   // geometric augmentation matters
    c.synthetic.pose_shear_max = 25.0;
    c.source_synthetic = c.synthetic;
    c.source_synthetic.hue_offset_deg = 180.0;  // same shapes, different palette
    c.pretrain = true;

    c.holdout_ratio = 0.20;  // 24 test images give usable resolution at desk scale
    c.k = 5;
    c.n_min = 5;
    c.n_max = 8;

    c.train.batch_size = 16;
    c.train.learning_rate = 2e-3;
    c.train.patience_epochs = 6;
    c.train.max_epochs = 30;
    c.patience_grid = {4, 6, 8};
    c.lr_find_min = 1e-5;
    c.lr_find_max = 0.02;  // toy-scale stability ceiling: /10 rule lands ~2e-3
    c.lr_find_steps = 50;
    return c;
  }

  if (name == "table1") {
    // The final production settings: 10-fold CV, simple random sampling,
    // constant lr 2e-5, Adam, 100-epoch patience, cross-entropy softmax,
    // batch 16, frozen base conv layer, flips + rotation 180 + shear 89 +
    // zoom 100% augmentation.
    c.synthetic.per_class = 40;
    c.synthetic.side = 32;
    c.synthetic.noise_sigma = 0.03;
    c.synthetic.hue_spread_deg = 60.0;
    c.synthetic.pose_rotation_max = 180.0;
    c.synthetic.pose_shear_max = 10.0;
    c.source_synthetic = c.synthetic;
    c.source_synthetic.hue_offset_deg = 180.0;
    c.pretrain = true;

    c.k = 10;
    c.holdout_ratio = 0.10;
    c.holdout_strategy = SamplingStrategy::simple_random;
    c.kfold_strategy = SamplingStrategy::simple_random;

    c.train.batch_size = 16;
    c.train.learning_rate = 2e-5;
    c.train.optimizer = OptimizerSpec{};  // adam
    c.train.schedule = ScheduleSpec{};    // constant
    c.train.head = HeadKind::softmax_cross_entropy;
    c.train.freeze = FreezeMask::all_trainable();
    c.train.freeze.set_trainable(LayerName::conv1, false);  // base conv frozen
    c.train.patience_epochs = 100;
    c.train.max_epochs = 1000;
    c.train.augment.horizontal_flip = true;
    c.train.augment.vertical_flip = true;
    c.train.augment.rotation_range = 180.0;
    c.train.augment.shear_range = 89.0;
    c.train.augment.zoom_range = 1.0;

    c.patience_grid = {50, 100, 150};
    c.lr_find_min = 1e-7;
    c.lr_find_max = 0.1;
    c.lr_find_steps = 60;
    return c;
  }

  throw ConfigError("unknown preset: " + name + " (available: desk, table1)");
}

}  // namespace tbench
