#include <doctest.h>

#include <json.hpp>

#include "tbench/error.hpp"
#include "tbench/harness/config.hpp"
#include "tbench/harness/ratio.hpp"

using namespace tbench;

TEST_CASE("presets validate and carry the published final settings") {
  CampaignConfig desk = CampaignConfig::preset("desk");
  desk.validate();
  CHECK(desk.k == 5);

  CampaignConfig t1 = CampaignConfig::preset("table1");
  t1.validate();
  CHECK(t1.train.learning_rate == doctest::Approx(2e-5));
  CHECK(t1.train.batch_size == 16);
  CHECK(t1.train.patience_epochs == 100);
  CHECK(t1.train.optimizer.kind == OptimizerSpec::Kind::adam);
  CHECK(t1.train.schedule.kind == ScheduleSpec::Kind::constant);
  CHECK(t1.train.head == HeadKind::softmax_cross_entropy);
  CHECK(t1.k == 10);
  CHECK(t1.holdout_ratio == doctest::Approx(0.10));
  CHECK(t1.holdout_strategy == SamplingStrategy::simple_random);
  CHECK_FALSE(t1.train.freeze.trainable(LayerName::conv1));
  CHECK(t1.train.freeze.trainable(LayerName::head));
  CHECK(t1.train.augment.horizontal_flip);
  CHECK(t1.train.augment.vertical_flip);
  CHECK(t1.train.augment.rotation_range == 180.0);
  CHECK(t1.train.augment.shear_range == 89.0);
  CHECK(t1.train.augment.zoom_range == 1.0);
  CHECK(t1.train.augment.brightness_range == 0.0);

  CHECK_THROWS_AS(CampaignConfig::preset("nope"), ConfigError);
}

TEST_CASE("config round-trips through JSON to an identical structure") {
  CampaignConfig c = CampaignConfig::preset("desk");
  std::string once = c.to_json();
  CampaignConfig back = CampaignConfig::from_json(once);
  std::string twice = back.to_json();
  CHECK(once == twice);
  CHECK(back.config_hash() == c.config_hash());
}

TEST_CASE("unknown keys are rejected at every level") {
  CampaignConfig c = CampaignConfig::preset("desk");
  auto j = nlohmann::json::parse(c.to_json());
  j["surprise"] = 1;
  CHECK_THROWS_WITH_AS(CampaignConfig::from_json(j.dump()),
                       doctest::Contains("surprise"), ConfigError);

  auto j2 = nlohmann::json::parse(c.to_json());
  j2["splitting"]["typo_key"] = true;
  CHECK_THROWS_AS(CampaignConfig::from_json(j2.dump()), ConfigError);

  auto j3 = nlohmann::json::parse(c.to_json());
  j3["train"]["augment"]["extra"] = 2;
  CHECK_THROWS_AS(CampaignConfig::from_json(j3.dump()), ConfigError);
}

TEST_CASE("config hash tracks identity, not execution details") {
  CampaignConfig a = CampaignConfig::preset("desk");
  CampaignConfig b = a;
  b.out_dir = "elsewhere";
  b.parallelism = 16;
  CHECK(a.config_hash() == b.config_hash());

  CampaignConfig c = a;
  c.master_seed = 43;
  CHECK(a.config_hash() != c.config_hash());

  CampaignConfig d = a;
  d.train.learning_rate = 1e-4;
  CHECK(a.config_hash() != d.config_hash());
}

TEST_CASE("malformed config JSON raises ConfigError with context") {
  CHECK_THROWS_AS(CampaignConfig::from_json("{not json"), ConfigError);
  CHECK_THROWS_AS(CampaignConfig::from_json("{\"version\": 2}"), ConfigError);
}

TEST_CASE("ratio decision serializes with the full trail") {
  RatioDecision d;
  d.branch = DecisionBranch::parametric;
  d.omnibus_significant = true;
  d.candidate_labels = {"10%", "15%"};
  d.selected_label = "10%";
  d.selected_ratio = 0.10;
  d.trail.push_back({"normality", "10%",
                     stats::make_result("shapiro_wilk", 0.97, 0.53, 0.05)});
  auto j = nlohmann::json::parse(d.to_json());
  CHECK(j.at("branch") == "parametric");
  CHECK(j.at("selected_label") == "10%");
  CHECK(j.at("trail").size() == 1);
  CHECK(j.at("trail")[0].at("result").at("p_value") == doctest::Approx(0.53));
}
