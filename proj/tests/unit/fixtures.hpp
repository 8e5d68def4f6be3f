#pragma once

#include <fstream>
#include <sstream>

#include <json.hpp>

// Frozen reference values generated from an independent statistics package
// (see tests/fixtures/make_fixtures.py).
inline const nlohmann::json& stats_fixtures() {
  static nlohmann::json fixtures = [] {
    std::ifstream in(std::string(TBENCH_FIXTURE_DIR) + "/stats_fixtures.json");
    if (!in) throw std::runtime_error("missing stats_fixtures.json");
    nlohmann::json j;
    in >> j;
    return j;
  }();
  return fixtures;
}
