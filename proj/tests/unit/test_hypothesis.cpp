#include <doctest.h>

#include <cmath>
#include <vector>

#include "fixtures.hpp"
#include "tbench/error.hpp"
#include "tbench/rng.hpp"
#include "tbench/stats/tests.hpp"

using namespace tbench;
using namespace tbench::stats;

namespace {

SampleGroup group(const std::string& label, std::vector<double> v) {
  return SampleGroup{label, std::move(v)};
}

std::vector<SampleGroup> groups_from_fixture(const nlohmann::json& f) {
  std::vector<SampleGroup> gs;
  int i = 0;
  for (const auto& g : f.at("groups"))
    gs.push_back(group("g" + std::to_string(i++), g.get<std::vector<double>>()));
  return gs;
}

}  // namespace

TEST_CASE("shapiro-wilk matches the reference oracle on every fixture") {
  for (const auto& f : stats_fixtures().at("shapiro_wilk")) {
    auto g = group("x", f.at("values").get<std::vector<double>>());
    TestResult r = shapiro_wilk(g);
    CHECK(std::abs(r.statistic - f.at("W").get<double>()) <= 1e-3);
    CHECK(std::abs(r.p_value - f.at("p").get<double>()) <= 1e-3);
  }
}

TEST_CASE("shapiro-wilk calibration: accepts normal, rejects lognormal") {
  int normal_pass = 0, lognormal_reject = 0;
  for (int seed = 0; seed < 100; ++seed) {
    RngStream rng(static_cast<std::uint64_t>(seed), "sw");
    std::vector<double> nv(50), lv(50);
    for (double& x : nv) x = rng.normal();
    for (double& x : lv) x = std::exp(rng.normal());
    if (shapiro_wilk(group("n", nv)).p_value > 0.05) ++normal_pass;
    if (shapiro_wilk(group("l", lv)).p_value < 0.05) ++lognormal_reject;
  }
  CHECK(normal_pass >= 90);
  CHECK(lognormal_reject >= 90);
}

TEST_CASE("shapiro-wilk preconditions") {
  CHECK_THROWS_AS(shapiro_wilk(group("s", {1.0, 2.0})), DegenerateSampleError);
  CHECK_THROWS_AS(shapiro_wilk(group("c", {1.0, 1.0, 1.0, 1.0})),
                  DegenerateSampleError);
}

TEST_CASE("levene matches the reference oracle") {
  for (const auto& f : stats_fixtures().at("levene")) {
    auto gs = groups_from_fixture(f);
    TestResult r = levene(gs);
    CHECK(std::abs(r.statistic - f.at("W").get<double>()) <= 1e-6);
    CHECK(std::abs(r.p_value - f.at("p").get<double>()) <= 1e-6);
  }
}

TEST_CASE("levene on shifted copies accepts homogeneity exactly") {
  std::vector<SampleGroup> gs{group("a", {0.1, 0.2, 0.3, 0.45}),
                              group("b", {1.1, 1.2, 1.3, 1.45})};
  TestResult r = levene(gs);
  CHECK(r.statistic == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r.p_value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_FALSE(r.reject_null);
}

TEST_CASE("levene detects a 9x variance ratio") {
  int rejects = 0;
  for (int seed = 0; seed < 100; ++seed) {
    RngStream rng(static_cast<std::uint64_t>(seed), "lv");
    std::vector<double> a(50), b(50);
    for (double& x : a) x = rng.normal(0.0, 1.0);
    for (double& x : b) x = rng.normal(0.0, 3.0);
    if (levene(std::vector<SampleGroup>{group("a", a), group("b", b)}).reject_null)
      ++rejects;
  }
  CHECK(rejects >= 90);
}

TEST_CASE("anova matches the reference oracle") {
  for (const auto& f : stats_fixtures().at("anova")) {
    auto gs = groups_from_fixture(f);
    TestResult r = anova_oneway(gs);
    CHECK(std::abs(r.statistic - f.at("F").get<double>()) <= 1e-6);
    CHECK(std::abs(r.p_value - f.at("p").get<double>()) <= 1e-6);
  }
}

TEST_CASE("anova pinned fixture: {1,2,3},{2,3,4},{10,11,12}") {
  // Oracle-recomputed before freezing: F = 73 exactly with these values.
  std::vector<SampleGroup> gs{group("a", {1, 2, 3}), group("b", {2, 3, 4}),
                              group("c", {10, 11, 12})};
  TestResult r = anova_oneway(gs);
  CHECK(r.statistic == doctest::Approx(73.0).epsilon(1e-12));
  CHECK(r.p_value < 0.01);
}

TEST_CASE("anova of identical groups with internal variance gives F=0, p=1") {
  std::vector<SampleGroup> gs{group("a", {1, 2, 3}), group("b", {1, 2, 3})};
  TestResult r = anova_oneway(gs);
  CHECK(r.statistic == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r.p_value == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("anova degenerate zero-variance input is a hard error") {
  std::vector<SampleGroup> gs{group("a", {1, 1, 1}), group("b", {2, 2, 2})};
  CHECK_THROWS_AS(anova_oneway(gs), DegenerateSampleError);
}

TEST_CASE("anova null p-values are approximately uniform (KS over 200 seeds)") {
  std::vector<double> ps;
  for (int seed = 0; seed < 200; ++seed) {
    RngStream rng(static_cast<std::uint64_t>(seed), "anova-null");
    std::vector<SampleGroup> gs;
    for (int g = 0; g < 3; ++g) {
      std::vector<double> v(15);
      for (double& x : v) x = rng.normal(0.5, 0.05);
      gs.push_back(group("g" + std::to_string(g), v));
    }
    ps.push_back(anova_oneway(gs).p_value);
  }
  std::sort(ps.begin(), ps.end());
  double d = 0.0;
  std::size_t n = ps.size();
  for (std::size_t i = 0; i < n; ++i) {
    double ecdf_hi = static_cast<double>(i + 1) / n;
    double ecdf_lo = static_cast<double>(i) / n;
    d = std::max(d, std::max(std::abs(ecdf_hi - ps[i]), std::abs(ps[i] - ecdf_lo)));
  }
  // Kolmogorov asymptotic p-value; require > 0.01
  double t = (std::sqrt(static_cast<double>(n)) + 0.12 +
              0.11 / std::sqrt(static_cast<double>(n))) * d;
  double ks_p = 0.0;
  for (int k = 1; k <= 100; ++k)
    ks_p += 2.0 * (k % 2 == 1 ? 1.0 : -1.0) * std::exp(-2.0 * k * k * t * t);
  CHECK(ks_p > 0.01);
}

TEST_CASE("welch anova runs and agrees with pooled anova on balanced equal-variance data") {
  std::vector<SampleGroup> gs{group("a", {1.0, 2.0, 3.0, 4.0}),
                              group("b", {2.0, 3.0, 4.0, 5.0}),
                              group("c", {4.0, 5.0, 6.0, 7.0})};
  TestResult w = welch_anova(gs);
  TestResult a = anova_oneway(gs);
  CHECK(w.p_value == doctest::Approx(a.p_value).epsilon(0.5));  // same ballpark
  CHECK(w.p_value >= 0.0);
  CHECK(w.p_value <= 1.0);
}

TEST_CASE("pooled one-tailed t-test matches the reference oracle") {
  for (const auto& f : stats_fixtures().at("t_test_one_tailed")) {
    TestResult r = t_test_one_tailed(group("a", f.at("a").get<std::vector<double>>()),
                                     group("b", f.at("b").get<std::vector<double>>()));
    CHECK(std::abs(r.statistic - f.at("t").get<double>()) <= 1e-6);
    CHECK(std::abs(r.p_value - f.at("p").get<double>()) <= 1e-6);
  }
}

TEST_CASE("welch one-tailed t-test matches the reference oracle") {
  for (const auto& f : stats_fixtures().at("welch_t_one_tailed")) {
    TestResult r = t_test_one_tailed(group("a", f.at("a").get<std::vector<double>>()),
                                     group("b", f.at("b").get<std::vector<double>>()),
                                     kDefaultAlpha, /*pooled=*/false);
    CHECK(std::abs(r.statistic - f.at("t").get<double>()) <= 1e-6);
    CHECK(std::abs(r.p_value - f.at("p").get<double>()) <= 1e-6);
  }
}

TEST_CASE("t-test symmetry and dominance") {
  TestResult sym = t_test_one_tailed(group("a", {0.4, 0.5, 0.6}),
                                     group("b", {0.4, 0.5, 0.6}));
  CHECK(sym.statistic == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(sym.p_value == doctest::Approx(0.5).epsilon(1e-12));

  TestResult dom = t_test_one_tailed(group("a", {10.4, 10.5, 10.6}),
                                     group("b", {0.4, 0.5, 0.6}));
  CHECK(dom.p_value < 0.001);

  CHECK_THROWS_AS(t_test_one_tailed(group("a", {1.0, 1.0}), group("b", {1.0, 1.0})),
                  DegenerateSampleError);
}

TEST_CASE("mann-whitney matches the reference oracle") {
  for (const auto& f : stats_fixtures().at("mann_whitney_one_tailed")) {
    TestResult r =
        mann_whitney_one_tailed(group("a", f.at("a").get<std::vector<double>>()),
                                group("b", f.at("b").get<std::vector<double>>()));
    CHECK(r.statistic == doctest::Approx(f.at("U").get<double>()).epsilon(1e-12));
    CHECK(std::abs(r.p_value - f.at("p").get<double>()) <= 1e-3);
  }
}

TEST_CASE("mann-whitney separation and symmetry") {
  TestResult sep = mann_whitney_one_tailed(group("a", {1, 2, 3}),
                                           group("b", {4, 5, 6}));
  CHECK(sep.statistic == doctest::Approx(0.0));  // U of the dominated sample
  std::vector<double> mirror(30);
  for (int i = 0; i < 30; ++i) mirror[static_cast<std::size_t>(i)] = 0.1 * i;
  TestResult sym = mann_whitney_one_tailed(group("a", mirror), group("b", mirror));
  CHECK(std::abs(sym.p_value - 0.5) <= 0.02);  // continuity-correction slack
  CHECK_THROWS_AS(
      mann_whitney_one_tailed(group("a", {1, 1, 1}), group("b", {1, 1, 1})),
      DegenerateSampleError);
}

TEST_CASE("kruskal-wallis matches the reference oracle") {
  for (const auto& f : stats_fixtures().at("kruskal_wallis")) {
    auto gs = groups_from_fixture(f);
    TestResult r = kruskal_wallis(gs);
    CHECK(std::abs(r.statistic - f.at("H").get<double>()) <= 1e-3);
    CHECK(std::abs(r.p_value - f.at("p").get<double>()) <= 1e-3);
  }
}

TEST_CASE("every reported p-value is in [0,1] and reject_null matches alpha") {
  for (const auto& f : stats_fixtures().at("anova")) {
    auto gs = groups_from_fixture(f);
    TestResult r = anova_oneway(gs, 0.072);
    CHECK(r.p_value >= 0.0);
    CHECK(r.p_value <= 1.0);
    CHECK(r.reject_null == (r.p_value < 0.072));
    CHECK(r.alpha == 0.072);
  }
}

TEST_CASE("TestResult serializes with the documented fields") {
  TestResult r = make_result("anova_oneway", 3.5, 0.012, 0.05);
  auto j = nlohmann::json::parse(r.to_json());
  CHECK(j.at("test") == "anova_oneway");
  CHECK(j.at("statistic") == doctest::Approx(3.5));
  CHECK(j.at("p_value") == doctest::Approx(0.012));
  CHECK(j.at("alpha") == doctest::Approx(0.05));
  CHECK(j.at("reject_null") == true);
  TestResult back = TestResult::from_json(r.to_json());
  CHECK(back.test_name == r.test_name);
  CHECK(back.reject_null == r.reject_null);
}
