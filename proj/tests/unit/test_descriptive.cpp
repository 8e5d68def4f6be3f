#include <doctest.h>

#include <cmath>
#include <vector>

#include "tbench/error.hpp"
#include "tbench/rng.hpp"
#include "tbench/stats/descriptive.hpp"

using namespace tbench;
using namespace tbench::stats;

TEST_CASE("textbook values") {
  std::vector<double> v{1, 2, 3};
  CHECK(sample_std(v) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(sem(v) == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-15));
}

TEST_CASE("constant samples have zero spread") {
  std::vector<double> v(10, 0.42);
  CHECK(sample_std(v) == 0.0);
  CHECK(sem(v) == 0.0);
  for (const auto& p : sem_curve(v)) CHECK(p.sem == 0.0);
}

TEST_CASE("n=1 is undefined because of the n-1 divisor") {
  std::vector<double> v{0.9};
  CHECK_THROWS_AS(sample_std(v), UndefinedStatisticError);
  CHECK_THROWS_AS(sem(v), UndefinedStatisticError);
  CHECK_THROWS_AS(sem_curve(v), UndefinedStatisticError);
}

TEST_CASE("sem times sqrt(n) equals sample_std to roundoff") {
  RngStream rng(5, "semlaw");
  for (int trial = 0; trial < 50; ++trial) {
    std::size_t n = 2 + rng.uniform_int(100);
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform();
    double lhs = sem(v) * std::sqrt(static_cast<double>(n));
    double rhs = sample_std(v);
    CHECK(std::abs(lhs - rhs) <= 4 * std::abs(rhs) * 2.22e-16);
  }
}

TEST_CASE("known std of 0.03 at n=100 gives sem 0.003") {
  // alternating +/-a around a mean has sample std a*sqrt(n/(n-1))
  const int n = 100;
  double a = 0.03 * std::sqrt((n - 1) / static_cast<double>(n));
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = (i % 2 ? a : -a);
  CHECK(sample_std(v) == doctest::Approx(0.03).epsilon(1e-12));
  CHECK(sem(v) == doctest::Approx(0.003).epsilon(1e-12));
  // quadrupling n with the std held fixed halves the sem
  const int n4 = 400;
  double a4 = 0.03 * std::sqrt((n4 - 1) / static_cast<double>(n4));
  std::vector<double> v4(n4);
  for (int i = 0; i < n4; ++i) v4[static_cast<std::size_t>(i)] = (i % 2 ? a4 : -a4);
  CHECK(sem(v4) == doctest::Approx(0.0015).epsilon(1e-12));
}

TEST_CASE("sem_curve has one point per prefix length") {
  std::vector<double> v{0.1, 0.2, 0.3, 0.4, 0.5};
  auto curve = sem_curve(v);
  REQUIRE(curve.size() == 4);
  CHECK(curve.front().n == 2);
  CHECK(curve.back().n == 5);
  CHECK(curve.back().sem == doctest::Approx(sem(v)));
}

TEST_CASE("sem at n=100 estimates sigma/10 for iid draws (median of 50 seeds)") {
  // Monte-Carlo oracle for the 1/sqrt(n) law, sigma = 0.03.
  std::vector<double> estimates;
  for (int seed = 0; seed < 50; ++seed) {
    RngStream rng(static_cast<std::uint64_t>(seed), "mc");
    std::vector<double> v(100);
    for (double& x : v) x = rng.normal(0.8, 0.03);
    estimates.push_back(sem(v));
  }
  std::sort(estimates.begin(), estimates.end());
  double median = estimates[25];
  CHECK(median > 0.003 * 0.8);
  CHECK(median < 0.003 * 1.2);
}
