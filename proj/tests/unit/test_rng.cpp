#include <doctest.h>

#include <set>
#include <vector>

#include "tbench/rng.hpp"

using namespace tbench;

TEST_CASE("identical (seed, key) pairs yield identical sequences") {
  RngStream a(42, "fold:0");
  RngStream b(42, "fold:0");
  for (int i = 0; i < 200; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("distinct keys and distinct seeds diverge") {
  RngStream a(42, "fold:0");
  RngStream b(42, "fold:1");
  RngStream c(41, "fold:0");
  int diff_key = 0, diff_seed = 0;
  RngStream a2(42, "fold:0");
  RngStream a3(42, "fold:0");
  for (int i = 0; i < 100; ++i) {
    if (a.next_u64() != b.next_u64()) ++diff_key;
    if (a2.next_u64() != c.next_u64()) ++diff_seed;
    (void)a3;
  }
  CHECK(diff_key == 100);
  CHECK(diff_seed == 100);
}

TEST_CASE("uniform stays in [0,1) and covers both halves") {
  RngStream r(7, "u");
  int low = 0;
  for (int i = 0; i < 1000; ++i) {
    double v = r.uniform();
    CHECK(v >= 0.0);
    CHECK(v < 1.0);
    if (v < 0.5) ++low;
  }
  CHECK(low > 400);
  CHECK(low < 600);
}

TEST_CASE("uniform_int respects bounds and hits every value") {
  RngStream r(7, "ui");
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 500; ++i) {
    std::uint64_t v = r.uniform_int(7);
    CHECK(v < 7);
    seen.insert(v);
  }
  CHECK(seen.size() == 7);
}

TEST_CASE("normal draws have roughly unit moments") {
  RngStream r(7, "n");
  double sum = 0, sq = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    double v = r.normal();
    sum += v;
    sq += v * v;
  }
  double mean = sum / n;
  double var = sq / n - mean * mean;
  CHECK(std::abs(mean) < 0.03);
  CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("child streams are independent of parent draw position") {
  RngStream a(42, "parent");
  RngStream c1 = a.child("x");
  a.next_u64();
  a.next_u64();
  RngStream c2 = a.child("x");
  for (int i = 0; i < 50; ++i) CHECK(c1.next_u64() == c2.next_u64());
}

TEST_CASE("shuffle is deterministic per stream and permutes") {
  std::vector<int> v1{1, 2, 3, 4, 5, 6, 7, 8};
  std::vector<int> v2 = v1;
  std::vector<int> orig = v1;
  RngStream a(9, "s");
  RngStream b(9, "s");
  shuffle(v1, a);
  shuffle(v2, b);
  CHECK(v1 == v2);
  std::sort(v2.begin(), v2.end());
  CHECK(v2 == orig);
}
