#include "doctest.h"

#include "jive/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

using jive::RandomStream;

TEST_CASE("streams are reproducible and distinct") {
  RandomStream a(42, 3);
  RandomStream b(42, 3);
  RandomStream c(42, 4);
  RandomStream d(43, 3);
  bool differ_stream = false;
  bool differ_seed = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next();
    CHECK(x == b.next());
    differ_stream |= x != c.next();
    differ_seed |= x != d.next();
  }
  CHECK(differ_stream);
  CHECK(differ_seed);
  CHECK(jive::derive_seed(1, 0) != jive::derive_seed(1, 1));
  CHECK(jive::derive_seed(1, 0) != jive::derive_seed(2, 0));
}

TEST_CASE("pinned draws") {
  // Frozen so that simulated data stays the same across platforms and releases.
  // Seeds computed by an independent splitmix64 script.
  CHECK(jive::derive_seed(7, 0) == 16896619284639803257ULL);
  CHECK(jive::derive_seed(1, 3) == 16921333289596331312ULL);

  // The engine seeded with the derived value; 10000th output of the
  // default-seeded engine is fixed by the C++ standard.
  std::mt19937_64 reference(16896619284639803257ULL);
  RandomStream rng(7, 0);
  for (int i = 0; i < 100; ++i) CHECK(rng.next() == reference());
  std::mt19937_64 standard;
  standard.discard(9999);
  CHECK(standard() == 9981545732273789042ULL);

  RandomStream again(7, 0);
  CHECK(again.uniform() == static_cast<double>(std::mt19937_64(16896619284639803257ULL)() >> 11) * 0x1.0p-53);
}

TEST_CASE("below stays in range and covers it") {
  RandomStream rng(1);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 7000; ++i) {
    const auto v = rng.below(7);
    REQUIRE(v < 7);
    ++hits[v];
  }
  for (int h : hits) CHECK(h > 800);
}

TEST_CASE("normal draws have unit moments") {
  RandomStream rng(11);
  const int n = 200000;
  double sum = 0.0;
  double sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sq += z * z;
  }
  const double mean = sum / n;
  CHECK(std::abs(mean) < 0.01);
  CHECK(std::abs(sq / n - mean * mean - 1.0) < 0.015);
}

TEST_CASE("shuffle is a permutation with uniform positions") {
  RandomStream rng(5);
  std::vector<int> first_slot(5, 0);
  for (int rep = 0; rep < 5000; ++rep) {
    std::vector<int> v(5);
    std::iota(v.begin(), v.end(), 0);
    rng.shuffle(v.begin(), v.end());
    std::vector<int> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    REQUIRE(sorted == std::vector<int>{0, 1, 2, 3, 4});
    ++first_slot[v[0]];
  }
  for (int c : first_slot) CHECK(std::abs(c - 1000) < 150);
}

TEST_CASE("sample_without_replacement") {
  RandomStream rng(3);
  SUBCASE("sparse draw") {
    const auto s = rng.sample_without_replacement(1000, 10);
    CHECK(s.size() == 10);
    CHECK(std::set<std::int64_t>(s.begin(), s.end()).size() == 10);
    for (auto v : s) CHECK((v >= 0 && v < 1000));
  }
  SUBCASE("dense draw") {
    const auto s = rng.sample_without_replacement(12, 9);
    CHECK(std::set<std::int64_t>(s.begin(), s.end()).size() == 9);
  }
  SUBCASE("every element equally likely") {
    std::vector<int> hits(20, 0);
    for (int rep = 0; rep < 4000; ++rep) {
      for (auto v : rng.sample_without_replacement(20, 1)) ++hits[static_cast<std::size_t>(v)];
    }
    for (int h : hits) CHECK(std::abs(h - 200) < 70);
  }
}
