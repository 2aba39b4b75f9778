#include <algorithm>
#include <numeric>
#include <set>

#include "ads/rng.hpp"
#include "doctest.h"

TEST_CASE("same seed gives the same stream") {
  ads::Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next();
    CHECK(x == b.next());
    differs |= x != c.next();
  }
  CHECK(differs);
}

TEST_CASE("below stays in range and covers it") {
  ads::Rng rng(1);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 7000; ++i) {
    const auto v = rng.below(7);
    REQUIRE(v < 7);
    ++hits[v];
  }
  for (int h : hits) CHECK(h > 800);
}

TEST_CASE("uniform lies in [0, 1)") {
  ads::Rng rng(2);
  double lo = 1, hi = 0;
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo >= 0.0);
  CHECK(hi < 1.0);
  CHECK(lo < 0.01);
  CHECK(hi > 0.99);
}

TEST_CASE("permutation and sample produce distinct indices") {
  ads::Rng rng(3);
  auto p = rng.permutation(50);
  std::sort(p.begin(), p.end());
  std::vector<std::size_t> iota(50);
  std::iota(iota.begin(), iota.end(), 0);
  CHECK(p == iota);

  const auto s = rng.sample(1000, 40);
  CHECK(s.size() == 40);
  CHECK(std::set<std::size_t>(s.begin(), s.end()).size() == 40);
  for (auto v : s) CHECK(v < 1000);
}

TEST_CASE("derived seeds differ per stream") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 100; ++s) seen.insert(ads::derive_seed(7, s));
  CHECK(seen.size() == 100);
  CHECK(ads::derive_seed(7, 3) == ads::derive_seed(7, 3));
  CHECK(ads::derive_seed(7, 3) != ads::derive_seed(8, 3));
}
