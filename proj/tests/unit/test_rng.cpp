#include <set>

#include "doctest.h"
#include "hubnet/rng.hpp"

using hubnet::RngStream;
using hubnet::split_seed;

TEST_CASE("split seeds are distinct and stable") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t base : {0ULL, 1ULL, 42ULL}) {
    for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(split_seed(base, i));
  }
  CHECK(seen.size() == 3000);
  CHECK(split_seed(7, 3) == split_seed(7, 3));
  CHECK(split_seed(7, 3) != split_seed(3, 7));
}

TEST_CASE("uniform stays in the open unit interval") {
  RngStream rng(123);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  // sd of the mean is 1/sqrt(12 n) ~ 6.5e-4
  CHECK(std::abs(sum / n - 0.5) < 4e-3);
}

TEST_CASE("same seed, same stream") {
  RngStream a(99), b(99);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("exponential draws have the requested mean") {
  RngStream rng(5);
  const double rate = 2.5;
  const int n = 200000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += rng.exponential(rate);
  // relative sd of the mean is 1/sqrt(n)
  CHECK(std::abs(sum / n * rate - 1.0) < 5.0 / std::sqrt(n));
}
