#include <doctest.h>

#include <cmath>
#include <set>

#include "qcheb/rng.hpp"

using qcheb::Rng;

TEST_CASE("identical seeds give identical streams") {
  Rng a(12345), b(12345);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("different seeds give different streams") {
  Rng a(1), b(2);
  int same = 0;
  for (int i = 0; i < 64; ++i) same += (a.next_u64() == b.next_u64()) ? 1 : 0;
  CHECK(same == 0);
}

TEST_CASE("split produces independent deterministic child seeds") {
  const std::uint64_t s1 = Rng::split(42, 0);
  const std::uint64_t s2 = Rng::split(42, 1);
  CHECK(s1 != s2);
  CHECK(Rng::split(42, 0) == s1);
  CHECK(Rng::split(43, 0) != s1);

  std::set<std::uint64_t> children;
  for (std::uint64_t i = 0; i < 1000; ++i) children.insert(Rng::split(7, i));
  CHECK(children.size() == 1000);
}

TEST_CASE("next_double lies in [0,1) and has mean near 1/2") {
  Rng rng(99);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double x = rng.next_double();
    REQUIRE(x >= 0.0);
    REQUIRE(x < 1.0);
    sum += x;
  }
  CHECK(std::fabs(sum / n - 0.5) < 0.01);
}

TEST_CASE("next_below covers the full range") {
  Rng rng(5);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) seen.insert(rng.next_below(7));
  CHECK(seen.size() == 7);
  for (std::uint64_t v : seen) CHECK(v < 7);
}

TEST_CASE("bernoulli frequency tracks its parameter") {
  Rng rng(17);
  int hits = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) hits += rng.next_bernoulli(0.3) ? 1 : 0;
  CHECK(std::fabs(static_cast<double>(hits) / n - 0.3) < 0.01);
}
