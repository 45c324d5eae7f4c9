#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "ocp/random.hpp"
#include "ocp/stats.hpp"

using namespace ocp;

TEST_CASE("seed_schedule is a pure function of its inputs") {
  CHECK(seed_schedule(42, "env", 7) == seed_schedule(42, "env", 7));
  CHECK(seed_schedule(42, "env", 7) != seed_schedule(43, "env", 7));
  CHECK(seed_schedule(42, "env", 7) != seed_schedule(42, "env", 8));
}

TEST_CASE("different labels at the same index give different children") {
  CHECK(seed_schedule(1, "env", 0) != seed_schedule(1, "process", 0));
  CHECK(seed_schedule(1, "a", 0) != seed_schedule(1, "b", 0));
  // Labels differing only past the first 8 bytes, and by a trailing NUL-free suffix.
  CHECK(seed_schedule(1, "selfdual-all-infected", 0) != seed_schedule(1, "selfdual-all-infecteX", 0));
  CHECK(seed_schedule(1, "env", 0) != seed_schedule(1, "env2", 0));
}

TEST_CASE("a million children of one master are distinct") {
  std::vector<std::uint64_t> seeds(1'000'000);
  for (std::size_t i = 0; i < seeds.size(); ++i) seeds[i] = seed_schedule(2024, "replica", i);
  std::sort(seeds.begin(), seeds.end());
  CHECK(std::adjacent_find(seeds.begin(), seeds.end()) == seeds.end());
}

TEST_CASE("mix64 matches the splitmix64 finalizer") {
  CHECK(mix64(0) == 0);
  CHECK(mix64(1) == 0x5692161d100b05e5ULL);
}

TEST_CASE("uniform and exponential transforms") {
  CHECK(to_unit(0) == 0.0);
  CHECK(to_unit(~std::uint64_t{0}) < 1.0);
  CHECK(std::isfinite(to_exponential(~std::uint64_t{0}, 1.0)));
  SplitMix64 rng(9);
  std::vector<double> xs(200000);
  for (double& x : xs) x = to_exponential(rng(), 2.0);
  const Estimate e = estimate_from(xs);
  CHECK(within_se(e, 0.5, 3.0));
}

TEST_CASE("probability thresholds") {
  CHECK(probability_threshold(0.0) == 0);
  CHECK(probability_threshold(1.0) == ~std::uint64_t{0});
  CHECK(probability_threshold(0.5) == (std::uint64_t{1} << 63));
  SplitMix64 rng(3);
  const std::uint64_t t = probability_threshold(0.3);
  std::size_t hits = 0;
  const std::size_t n = 200000;
  for (std::size_t i = 0; i < n; ++i) hits += rng() < t ? 1 : 0;
  CHECK(within_se(proportion(hits, n), 0.3, 3.0));
}

TEST_CASE("index draws cover the range uniformly") {
  SplitMix64 rng(5);
  std::vector<std::size_t> counts(6, 0);
  const std::size_t n = 600000;
  for (std::size_t i = 0; i < n; ++i) ++counts[to_index(rng(), 6)];
  for (std::size_t c : counts) CHECK(within_se(proportion(c, n), 1.0 / 6.0, 4.0));
}

TEST_CASE("standard errors") {
  const double xs[] = {1.0, 2.0, 3.0, 4.0};
  const Estimate e = estimate_from(xs);
  CHECK(e.mean == doctest::Approx(2.5));
  CHECK(e.se == doctest::Approx(std::sqrt((2.25 + 0.25 + 0.25 + 2.25) / 3.0 / 4.0)));
  const Estimate p = proportion(3, 4);
  CHECK(p.mean == 0.75);
  CHECK(p.se == doctest::Approx(std::sqrt(0.75 * 0.25 / 4.0)));
}
