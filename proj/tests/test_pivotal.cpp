#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bit>
#include <cmath>

#include "capalloc/pivotal.hpp"
#include "capalloc/rng.hpp"

using namespace capalloc;
using pivotal::MarginalVector;
using pivotal::SubsetDistribution;

namespace {

// Random marginal vector with a mix of fractional and integral entries.
MarginalVector random_marginals(RngStream& rng, int n) {
  std::vector<double> m(n);
  double sum = 0.0;
  for (double& v : m) {
    double u = rng.uniform01();
    if (u < 0.1) {
      v = 0.0;
    } else if (u < 0.2) {
      v = 1.0;
    } else {
      v = rng.uniform01();
    }
    sum += v;
  }
  int cap = static_cast<int>(std::ceil(sum - 1e-12));
  cap = std::max(cap, 1);
  if (rng.bernoulli(0.3)) cap += 1;  // sometimes a slack cap
  return MarginalVector::make(m, cap);
}

}  // namespace

TEST_CASE("integral marginals are deterministic") {
  MarginalVector mv = MarginalVector::make({1.0, 0.0, 1.0}, 2);
  RngStream rng(1);
  for (int rep = 0; rep < 20; ++rep) {
    auto s = pivotal::sample(mv, rng);
    REQUIRE(s == std::vector<int>{0, 2});
  }
}

TEST_CASE("two half marginals with cap one are exclusive") {
  MarginalVector mv = MarginalVector::make({0.5, 0.5}, 1);
  SubsetDistribution dist = pivotal::subset_distribution(mv);
  REQUIRE(dist.entries.size() == 2);
  CHECK(dist.entries[0].first == 0b01u);
  CHECK(dist.entries[0].second == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(dist.entries[1].first == 0b10u);
  CHECK(dist.entries[1].second == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("fixed subsets") {
  SubsetDistribution both = pivotal::subset_distribution(MarginalVector::make({1.0, 1.0}, 2));
  REQUIRE(both.entries.size() == 1);
  CHECK(both.entries[0].first == 0b11u);
  CHECK(both.entries[0].second == 1.0);

  SubsetDistribution single = pivotal::subset_distribution(MarginalVector::make({0.25}, 1));
  REQUIRE(single.entries.size() == 2);
  CHECK(single.entries[0].first == 0u);
  CHECK(single.entries[0].second == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(single.entries[1].second == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("P1 exact marginals from the enumerated law, n up to 10") {
  RngStream rng(42);
  for (int rep = 0; rep < 60; ++rep) {
    int n = rng.uniform_int(1, 10);
    MarginalVector mv = random_marginals(rng, n);
    SubsetDistribution dist = pivotal::subset_distribution(mv);
    CHECK(dist.total() == doctest::Approx(1.0).epsilon(1e-12));
    for (int i = 0; i < n; ++i) {
      CHECK(dist.marginal(i) == doctest::Approx(mv.m[i]).epsilon(0).scale(1).epsilon(1e-12));
    }
  }
}

TEST_CASE("P2 hard cap over a million samples") {
  RngStream meta(7);
  long long draws = 0;
  int vector_index = 0;
  while (draws < 1'000'000) {
    int n = meta.uniform_int(2, 12);
    MarginalVector mv = random_marginals(meta, n);
    RngStream rng(derive_seed(99, {static_cast<std::uint64_t>(vector_index++)}));
    for (int rep = 0; rep < 20'000; ++rep) {
      auto s = pivotal::sample(mv, rng);
      REQUIRE(static_cast<int>(s.size()) <= mv.cap);
      ++draws;
    }
  }
  CHECK(draws >= 1'000'000);
}

TEST_CASE("P3 negative cylinder dependence, exact, all index sets, n <= 8") {
  RngStream rng(5);
  for (int rep = 0; rep < 40; ++rep) {
    int n = rng.uniform_int(2, 8);
    MarginalVector mv = random_marginals(rng, n);
    SubsetDistribution dist = pivotal::subset_distribution(mv);
    const std::uint32_t full = (1u << n) - 1;
    for (std::uint32_t set = 1; set <= full; ++set) {
      double prod_in = 1.0, prod_out = 1.0;
      for (int i = 0; i < n; ++i) {
        if (set & (1u << i)) {
          prod_in *= dist.marginal(i);
          prod_out *= 1.0 - dist.marginal(i);
        }
      }
      CHECK(dist.inclusion(set) <= prod_in + 1e-12);
      CHECK(dist.exclusion(set) <= prod_out + 1e-12);
    }
  }
}

TEST_CASE("Monte-Carlo marginals match within three standard errors") {
  MarginalVector mv = MarginalVector::make({0.3, 0.3, 0.4}, 1);
  const long long trials = 1'000'000;
  RngStream rng(2024);
  std::vector<long long> hits(3, 0);
  for (long long rep = 0; rep < trials; ++rep) {
    for (int i : pivotal::sample(mv, rng)) ++hits[i];
  }
  for (int i = 0; i < 3; ++i) {
    double p = mv.m[i];
    double se = std::sqrt(p * (1 - p) / trials);
    CHECK(std::abs(static_cast<double>(hits[i]) / trials - p) <= 3 * se);
  }
}

TEST_CASE("sampled law matches enumerated law on a fractional vector") {
  MarginalVector mv = MarginalVector::make({0.2, 0.7, 0.5, 0.6}, 2);
  SubsetDistribution dist = pivotal::subset_distribution(mv);
  const long long trials = 400'000;
  RngStream rng(99);
  std::vector<long long> counts(16, 0);
  for (long long rep = 0; rep < trials; ++rep) {
    std::uint32_t mask = 0;
    for (int i : pivotal::sample(mv, rng)) mask |= 1u << i;
    ++counts[mask];
  }
  for (const auto& [mask, p] : dist.entries) {
    double freq = static_cast<double>(counts[mask]) / trials;
    double se = std::sqrt(p * (1 - p) / trials);
    CHECK(std::abs(freq - p) <= 3 * se + 1e-9);
  }
}

TEST_CASE("sampling is reproducible for a fixed seed") {
  MarginalVector mv = MarginalVector::make({0.2, 0.7, 0.5, 0.6}, 2);
  RngStream a(7), b(7);
  for (int rep = 0; rep < 100; ++rep) {
    CHECK(pivotal::sample(mv, a) == pivotal::sample(mv, b));
  }
}

TEST_CASE("clamping and rejection at the marginal boundary") {
  // 1e-10 above one is solver noise: clamped.
  MarginalVector mv = MarginalVector::make({1.0 + 1e-10, 0.5}, 2);
  CHECK(mv.m[0] == 1.0);
  // Far above one is an error.
  CHECK_THROWS_AS(MarginalVector::make({1.1, 0.0}, 2), std::invalid_argument);
  // Sum leaking past the cap by noise is rescaled, beyond tolerance rejected.
  MarginalVector leak = MarginalVector::make({0.5, 0.5 + 5e-10}, 1);
  CHECK(leak.m[0] + leak.m[1] <= 1.0);
  CHECK_THROWS_AS(MarginalVector::make({0.8, 0.8}, 1), std::invalid_argument);
  CHECK_THROWS_AS(MarginalVector::make({0.5}, -1), std::invalid_argument);
}

TEST_CASE("subset_distribution rejects n beyond the enumeration budget") {
  std::vector<double> m(21, 0.5);
  CHECK_THROWS_AS(pivotal::subset_distribution(MarginalVector::make(m, 21)),
                  std::invalid_argument);
}
