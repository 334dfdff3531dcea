#pragma once

#include <cstdint>
#include <vector>

#include "capalloc/rng.hpp"

namespace capalloc::pivotal {

// Marginals m[i] in [0,1] with sum(m) <= cap.  Entries above 1 by at most
// 1e-9 (LP solver noise) are clamped to 1; if the sum leaks above cap by at
// most 1e-9 the vector is rescaled so the hard cardinality cap stays hard.
// Anything worse is rejected with std::invalid_argument.
struct MarginalVector {
  std::vector<double> m;
  int cap = 0;

  static MarginalVector make(std::vector<double> m, int cap);
  int size() const { return static_cast<int>(m.size()); }
};

// Draws a subset S of {0,...,n-1} with Pr[i in S] = m[i] exactly, |S| <= cap
// always, and negative cylinder dependence, by pairwise pivoting the two
// lowest-index fractional entries.  Returns sorted indices.
std::vector<int> sample(const MarginalVector& mv, RngStream& rng);

// Exact law of sample() over the pivot randomness, as bitmask -> probability.
// Requires n <= 20.
struct SubsetDistribution {
  int n = 0;
  std::vector<std::pair<std::uint32_t, double>> entries;  // sorted by mask

  double total() const;
  double marginal(int i) const;
  // Pr[I subset of S] and Pr[I disjoint from S] for a bitmask I.
  double inclusion(std::uint32_t index_set) const;
  double exclusion(std::uint32_t index_set) const;
};

SubsetDistribution subset_distribution(const MarginalVector& mv);

}  // namespace capalloc::pivotal
