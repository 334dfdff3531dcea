#include "capalloc/pivotal.hpp"

#include <bit>
#include <cmath>
#include <map>
#include <stdexcept>

#include "capalloc/util.hpp"

namespace capalloc::pivotal {

namespace {

constexpr double kClampTol = 1e-9;   // LP tolerance leakage
constexpr double kSnapTol = 1e-12;   // pivot arithmetic residue

bool fractional(double v) { return v > kSnapTol && v < 1.0 - kSnapTol; }

double snap(double v) {
  if (v <= kSnapTol) return 0.0;
  if (v >= 1.0 - kSnapTol) return 1.0;
  return v;
}

}  // namespace

MarginalVector MarginalVector::make(std::vector<double> m, int cap) {
  if (cap < 0) throw std::invalid_argument("pivotal: cap must be nonnegative");
  double sum = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    double& v = m[i];
    if (!std::isfinite(v)) throw std::invalid_argument(cat("pivotal: marginal[", i, "] not finite"));
    if (v < 0.0) {
      if (v < -kClampTol) throw std::invalid_argument(cat("pivotal: marginal[", i, "] = ", v, " negative"));
      v = 0.0;
    }
    if (v > 1.0) {
      if (v > 1.0 + kClampTol) throw std::invalid_argument(cat("pivotal: marginal[", i, "] = ", v, " exceeds 1"));
      v = 1.0;
    }
    sum += v;
  }
  if (sum > cap + kClampTol) {
    throw std::invalid_argument(cat("pivotal: marginals sum to ", sum, " > cap = ", cap));
  }
  if (sum > cap && sum > 0.0) {
    const double scale = cap / sum;
    for (double& v : m) v *= scale;
  }
  MarginalVector mv;
  mv.m = std::move(m);
  mv.cap = cap;
  return mv;
}

// One pivot step on entries (a, b), preserving a + b and each expectation.
// Branch one keeps total in b, branch two in a; the caller supplies u in
// [0,1) to pick the branch.
namespace {

struct PivotOutcome {
  double a, b;
};

// With s = a+b <= 1: (0, s) w.p. b/s, (s, 0) w.p. a/s.
// With s > 1: (1, s-1) w.p. (1-b)/(2-s), (s-1, 1) otherwise.
PivotOutcome pivot_branch(double a, double b, bool first_branch) {
  const double s = a + b;
  if (s <= 1.0) {
    return first_branch ? PivotOutcome{0.0, snap(s)} : PivotOutcome{snap(s), 0.0};
  }
  return first_branch ? PivotOutcome{1.0, snap(s - 1.0)} : PivotOutcome{snap(s - 1.0), 1.0};
}

double first_branch_probability(double a, double b) {
  const double s = a + b;
  return s <= 1.0 ? b / s : (1.0 - b) / (2.0 - s);
}

}  // namespace

std::vector<int> sample(const MarginalVector& mv, RngStream& rng) {
  std::vector<double> w = mv.m;
  const int n = mv.size();
  int a = -1;  // lowest-index fractional entry seen so far
  for (int i = 0; i < n; ++i) {
    w[i] = snap(w[i]);
    if (!fractional(w[i])) continue;
    if (a < 0) {
      a = i;
      continue;
    }
    const double pa = w[a], pb = w[i];
    const bool first = rng.uniform01() < first_branch_probability(pa, pb);
    const PivotOutcome out = pivot_branch(pa, pb, first);
    w[a] = out.a;
    w[i] = out.b;
    if (fractional(w[a])) continue;       // a stays the lowest fractional
    a = fractional(w[i]) ? i : -1;
  }
  if (a >= 0) w[a] = rng.bernoulli(w[a]) ? 1.0 : 0.0;

  std::vector<int> subset;
  for (int i = 0; i < n; ++i) {
    if (w[i] > 0.5) subset.push_back(i);
  }
  if (static_cast<int>(subset.size()) > mv.cap) {
    throw std::logic_error("pivotal: sampled subset exceeded cap");
  }
  return subset;
}

namespace {

// Walks the full pivot tree, mirroring sample() branch for branch.
void enumerate(std::vector<double>& w, int a, int i, double prob,
               std::map<std::uint32_t, double>& acc) {
  const int n = static_cast<int>(w.size());
  for (; i < n; ++i) {
    w[i] = snap(w[i]);
    if (!fractional(w[i])) continue;
    if (a < 0) {
      a = i;
      continue;
    }
    const double pa = w[a], pb = w[i];
    const double p_first = first_branch_probability(pa, pb);
    for (int branch = 0; branch < 2; ++branch) {
      const bool first = branch == 0;
      const double p = first ? p_first : 1.0 - p_first;
      if (p <= 0.0) continue;
      std::vector<double> next = w;
      const PivotOutcome out = pivot_branch(pa, pb, first);
      next[a] = out.a;
      next[i] = out.b;
      int next_a = fractional(next[a]) ? a : (fractional(next[i]) ? i : -1);
      enumerate(next, next_a, i + 1, prob * p, acc);
    }
    return;
  }
  // At most one fractional entry remains.
  std::uint32_t mask = 0;
  for (int k = 0; k < n; ++k) {
    if (k != a && w[k] > 0.5) mask |= 1u << k;
  }
  if (a >= 0) {
    if (w[a] < 1.0) acc[mask] += prob * (1.0 - w[a]);
    if (w[a] > 0.0) acc[mask | (1u << a)] += prob * w[a];
  } else {
    acc[mask] += prob;
  }
}

}  // namespace

SubsetDistribution subset_distribution(const MarginalVector& mv) {
  const int n = mv.size();
  if (n > 20) throw std::invalid_argument(cat("pivotal: n = ", n, " too large for exact enumeration (max 20)"));
  std::map<std::uint32_t, double> acc;
  std::vector<double> w = mv.m;
  enumerate(w, -1, 0, 1.0, acc);

  SubsetDistribution dist;
  dist.n = n;
  dist.entries.assign(acc.begin(), acc.end());
  for (const auto& [mask, p] : dist.entries) {
    (void)p;
    if (std::popcount(mask) > mv.cap) {
      throw std::logic_error("pivotal: enumerated subset exceeded cap");
    }
  }
  return dist;
}

double SubsetDistribution::total() const {
  double s = 0.0;
  for (const auto& [mask, p] : entries) {
    (void)mask;
    s += p;
  }
  return s;
}

double SubsetDistribution::marginal(int i) const {
  return inclusion(1u << i);
}

double SubsetDistribution::inclusion(std::uint32_t index_set) const {
  double s = 0.0;
  for (const auto& [mask, p] : entries) {
    if ((mask & index_set) == index_set) s += p;
  }
  return s;
}

double SubsetDistribution::exclusion(std::uint32_t index_set) const {
  double s = 0.0;
  for (const auto& [mask, p] : entries) {
    if ((mask & index_set) == 0) s += p;
  }
  return s;
}

}  // namespace capalloc::pivotal
