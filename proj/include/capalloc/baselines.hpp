#pragma once

#include <cstdint>
#include <vector>

#include "capalloc/allocator.hpp"
#include "capalloc/instance.hpp"
#include "capalloc/lp.hpp"

namespace capalloc::baselines {

// Capacity-generalized proposal baseline: on arrival every available user
// proposes independently with probability x_{i,t} / (p_t (1 - sum_{t'<t}
// x_{i,t'})), and the top c_t proposers by value are allocated, ties to the
// lowest index.  Defined for deterministic rewards only; q < 1 anywhere is
// rejected.
class BdmExperiment {
 public:
  BdmExperiment(const BernoulliInstance& inst, const std::vector<std::vector<double>>& x,
                std::uint64_t seed);

  alloc::RunTrace run_trial(std::uint64_t trial) const;
  const std::vector<std::vector<double>>& proposal_probs() const { return proposal_; }

 private:
  BernoulliInstance inst_;
  std::uint64_t seed_ = 0;
  std::vector<std::vector<double>> proposal_;  // [t][i]
  std::vector<std::vector<int>> value_order_;  // [t]: users by value desc, index asc
};

// Value-greedy strawman: on arrival, allocate the c_t available users with
// the largest v*q (positive only), ties to the lowest index.
class GreedyExperiment {
 public:
  GreedyExperiment(const BernoulliInstance& inst, std::uint64_t seed);

  alloc::RunTrace run_trial(std::uint64_t trial) const;

 private:
  BernoulliInstance inst_;
  std::uint64_t seed_ = 0;
  std::vector<std::vector<int>> weight_order_;  // [t]: users by v*q desc, index asc
};

// Single-trial conveniences.
alloc::RunTrace run_bdm(const BernoulliInstance& inst, const lp::LpModel& model,
                        const lp::LpSolution& sol, std::uint64_t seed, std::uint64_t trial = 0);
alloc::RunTrace run_greedy(const BernoulliInstance& inst, std::uint64_t seed,
                           std::uint64_t trial = 0);

}  // namespace capalloc::baselines
