#include "capalloc/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "capalloc/util.hpp"

namespace capalloc::baselines {

namespace {

constexpr double kFeasTol = 1e-8;

std::vector<int> order_by_weight_desc(const std::vector<double>& weight) {
  std::vector<int> order(weight.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (weight[a] != weight[b]) return weight[a] > weight[b];
    return a < b;
  });
  return order;
}

}  // namespace

BdmExperiment::BdmExperiment(const BernoulliInstance& inst,
                             const std::vector<std::vector<double>>& x, std::uint64_t seed)
    : inst_(inst), seed_(seed) {
  const int n = inst.n;
  const int T = inst.num_rounds();
  for (int t = 0; t < T; ++t) {
    for (int i = 0; i < n; ++i) {
      if (inst.rounds[t].q[i] < 1.0) {
        throw std::invalid_argument(
            cat("bdm baseline is defined for deterministic rewards; q[", i, "] < 1 in round ", t));
      }
    }
  }
  proposal_.assign(T, std::vector<double>(n, 0.0));
  std::vector<double> prefix(n, 0.0);  // sum of x over earlier rounds
  for (int t = 0; t < T; ++t) {
    const RoundSpec& r = inst.rounds[t];
    for (int i = 0; i < n; ++i) {
      const double denom = r.p * (1.0 - prefix[i]);
      const double xv = x[t][i];
      if (denom <= kFeasTol) {
        if (xv > kFeasTol) {
          throw std::invalid_argument(
              cat("bdm baseline: x > 0 with exhausted user mass (i=", i, ", t=", t, ")"));
        }
        continue;
      }
      double prob = xv / denom;
      if (prob > 1.0 + 1e-6) {
        throw std::invalid_argument(
            cat("bdm baseline: proposal probability ", prob, " above one (i=", i, ", t=", t,
                "); solution violates the online constraint"));
      }
      proposal_[t][i] = std::clamp(prob, 0.0, 1.0);
    }
    for (int i = 0; i < n; ++i) prefix[i] += x[t][i];
    value_order_.push_back(order_by_weight_desc(r.values));
  }
}

alloc::RunTrace BdmExperiment::run_trial(std::uint64_t trial) const {
  RngStream arrival(derive_seed(seed_, {trial, stream::arrival}));
  RngStream propose(derive_seed(seed_, {trial, stream::proposal}));

  const int T = inst_.num_rounds();
  alloc::RunTrace trace;
  trace.rounds.resize(T);
  std::vector<std::uint8_t> avail(inst_.n, 1);
  for (int t = 0; t < T; ++t) {
    const RoundSpec& r = inst_.rounds[t];
    alloc::RoundTrace& rt = trace.rounds[t];
    rt.arrived = arrival.bernoulli(r.p);
    if (!rt.arrived || r.c <= 0) continue;

    std::vector<std::uint8_t> proposed(inst_.n, 0);
    for (int i = 0; i < inst_.n; ++i) {
      if (avail[i] && proposal_[t][i] > 0.0 && propose.bernoulli(proposal_[t][i])) {
        proposed[i] = 1;
        rt.first_proposal.push_back(i);
      }
    }
    // Top c_t proposers by value, ties to the lowest index.
    for (int i : value_order_[t]) {
      if (static_cast<int>(rt.first_allocated.size()) >= r.c) break;
      if (proposed[i]) rt.first_allocated.push_back(i);
    }
    std::sort(rt.first_allocated.begin(), rt.first_allocated.end());
    for (int i : rt.first_allocated) {
      avail[i] = 0;  // q is one
      trace.welfare += r.values[i];
    }
    rt.successes = rt.first_allocated;
  }
  return trace;
}

GreedyExperiment::GreedyExperiment(const BernoulliInstance& inst, std::uint64_t seed)
    : inst_(inst), seed_(seed) {
  for (const RoundSpec& r : inst.rounds) {
    std::vector<double> weight(inst.n);
    for (int i = 0; i < inst.n; ++i) weight[i] = r.values[i] * r.q[i];
    weight_order_.push_back(order_by_weight_desc(weight));
  }
}

alloc::RunTrace GreedyExperiment::run_trial(std::uint64_t trial) const {
  RngStream arrival(derive_seed(seed_, {trial, stream::arrival}));
  RngStream success(derive_seed(seed_, {trial, stream::success}));

  const int T = inst_.num_rounds();
  alloc::RunTrace trace;
  trace.rounds.resize(T);
  std::vector<std::uint8_t> avail(inst_.n, 1);
  for (int t = 0; t < T; ++t) {
    const RoundSpec& r = inst_.rounds[t];
    alloc::RoundTrace& rt = trace.rounds[t];
    rt.arrived = arrival.bernoulli(r.p);
    if (!rt.arrived || r.c <= 0) continue;

    for (int i : weight_order_[t]) {
      if (static_cast<int>(rt.first_allocated.size()) >= r.c) break;
      if (!avail[i] || r.values[i] * r.q[i] <= 0.0) continue;
      rt.first_allocated.push_back(i);
    }
    std::sort(rt.first_allocated.begin(), rt.first_allocated.end());
    for (int i : rt.first_allocated) {
      if (success.bernoulli(r.q[i])) {
        avail[i] = 0;
        trace.welfare += r.values[i];
        rt.successes.push_back(i);
      }
    }
  }
  return trace;
}

alloc::RunTrace run_bdm(const BernoulliInstance& inst, const lp::LpModel& model,
                        const lp::LpSolution& sol, std::uint64_t seed, std::uint64_t trial) {
  BdmExperiment experiment(inst, lp::x_grid(inst, model, sol), seed);
  return experiment.run_trial(trial);
}

alloc::RunTrace run_greedy(const BernoulliInstance& inst, std::uint64_t seed,
                           std::uint64_t trial) {
  GreedyExperiment experiment(inst, seed);
  return experiment.run_trial(trial);
}

}  // namespace capalloc::baselines
