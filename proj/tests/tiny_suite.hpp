// Shared fixtures: the tiny-instance suite the acceptance criteria run on,
// a deterministic late-pair gadget, and solve helpers.
#pragma once

#include <cmath>
#include <vector>

#include "capalloc/instance.hpp"
#include "capalloc/lp.hpp"
#include "capalloc/rng.hpp"

namespace capalloc::testing {

struct Solved {
  BernoulliInstance inst;
  lp::LpModel model;
  lp::LpSolution sol;
  std::vector<std::vector<double>> x;
};

inline Solved solve_instance(const BernoulliInstance& inst) {
  Solved s;
  s.inst = inst;
  s.model = lp::build_bernoulli(inst);
  s.sol = lp::solve(s.model);
  if (s.sol.status != lp::SolveStatus::Optimal) throw std::runtime_error("LP solve failed");
  s.x = lp::x_grid(inst, s.model, s.sol);
  return s;
}

// 25 random tiny instances: n <= 4, T <= 4, c <= 3, mixed q.
inline std::vector<BernoulliInstance> tiny_suite() {
  std::vector<BernoulliInstance> suite;
  RngStream shape(20240901);
  for (int k = 0; k < 25; ++k) {
    RandomInstanceParams params;
    params.n = shape.uniform_int(2, 4);
    params.T = shape.uniform_int(2, 4);
    params.c_min = 1;
    params.c_max = 3;
    params.v_min = 0.0;
    params.v_max = 10.0;
    params.q_min = 0.25;
    params.q_max = 1.0;
    params.p_min = 0.3;
    params.p_max = 1.0;
    suite.push_back(gen_random(params, 4200 + k));
  }
  return suite;
}

// Two users, a near-certain high-value capacity-2 round followed by a
// low-value round; the LP optimum pushes the prefix mass past tau so the
// second round's pairs are late with positive x.
inline BernoulliInstance late_gadget() {
  BernoulliInstance inst;
  inst.n = 2;
  inst.rounds.push_back({0.97, 2, {5.0, 5.0}, {1.0, 1.0}});
  inst.rounds.push_back({1.0, 2, {1.0, 1.0}, {1.0, 1.0}});
  return inst;
}

// As above with stochastic rewards in the late round.
inline BernoulliInstance late_gadget_stochastic() {
  BernoulliInstance inst;
  inst.n = 2;
  inst.rounds.push_back({0.98, 2, {5.0, 5.0}, {1.0, 1.0}});
  inst.rounds.push_back({1.0, 2, {1.0, 1.0}, {0.6, 0.8}});
  return inst;
}

inline double standard_error(double p, double trials) {
  return std::sqrt(std::max(p * (1.0 - p), 0.0) / trials);
}

}  // namespace capalloc::testing
