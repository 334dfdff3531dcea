#pragma once

#include <utility>
#include <vector>

namespace capalloc::simplex {

// Maximize obj . x subject to rows[r] . x <= rhs[r] and x >= 0, with all
// rhs >= 0 so the slack basis is feasible from the start.  Dense tableau
// with Bland's rule: deterministic pivots and no cycling.  Intended for the
// small dense models this project builds (at most a few hundred columns).
struct Problem {
  int num_cols = 0;
  std::vector<double> objective;                              // size num_cols
  std::vector<std::vector<std::pair<int, double>>> rows;      // sparse rows
  std::vector<double> rhs;
};

enum class Status { Optimal, Unbounded, IterationLimit };

struct Result {
  Status status = Status::Optimal;
  std::vector<double> x;
  double objective = 0.0;
  int iterations = 0;
};

Result maximize(const Problem& problem);

}  // namespace capalloc::simplex
