#include "capalloc/simplex.hpp"

#include <cmath>
#include <stdexcept>

namespace capalloc::simplex {

namespace {
constexpr double kReducedCostTol = 1e-9;
constexpr double kPivotTol = 1e-9;
constexpr double kRatioTieTol = 1e-9;
}  // namespace

Result maximize(const Problem& problem) {
  const int n = problem.num_cols;
  const int m = static_cast<int>(problem.rows.size());
  const int width = n + m + 1;  // structural + slack + rhs

  for (double b : problem.rhs) {
    if (!(b >= 0.0)) throw std::invalid_argument("simplex: negative rhs");
  }

  // tab[r] = row of the tableau; cbar = reduced costs of the current basis.
  std::vector<std::vector<double>> tab(m, std::vector<double>(width, 0.0));
  for (int r = 0; r < m; ++r) {
    for (const auto& [col, coef] : problem.rows[r]) tab[r][col] += coef;
    tab[r][n + r] = 1.0;
    tab[r][width - 1] = problem.rhs[r];
  }
  std::vector<double> cbar(width - 1, 0.0);
  for (int j = 0; j < n; ++j) cbar[j] = problem.objective[j];

  std::vector<int> basis(m);
  for (int r = 0; r < m; ++r) basis[r] = n + r;

  Result result;
  const int max_iterations = 2000 * (m + n + 10);
  while (true) {
    // Bland: entering column is the lowest index with positive reduced cost.
    int enter = -1;
    for (int j = 0; j < width - 1; ++j) {
      if (cbar[j] > kReducedCostTol) {
        enter = j;
        break;
      }
    }
    if (enter < 0) break;

    // Ratio test; ties broken by the smallest basis variable index (Bland).
    int leave = -1;
    double best_ratio = 0.0;
    for (int r = 0; r < m; ++r) {
      const double a = tab[r][enter];
      if (a <= kPivotTol) continue;
      const double ratio = tab[r][width - 1] / a;
      if (leave < 0 || ratio < best_ratio - kRatioTieTol ||
          (std::abs(ratio - best_ratio) <= kRatioTieTol && basis[r] < basis[leave])) {
        leave = r;
        best_ratio = ratio;
      }
    }
    if (leave < 0) {
      result.status = Status::Unbounded;
      return result;
    }

    // Pivot on (leave, enter).
    std::vector<double>& prow = tab[leave];
    const double pivot = prow[enter];
    for (double& v : prow) v /= pivot;
    prow[enter] = 1.0;
    for (int r = 0; r < m; ++r) {
      if (r == leave) continue;
      const double factor = tab[r][enter];
      if (factor == 0.0) continue;
      std::vector<double>& row = tab[r];
      for (int j = 0; j < width; ++j) row[j] -= factor * prow[j];
      row[enter] = 0.0;
      if (row[width - 1] < 0.0 && row[width - 1] > -1e-12) row[width - 1] = 0.0;
    }
    const double cfactor = cbar[enter];
    if (cfactor != 0.0) {
      for (int j = 0; j < width - 1; ++j) cbar[j] -= cfactor * prow[j];
      cbar[enter] = 0.0;
    }
    basis[leave] = enter;

    if (++result.iterations > max_iterations) {
      result.status = Status::IterationLimit;
      return result;
    }
  }

  result.x.assign(n, 0.0);
  for (int r = 0; r < m; ++r) {
    if (basis[r] < n) {
      double v = tab[r][width - 1];
      if (v < 0.0 && v > -1e-12) v = 0.0;
      result.x[basis[r]] = v;
    }
  }
  double obj = 0.0;
  for (int j = 0; j < n; ++j) obj += problem.objective[j] * result.x[j];
  result.objective = obj;
  result.status = Status::Optimal;
  return result;
}

}  // namespace capalloc::simplex
