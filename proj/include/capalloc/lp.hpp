#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "capalloc/instance.hpp"

namespace capalloc::lp {

// Identifies an allocation variable: (user, round) for the Bernoulli LP,
// (user, round, realization) for the general forms.
struct VarKey {
  int user = 0;
  int round = 0;
  int realization = -1;  // -1 in Bernoulli models

  friend auto operator<=>(const VarKey&, const VarKey&) = default;
};

struct LpModel {
  int num_vars = 0;
  std::vector<double> objective;  // per column
  struct Row {
    std::string name;
    std::vector<std::pair<int, double>> coeffs;
    double rhs = 0.0;
  };
  std::vector<Row> rows;

  std::vector<VarKey> keys;        // column -> key
  std::map<VarKey, int> columns;   // key -> column; fixed-to-zero keys absent
  bool general = false;
  bool stochastic = false;
  int n = 0;
  int T = 0;

  // Column for a key, or -1 when the variable was fixed to zero
  // (p = 0 or c = 0 rounds never carry allocation mass).
  int column(const VarKey& key) const {
    auto it = columns.find(key);
    return it == columns.end() ? -1 : it->second;
  }
};

enum class SolveStatus { Optimal, Infeasible, NumericalFailure };

struct LpSolution {
  SolveStatus status = SolveStatus::NumericalFailure;
  double objective = 0.0;
  std::vector<double> x;  // per column

  double value(const LpModel& model, const VarKey& key) const {
    int col = model.column(key);
    return col < 0 ? 0.0 : x[col];
  }
};

// Objective sum x * q * v; one capacity row per round and one online row per
// (user, round) pair, with the q-weighted prefix inside the online rows.
LpModel build_bernoulli(const BernoulliInstance& inst);

// Per-user unit row, per-(round, realization) capacity row, online rows with
// double prefix sums.  The stochastic flag switches in the q factors
// (objective, unit row, online prefixes); with q identically one the two
// forms coincide.
LpModel build_general(const GeneralInstance& inst, bool stochastic);

LpSolution solve(const LpModel& model);

struct FeasibilityReport {
  struct Violation {
    std::string where;
    double amount = 0.0;
  };
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

FeasibilityReport check_feasibility(const LpSolution& sol, const LpModel& model, double tol);

// Success-weighted prefix mass y_{i,t} = sum over rounds before t (and all
// realizations) of x * q.  Round t itself is excluded.
double y_prefix(const BernoulliInstance& inst, const LpModel& model, const LpSolution& sol,
                int user, int round);
double y_prefix(const GeneralInstance& inst, const LpModel& model, const LpSolution& sol,
                int user, int round);

// Dense views of the solution used by the allocator and the oracles.
// Bernoulli: x[t][i]; general: x[t][j][i].
std::vector<std::vector<double>> x_grid(const BernoulliInstance& inst, const LpModel& model,
                                        const LpSolution& sol);
std::vector<std::vector<std::vector<double>>> x_grid(const GeneralInstance& inst,
                                                     const LpModel& model,
                                                     const LpSolution& sol);

// Lifts a Bernoulli solution grid into the realization index space of
// to_general(inst): the active realization carries x_{i,t}, the null one 0.
std::vector<std::vector<std::vector<double>>> embed_x_grid(
    const BernoulliInstance& inst, const std::vector<std::vector<double>>& x);

// Debug aid: the model in LP text format for cross-checking with external
// solvers.
void write_lp_format(const LpModel& model, std::ostream& os);

// Solution files: { schema: "capalloc-solution/1", kind, objective, x }.
inline constexpr const char* kSolutionSchema = "capalloc-solution/1";
void write_solution(const LpModel& model, const LpSolution& sol,
                    const std::filesystem::path& path);
// Reads a solution written by write_solution and re-binds it to the given
// model (shape-checked).
LpSolution read_solution(const LpModel& model, const std::filesystem::path& path);

}  // namespace capalloc::lp
