#include "capalloc/lp.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "capalloc/simplex.hpp"
#include "capalloc/util.hpp"

namespace capalloc::lp {

using nlohmann::json;

LpModel build_bernoulli(const BernoulliInstance& inst) {
  LpModel model;
  model.n = inst.n;
  model.T = inst.num_rounds();

  for (int t = 0; t < model.T; ++t) {
    const RoundSpec& r = inst.rounds[t];
    if (r.p <= 0.0 || r.c <= 0) continue;  // such variables are pinned to zero
    for (int i = 0; i < model.n; ++i) {
      VarKey key{i, t, -1};
      model.columns[key] = model.num_vars++;
      model.keys.push_back(key);
      model.objective.push_back(r.q[i] * r.values[i]);
    }
  }

  for (int t = 0; t < model.T; ++t) {
    const RoundSpec& r = inst.rounds[t];
    if (r.p <= 0.0 || r.c <= 0) continue;
    LpModel::Row cap;
    cap.name = cat("cap[", t, "]");
    cap.rhs = r.p * r.c;
    for (int i = 0; i < model.n; ++i) cap.coeffs.emplace_back(model.column({i, t, -1}), 1.0);
    model.rows.push_back(std::move(cap));
  }

  // Online rows: x_{i,t} + p_t * sum_{t'<t} q_{i,t'} x_{i,t'} <= p_t.
  for (int t = 0; t < model.T; ++t) {
    const RoundSpec& r = inst.rounds[t];
    if (r.p <= 0.0 || r.c <= 0) continue;
    for (int i = 0; i < model.n; ++i) {
      LpModel::Row row;
      row.name = cat("onl[", i, ",", t, "]");
      row.rhs = r.p;
      row.coeffs.emplace_back(model.column({i, t, -1}), 1.0);
      for (int prev = 0; prev < t; ++prev) {
        int col = model.column({i, prev, -1});
        if (col < 0) continue;
        double coef = r.p * inst.rounds[prev].q[i];
        if (coef != 0.0) row.coeffs.emplace_back(col, coef);
      }
      model.rows.push_back(std::move(row));
    }
  }
  return model;
}

LpModel build_general(const GeneralInstance& inst, bool stochastic) {
  LpModel model;
  model.general = true;
  model.stochastic = stochastic;
  model.n = inst.n;
  model.T = inst.num_rounds();

  auto weight = [&](const Realization& r, int i) { return stochastic ? r.q[i] : 1.0; };

  for (int t = 0; t < model.T; ++t) {
    const GeneralRound& round = inst.rounds[t];
    for (int j = 0; j < static_cast<int>(round.realizations.size()); ++j) {
      const Realization& r = round.realizations[j];
      if (r.p <= 0.0 || r.c <= 0) continue;
      for (int i = 0; i < model.n; ++i) {
        VarKey key{i, t, j};
        model.columns[key] = model.num_vars++;
        model.keys.push_back(key);
        model.objective.push_back(weight(r, i) * r.values[i]);
      }
    }
  }

  for (int i = 0; i < model.n; ++i) {
    LpModel::Row unit;
    unit.name = cat("unit[", i, "]");
    unit.rhs = 1.0;
    for (int t = 0; t < model.T; ++t) {
      const GeneralRound& round = inst.rounds[t];
      for (int j = 0; j < static_cast<int>(round.realizations.size()); ++j) {
        int col = model.column({i, t, j});
        if (col < 0) continue;
        double coef = weight(round.realizations[j], i);
        if (coef != 0.0) unit.coeffs.emplace_back(col, coef);
      }
    }
    if (!unit.coeffs.empty()) model.rows.push_back(std::move(unit));
  }

  for (int t = 0; t < model.T; ++t) {
    const GeneralRound& round = inst.rounds[t];
    for (int j = 0; j < static_cast<int>(round.realizations.size()); ++j) {
      const Realization& r = round.realizations[j];
      if (r.p <= 0.0 || r.c <= 0) continue;
      LpModel::Row cap;
      cap.name = cat("cap[", t, ",", j, "]");
      cap.rhs = r.p * r.c;
      for (int i = 0; i < model.n; ++i) cap.coeffs.emplace_back(model.column({i, t, j}), 1.0);
      model.rows.push_back(std::move(cap));
    }
  }

  // Online rows: x_{i,t,j} + p_{t,j} * sum_{t'<t} sum_{j'} w x_{i,t',j'} <= p_{t,j}.
  for (int t = 0; t < model.T; ++t) {
    const GeneralRound& round = inst.rounds[t];
    for (int j = 0; j < static_cast<int>(round.realizations.size()); ++j) {
      const Realization& r = round.realizations[j];
      if (r.p <= 0.0 || r.c <= 0) continue;
      for (int i = 0; i < model.n; ++i) {
        LpModel::Row row;
        row.name = cat("onl[", i, ",", t, ",", j, "]");
        row.rhs = r.p;
        row.coeffs.emplace_back(model.column({i, t, j}), 1.0);
        for (int prev = 0; prev < t; ++prev) {
          const GeneralRound& pround = inst.rounds[prev];
          for (int pj = 0; pj < static_cast<int>(pround.realizations.size()); ++pj) {
            int col = model.column({i, prev, pj});
            if (col < 0) continue;
            double coef = r.p * weight(pround.realizations[pj], i);
            if (coef != 0.0) row.coeffs.emplace_back(col, coef);
          }
        }
        model.rows.push_back(std::move(row));
      }
    }
  }
  return model;
}

LpSolution solve(const LpModel& model) {
  simplex::Problem problem;
  problem.num_cols = model.num_vars;
  problem.objective = model.objective;
  problem.rows.reserve(model.rows.size());
  problem.rhs.reserve(model.rows.size());
  for (const LpModel::Row& row : model.rows) {
    problem.rows.push_back(row.coeffs);
    problem.rhs.push_back(row.rhs);
  }

  simplex::Result res = simplex::maximize(problem);
  LpSolution sol;
  if (res.status != simplex::Status::Optimal) {
    // x = 0 is always feasible for these models, so anything but Optimal is a
    // numerical failure rather than genuine infeasibility.
    sol.status = SolveStatus::NumericalFailure;
    return sol;
  }
  sol.status = SolveStatus::Optimal;
  sol.x = std::move(res.x);
  sol.objective = res.objective;
  return sol;
}

FeasibilityReport check_feasibility(const LpSolution& sol, const LpModel& model, double tol) {
  FeasibilityReport report;
  if (static_cast<int>(sol.x.size()) != model.num_vars) {
    report.violations.push_back({"shape: solution has wrong column count", 0.0});
    return report;
  }
  for (int j = 0; j < model.num_vars; ++j) {
    if (sol.x[j] < -tol) {
      const VarKey& k = model.keys[j];
      report.violations.push_back({cat("x[", k.user, ",", k.round, "] < 0"), -sol.x[j]});
    }
  }
  for (const LpModel::Row& row : model.rows) {
    double lhs = 0.0;
    for (const auto& [col, coef] : row.coeffs) lhs += coef * sol.x[col];
    if (lhs > row.rhs + tol) {
      report.violations.push_back({row.name, lhs - row.rhs});
    }
  }
  return report;
}

double y_prefix(const BernoulliInstance& inst, const LpModel& model, const LpSolution& sol,
                int user, int round) {
  double y = 0.0;
  for (int t = 0; t < round; ++t) {
    y += sol.value(model, {user, t, -1}) * inst.rounds[t].q[user];
  }
  return y;
}

double y_prefix(const GeneralInstance& inst, const LpModel& model, const LpSolution& sol,
                int user, int round) {
  double y = 0.0;
  for (int t = 0; t < round; ++t) {
    const GeneralRound& r = inst.rounds[t];
    for (int j = 0; j < static_cast<int>(r.realizations.size()); ++j) {
      y += sol.value(model, {user, t, j}) * r.realizations[j].q[user];
    }
  }
  return y;
}

std::vector<std::vector<double>> x_grid(const BernoulliInstance& inst, const LpModel& model,
                                        const LpSolution& sol) {
  std::vector<std::vector<double>> grid(inst.num_rounds(), std::vector<double>(inst.n, 0.0));
  for (int t = 0; t < inst.num_rounds(); ++t) {
    for (int i = 0; i < inst.n; ++i) grid[t][i] = sol.value(model, {i, t, -1});
  }
  return grid;
}

std::vector<std::vector<std::vector<double>>> x_grid(const GeneralInstance& inst,
                                                     const LpModel& model,
                                                     const LpSolution& sol) {
  std::vector<std::vector<std::vector<double>>> grid(inst.num_rounds());
  for (int t = 0; t < inst.num_rounds(); ++t) {
    const GeneralRound& round = inst.rounds[t];
    grid[t].assign(round.realizations.size(), std::vector<double>(inst.n, 0.0));
    for (int j = 0; j < static_cast<int>(round.realizations.size()); ++j) {
      for (int i = 0; i < inst.n; ++i) grid[t][j][i] = sol.value(model, {i, t, j});
    }
  }
  return grid;
}

std::vector<std::vector<std::vector<double>>> embed_x_grid(
    const BernoulliInstance& inst, const std::vector<std::vector<double>>& x) {
  std::vector<std::vector<std::vector<double>>> grid(inst.num_rounds());
  for (int t = 0; t < inst.num_rounds(); ++t) {
    const double p = inst.rounds[t].p;
    const int slots = (p > 0.0 ? 1 : 0) + (p < 1.0 ? 1 : 0);  // mirrors to_general
    grid[t].assign(slots, std::vector<double>(inst.n, 0.0));
    if (p > 0.0) grid[t][0] = x[t];
  }
  return grid;
}

namespace {

std::string var_name(const VarKey& k) {
  if (k.realization < 0) return cat("x_", k.user, "_", k.round);
  return cat("x_", k.user, "_", k.round, "_", k.realization);
}

std::string lp_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

void write_lp_format(const LpModel& model, std::ostream& os) {
  os << "\\ " << kVersion << " model dump\n";
  os << "Maximize\n obj:";
  bool first = true;
  for (int j = 0; j < model.num_vars; ++j) {
    double c = model.objective[j];
    if (c == 0.0) continue;
    os << (first ? " " : (c >= 0 ? " + " : " ")) << lp_number(c) << " " << var_name(model.keys[j]);
    first = false;
  }
  if (first) os << " 0";
  os << "\nSubject To\n";
  for (const LpModel::Row& row : model.rows) {
    std::string name = row.name;
    for (char& ch : name) {
      if (ch == '[' || ch == ',' || ch == ']') ch = '_';
    }
    os << " " << name << ":";
    bool rfirst = true;
    for (const auto& [col, coef] : row.coeffs) {
      os << (rfirst ? " " : (coef >= 0 ? " + " : " ")) << lp_number(coef) << " "
         << var_name(model.keys[col]);
      rfirst = false;
    }
    os << " <= " << lp_number(row.rhs) << "\n";
  }
  os << "Bounds\n";
  for (int j = 0; j < model.num_vars; ++j) os << " 0 <= " << var_name(model.keys[j]) << "\n";
  os << "End\n";
}

void write_solution(const LpModel& model, const LpSolution& sol,
                    const std::filesystem::path& path) {
  json doc;
  doc["schema"] = kSolutionSchema;
  doc["kind"] = model.general ? "general" : "bernoulli";
  doc["stochastic"] = model.stochastic;
  doc["n"] = model.n;
  doc["T"] = model.T;
  doc["status"] = sol.status == SolveStatus::Optimal ? "optimal" : "error";
  doc["objective"] = sol.objective;
  json entries = json::array();
  for (int col = 0; col < model.num_vars; ++col) {
    const VarKey& k = model.keys[col];
    json e{{"i", k.user}, {"t", k.round}, {"value", sol.x[col]}};
    if (k.realization >= 0) e["j"] = k.realization;
    entries.push_back(std::move(e));
  }
  doc["x"] = std::move(entries);
  write_file_atomic(path, doc.dump(2) + "\n");
}

LpSolution read_solution(const LpModel& model, const std::filesystem::path& path) {
  json doc = json::parse(read_file(path), nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw SchemaError(cat(path.string(), ": not a valid solution file"));
  }
  if (!doc.contains("schema") || doc["schema"] != kSolutionSchema) {
    throw SchemaError(cat(path.string(), ": expected schema ", kSolutionSchema));
  }
  const std::string kind = doc.value("kind", "");
  if (kind != (model.general ? "general" : "bernoulli")) {
    throw SchemaError(cat(path.string(), ": solution kind \"", kind,
                          "\" does not match the instance"));
  }
  if (doc.value("n", -1) != model.n || doc.value("T", -1) != model.T) {
    throw SchemaError(cat(path.string(), ": solution shape does not match the instance"));
  }
  LpSolution sol;
  sol.status = doc.value("status", "") == "optimal" ? SolveStatus::Optimal
                                                    : SolveStatus::NumericalFailure;
  sol.objective = doc.value("objective", 0.0);
  sol.x.assign(model.num_vars, 0.0);
  if (!doc.contains("x") || !doc["x"].is_array()) {
    throw SchemaError(cat(path.string(), ": missing \"x\" array"));
  }
  for (const json& e : doc["x"]) {
    VarKey key{e.value("i", -1), e.value("t", -1), e.value("j", -1)};
    int col = model.column(key);
    double v = e.value("value", 0.0);
    if (col < 0) {
      if (std::abs(v) > 1e-9) {
        throw SchemaError(cat(path.string(), ": nonzero value for pinned variable (i=",
                              key.user, ", t=", key.round, ")"));
      }
      continue;
    }
    sol.x[col] = v;
  }
  return sol;
}

}  // namespace capalloc::lp
