#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <sstream>

#include "capalloc/instance.hpp"
#include "capalloc/lp.hpp"
#include "capalloc/rng.hpp"

using namespace capalloc;
namespace fs = std::filesystem;

namespace {

lp::LpSolution solve_or_die(const lp::LpModel& model) {
  lp::LpSolution sol = lp::solve(model);
  REQUIRE(sol.status == lp::SolveStatus::Optimal);
  REQUIRE(lp::check_feasibility(sol, model, 1e-8).ok());
  return sol;
}

long count_rows(const lp::LpModel& model, const std::string& prefix) {
  return std::count_if(model.rows.begin(), model.rows.end(), [&](const lp::LpModel::Row& r) {
    return r.name.rfind(prefix, 0) == 0;
  });
}

BernoulliInstance single_edge() {
  BernoulliInstance inst;
  inst.n = 1;
  inst.rounds.push_back({1.0, 1, {1.0}, {1.0}});
  return inst;
}

}  // namespace

TEST_CASE("lp-gap model has 4 variables, 2 capacity rows, 4 online rows") {
  lp::LpModel model = lp::build_bernoulli(gen_lp_gap());
  CHECK(model.num_vars == 4);
  CHECK(count_rows(model, "cap[") == 2);
  CHECK(count_rows(model, "onl[") == 4);
}

TEST_CASE("single edge model is x <= 1 twice with objective x") {
  lp::LpModel model = lp::build_bernoulli(single_edge());
  REQUIRE(model.num_vars == 1);
  CHECK(model.objective[0] == 1.0);
  REQUIRE(model.rows.size() == 2);
  for (const auto& row : model.rows) {
    REQUIRE(row.coeffs.size() == 1);
    CHECK(row.coeffs[0].second == 1.0);
    CHECK(row.rhs == 1.0);
  }
  lp::LpSolution sol = solve_or_die(model);
  CHECK(sol.objective == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("bdm capacity rhs for round one is 3 at n=4") {
  lp::LpModel model = lp::build_bernoulli(gen_bdm_counterexample(4));
  auto it = std::find_if(model.rows.begin(), model.rows.end(),
                         [](const lp::LpModel::Row& r) { return r.name == "cap[0]"; });
  REQUIRE(it != model.rows.end());
  CHECK(it->rhs == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("lp-gap optimum is 2.0 at x = 1/2 on every pair") {
  BernoulliInstance inst = gen_lp_gap();
  lp::LpModel model = lp::build_bernoulli(inst);
  lp::LpSolution sol = solve_or_die(model);
  CHECK(sol.objective == doctest::Approx(2.0).epsilon(1e-10));
  auto x = lp::x_grid(inst, model, sol);
  for (int t = 0; t < 2; ++t) {
    for (int i = 0; i < 2; ++i) CHECK(x[t][i] == doctest::Approx(0.5).epsilon(1e-9));
  }
}

TEST_CASE("bdm LP optimum is the unique x_{i,1}=0.75, x_{i,2}=0.25 with value 19") {
  BernoulliInstance inst = gen_bdm_counterexample(4);
  lp::LpModel model = lp::build_bernoulli(inst);
  lp::LpSolution sol = solve_or_die(model);
  CHECK(sol.objective == doctest::Approx(19.0).epsilon(1e-10));
  auto x = lp::x_grid(inst, model, sol);
  for (int i = 0; i < 4; ++i) {
    CHECK(x[0][i] == doctest::Approx(0.75).epsilon(1e-9));
    CHECK(x[1][i] == doctest::Approx(0.25).epsilon(1e-9));
  }
}

TEST_CASE("all-zero values give objective zero") {
  BernoulliInstance inst = gen_lp_gap();
  for (auto& r : inst.rounds) r.values = {0.0, 0.0};
  lp::LpSolution sol = solve_or_die(lp::build_bernoulli(inst));
  CHECK(sol.objective == 0.0);
}

TEST_CASE("check_feasibility reports a perturbed constraint") {
  BernoulliInstance inst = gen_lp_gap();
  lp::LpModel model = lp::build_bernoulli(inst);
  lp::LpSolution sol = solve_or_die(model);
  const double tol = 1e-8;
  sol.x[0] += 2 * tol;
  lp::FeasibilityReport report = lp::check_feasibility(sol, model, tol);
  CHECK(!report.ok());
}

TEST_CASE("y_prefix: empty prefix is zero, lp-gap prefix is 0.5") {
  BernoulliInstance inst = gen_lp_gap();
  lp::LpModel model = lp::build_bernoulli(inst);
  lp::LpSolution sol = solve_or_die(model);
  CHECK(lp::y_prefix(inst, model, sol, 0, 0) == 0.0);
  CHECK(lp::y_prefix(inst, model, sol, 1, 0) == 0.0);
  CHECK(lp::y_prefix(inst, model, sol, 0, 1) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("online constraints imply per-user success-weighted mass at most one") {
  RngStream rng(31);
  for (int rep = 0; rep < 25; ++rep) {
    RandomInstanceParams params;
    params.n = rng.uniform_int(1, 4);
    params.T = rng.uniform_int(1, 4);
    params.c_min = 1;
    params.c_max = 3;
    params.v_max = 10.0;
    params.q_min = 0.2;
    params.p_min = 0.1;
    BernoulliInstance inst = gen_random(params, 100 + rep);
    lp::LpModel model = lp::build_bernoulli(inst);
    lp::LpSolution sol = solve_or_die(model);
    for (int i = 0; i < inst.n; ++i) {
      double mass = lp::y_prefix(inst, model, sol, i, inst.num_rounds());
      CHECK(mass <= 1.0 + 1e-8);
    }
  }
}

TEST_CASE("scaling values scales the objective and keeps an optimal x optimal") {
  BernoulliInstance inst = gen_random({3, 3, 1, 2, 0.0, 5.0, 0.5, 1.0, 0.3, 1.0}, 17);
  lp::LpModel base = lp::build_bernoulli(inst);
  lp::LpSolution sol = solve_or_die(base);

  BernoulliInstance scaled = inst;
  const double factor = 3.5;
  for (auto& r : scaled.rounds) {
    for (double& v : r.values) v *= factor;
  }
  lp::LpModel scaled_model = lp::build_bernoulli(scaled);
  lp::LpSolution scaled_sol = solve_or_die(scaled_model);
  CHECK(scaled_sol.objective == doctest::Approx(factor * sol.objective).epsilon(1e-9));

  // The original optimal x stays optimal for the scaled objective.
  double rescored = 0.0;
  for (int col = 0; col < base.num_vars; ++col) rescored += scaled_model.objective[col] * sol.x[col];
  CHECK(rescored == doctest::Approx(scaled_sol.objective).epsilon(1e-9));
}

TEST_CASE("p = 0 rounds carry no variables") {
  BernoulliInstance inst = gen_lp_gap();
  inst.rounds[0].p = 0.0;
  lp::LpModel model = lp::build_bernoulli(inst);
  CHECK(model.num_vars == 2);
  CHECK(model.column({0, 0, -1}) == -1);
  lp::LpSolution sol = solve_or_die(model);
  CHECK(sol.value(model, {0, 0, -1}) == 0.0);
  CHECK(sol.objective == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("solve is deterministic") {
  lp::LpModel model = lp::build_bernoulli(gen_random({4, 4, 1, 3, 0.0, 9.0, 0.3, 1.0, 0.2, 1.0}, 5));
  lp::LpSolution a = lp::solve(model);
  lp::LpSolution b = lp::solve(model);
  REQUIRE(a.x.size() == b.x.size());
  for (std::size_t i = 0; i < a.x.size(); ++i) CHECK(a.x[i] == b.x[i]);
  CHECK(a.objective == b.objective);
}

TEST_CASE("general LP on to_general(lp-gap) matches the Bernoulli optimum") {
  BernoulliInstance inst = gen_lp_gap();
  double bern = solve_or_die(lp::build_bernoulli(inst)).objective;
  double gen = solve_or_die(lp::build_general(to_general(inst), /*stochastic=*/false)).objective;
  CHECK(gen == doctest::Approx(bern).epsilon(1e-9));
}

TEST_CASE("general LP preserves the Bernoulli optimum on random instances") {
  for (int rep = 0; rep < 10; ++rep) {
    RandomInstanceParams params;
    params.n = 3;
    params.T = 3;
    params.c_min = 1;
    params.c_max = 3;
    params.v_max = 4.0;
    params.q_min = 0.3;  // mixed q exercises the stochastic general form
    params.p_min = 0.2;
    BernoulliInstance inst = gen_random(params, 300 + rep);
    double bern = solve_or_die(lp::build_bernoulli(inst)).objective;
    double gen = solve_or_die(lp::build_general(to_general(inst), /*stochastic=*/true)).objective;
    CHECK(gen == doctest::Approx(bern).epsilon(1e-9));
  }
}

TEST_CASE("one certain round reduces to a fractional knapsack over users") {
  GeneralInstance inst;
  inst.n = 5;
  Realization r;
  r.p = 1.0;
  r.c = 3;
  r.values = {4.0, 1.0, 7.0, 2.0, 5.0};
  r.q = {0.5, 1.0, 0.9, 1.0, 0.6};
  inst.rounds.push_back({{r}});
  lp::LpSolution sol = solve_or_die(lp::build_general(inst, /*stochastic=*/true));

  std::vector<double> weighted(inst.n);
  for (int i = 0; i < inst.n; ++i) weighted[i] = r.values[i] * r.q[i];
  std::sort(weighted.rbegin(), weighted.rend());
  double expect = weighted[0] + weighted[1] + weighted[2];
  CHECK(sol.objective == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("stochastic flag is a no-op when q is identically one") {
  GeneralInstance inst = to_general(gen_lp_gap());
  lp::LpModel plain = lp::build_general(inst, false);
  lp::LpModel stoch = lp::build_general(inst, true);
  REQUIRE(plain.num_vars == stoch.num_vars);
  CHECK(plain.objective == stoch.objective);
  REQUIRE(plain.rows.size() == stoch.rows.size());
  for (std::size_t r = 0; r < plain.rows.size(); ++r) {
    CHECK(plain.rows[r].name == stoch.rows[r].name);
    CHECK(plain.rows[r].rhs == stoch.rows[r].rhs);
    CHECK(plain.rows[r].coeffs == stoch.rows[r].coeffs);
  }
}

TEST_CASE("solution files round trip through disk") {
  fs::path dir = fs::temp_directory_path() / "capalloc_test_lp";
  fs::create_directories(dir);
  BernoulliInstance inst = gen_bdm_counterexample(3);
  lp::LpModel model = lp::build_bernoulli(inst);
  lp::LpSolution sol = solve_or_die(model);
  fs::path path = dir / "sol.json";
  lp::write_solution(model, sol, path);
  lp::LpSolution loaded = lp::read_solution(model, path);
  REQUIRE(loaded.x.size() == sol.x.size());
  for (std::size_t i = 0; i < sol.x.size(); ++i) CHECK(loaded.x[i] == sol.x[i]);
  CHECK(loaded.objective == sol.objective);

  // A general model refuses a bernoulli solution file.
  lp::LpModel gmodel = lp::build_general(to_general(inst), true);
  CHECK_THROWS_AS(lp::read_solution(gmodel, path), SchemaError);
}

TEST_CASE("lp format dump mentions every row") {
  lp::LpModel model = lp::build_bernoulli(gen_lp_gap());
  std::ostringstream os;
  lp::write_lp_format(model, os);
  std::string text = os.str();
  CHECK(text.find("Maximize") != std::string::npos);
  CHECK(text.find("cap_0_") != std::string::npos);
  CHECK(text.find("onl_1_1_") != std::string::npos);
  CHECK(text.find("End") != std::string::npos);
}
