#include "capalloc/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "capalloc/baselines.hpp"
#include "capalloc/constants.hpp"
#include "capalloc/lp.hpp"
#include "capalloc/sim.hpp"
#include "capalloc/util.hpp"

namespace capalloc::diag {

KappaCheck check_kappa_inequality(double kappa, int min_c) {
  if (!(kappa > 0.0 && kappa < 0.5)) {
    throw std::invalid_argument("check_kappa_inequality: kappa outside (0, 0.5)");
  }
  if (min_c < 1) throw std::invalid_argument("check_kappa_inequality: min_c must be >= 1");
  const DerivedConstants c = DerivedConstants::at(kappa);
  const double lhs = c.tau - ((1.0 - c.tau) / min_c + c.delta * (0.5 + kappa));
  const double rhs = 2.0 * kappa / (0.5 - kappa);
  KappaCheck result;
  result.slack = lhs - rhs;
  result.holds = result.slack >= 0.0;
  return result;
}

double solve_kappa(int min_c) {
  double lo = 1e-9;
  double hi = 0.4;
  if (!check_kappa_inequality(lo, min_c).holds) return 0.0;
  while (hi - lo > 1e-7) {
    const double mid = 0.5 * (lo + hi);
    if (check_kappa_inequality(mid, min_c).holds) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

KappaTable kappa_table(int max_c) {
  if (max_c < 1) throw std::invalid_argument("kappa_table: max_c must be >= 1");
  KappaTable table;
  for (int c = 1; c <= max_c; ++c) table.rows.push_back({c, solve_kappa(c)});
  return table;
}

void write_kappa_table_csv(std::ostream& os, const KappaTable& table,
                           const std::vector<std::pair<std::string, std::string>>& meta) {
  sim::write_csv_header(os, meta);
  os << "min_c,kappa\n";
  for (const KappaTable::Row& row : table.rows) {
    os << row.min_c << "," << sim::fmt_double(row.kappa) << "\n";
  }
}

CorrelationAudit correlation_audit(const oracles::ExactReport& report, double kappa,
                                   double tol) {
  const DerivedConstants c = DerivedConstants::at(kappa);
  CorrelationAudit audit;
  const int states = static_cast<int>(report.avail.size());  // T + 1
  for (int t = 0; t < states; ++t) {
    for (int i = 0; i < report.n; ++i) {
      for (int j = i + 1; j < report.n; ++j) {
        CorrelationAudit::Entry e;
        e.t = t;
        e.i = i;
        e.j = j;
        e.joint = report.joint_avail[t][i][j];
        e.product = report.avail[t][i] * report.avail[t][j];
        e.f_factor = std::min(correlation_growth(report.y[t][i], kappa),
                              correlation_growth(report.y[t][j], kappa));
        e.delta_factor = c.delta;
        e.early_prefix =
            t == 0 || (report.y[t - 1][i] <= c.tau && report.y[t - 1][j] <= c.tau);
        if (e.early_prefix && e.joint > e.f_factor * e.product + tol) e.f_violated = true;
        if (e.joint > e.delta_factor * e.product + tol) e.delta_violated = true;
        if (e.f_violated || e.delta_violated) ++audit.violations;
        if (e.joint > e.product + 1e-12) audit.positive_correlation = true;
        audit.entries.push_back(e);
      }
    }
  }
  return audit;
}

void write_audit_csv(std::ostream& os, const CorrelationAudit& audit,
                     const std::vector<std::pair<std::string, std::string>>& meta) {
  sim::write_csv_header(os, meta);
  os << "state,user_i,user_j,joint,product,f_factor,delta_factor,early_prefix,f_violated,"
        "delta_violated\n";
  for (const CorrelationAudit::Entry& e : audit.entries) {
    os << e.t << "," << e.i << "," << e.j << "," << sim::fmt_double(e.joint) << ","
       << sim::fmt_double(e.product) << "," << sim::fmt_double(e.f_factor) << ","
       << sim::fmt_double(e.delta_factor) << "," << (e.early_prefix ? 1 : 0) << ","
       << (e.f_violated ? 1 : 0) << "," << (e.delta_violated ? 1 : 0) << "\n";
  }
}

std::string algorithm_name(Algorithm alg) {
  switch (alg) {
    case Algorithm::TwoProposalExact: return "twoproposal-exact";
    case Algorithm::TwoProposalSampled: return "twoproposal-sampled";
    case Algorithm::TwoProposalGeneral: return "twoproposal-general";
    case Algorithm::Bdm: return "bdm";
    case Algorithm::Greedy: return "greedy";
  }
  return "unknown";
}

std::optional<Algorithm> algorithm_from_name(const std::string& name) {
  for (Algorithm alg : {Algorithm::TwoProposalExact, Algorithm::TwoProposalSampled,
                        Algorithm::TwoProposalGeneral, Algorithm::Bdm, Algorithm::Greedy}) {
    if (algorithm_name(alg) == name) return alg;
  }
  return std::nullopt;
}

RatioReport ratio_report(const BernoulliInstance& inst, const std::vector<Algorithm>& algorithms,
                         long long trials, std::uint64_t seed, int jobs) {
  RatioReport report;
  lp::LpModel model = lp::build_bernoulli(inst);
  lp::LpSolution sol = lp::solve(model);
  if (sol.status != lp::SolveStatus::Optimal) {
    throw std::runtime_error("ratio_report: LP solve failed");
  }
  report.lp_objective = sol.objective;
  try {
    report.opt_online = oracles::opt_online(inst).value;
  } catch (const oracles::BudgetError& e) {
    report.opt_online_note = e.what();
  }

  const auto x = lp::x_grid(inst, model, sol);
  const std::vector<int> slots(inst.num_rounds(), 1);

  for (Algorithm alg : algorithms) {
    sim::TrialFn fn;
    std::unique_ptr<alloc::TwoProposalExperiment> two;
    std::unique_ptr<alloc::GeneralTwoProposalExperiment> general;
    std::unique_ptr<baselines::BdmExperiment> bdm;
    std::unique_ptr<baselines::GreedyExperiment> greedy;
    std::vector<int> general_slots;

    switch (alg) {
      case Algorithm::TwoProposalExact:
      case Algorithm::TwoProposalSampled: {
        alloc::AlgoConfig cfg;
        cfg.seed = seed;
        cfg.rho_mode = alg == Algorithm::TwoProposalExact ? alloc::RhoMode::Exact
                                                          : alloc::RhoMode::Sampled;
        two = std::make_unique<alloc::TwoProposalExperiment>(inst, x, cfg);
        two->prepare();
        fn = [&exp = *two](std::uint64_t trial) { return exp.run_trial(trial); };
        break;
      }
      case Algorithm::TwoProposalGeneral: {
        alloc::AlgoConfig cfg;
        cfg.seed = seed;
        GeneralInstance gen = to_general(inst);
        general = std::make_unique<alloc::GeneralTwoProposalExperiment>(
            gen, lp::embed_x_grid(inst, x), cfg);
        general->prepare();
        fn = [&exp = *general](std::uint64_t trial) { return exp.run_trial(trial); };
        break;
      }
      case Algorithm::Bdm:
        bdm = std::make_unique<baselines::BdmExperiment>(inst, x, seed);
        fn = [&exp = *bdm](std::uint64_t trial) { return exp.run_trial(trial); };
        break;
      case Algorithm::Greedy:
        greedy = std::make_unique<baselines::GreedyExperiment>(inst, seed);
        fn = [&exp = *greedy](std::uint64_t trial) { return exp.run_trial(trial); };
        break;
    }

    sim::Aggregate agg = sim::run_trials(fn, trials, jobs, slots, inst.n);
    RatioReport::Row row;
    row.algorithm = algorithm_name(alg);
    row.trials = trials;
    row.mean_welfare = agg.welfare_mean;
    row.ci95_half = agg.welfare_ci95_half;
    row.ratio_to_lp = report.lp_objective > 0.0 ? agg.welfare_mean / report.lp_objective : 0.0;
    if (report.opt_online && *report.opt_online > 0.0) {
      row.ratio_to_opt_online = agg.welfare_mean / *report.opt_online;
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

void write_ratio_report_csv(std::ostream& os, const RatioReport& report,
                            const std::vector<std::pair<std::string, std::string>>& meta) {
  auto extended = meta;
  extended.emplace_back("lp_objective", sim::fmt_double(report.lp_objective));
  if (report.opt_online) {
    extended.emplace_back("opt_online", sim::fmt_double(*report.opt_online));
  } else {
    extended.emplace_back("opt_online", "skipped: " + report.opt_online_note);
  }
  sim::write_csv_header(os, extended);
  os << "algorithm,trials,mean_welfare,ci95_half,ratio_to_lp,ratio_to_opt_online\n";
  for (const RatioReport::Row& row : report.rows) {
    os << row.algorithm << "," << row.trials << "," << sim::fmt_double(row.mean_welfare) << ","
       << sim::fmt_double(row.ci95_half) << "," << sim::fmt_double(row.ratio_to_lp) << ",";
    if (row.ratio_to_opt_online) os << sim::fmt_double(*row.ratio_to_opt_online);
    os << "\n";
  }
}

}  // namespace capalloc::diag
