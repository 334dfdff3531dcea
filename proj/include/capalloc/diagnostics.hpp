#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "capalloc/instance.hpp"
#include "capalloc/oracles.hpp"

namespace capalloc::diag {

// The capacity-dependent admissibility condition on kappa:
//   tau - ((1 - tau)/min_c + delta (0.5 + kappa)) >= 2 kappa / (0.5 - kappa),
// with tau and delta recomputed at the given kappa.
struct KappaCheck {
  bool holds = false;
  double slack = 0.0;  // lhs - rhs
};

KappaCheck check_kappa_inequality(double kappa, int min_c);

// Largest kappa with nonnegative slack, by bisection to 1e-7.
double solve_kappa(int min_c);

struct KappaTable {
  struct Row {
    int min_c = 0;
    double kappa = 0.0;
  };
  std::vector<Row> rows;
};

KappaTable kappa_table(int max_c);
void write_kappa_table_csv(std::ostream& os, const KappaTable& table,
                           const std::vector<std::pair<std::string, std::string>>& meta);

// Checks the availability-correlation bounds against an exact report:
// the f(y) bound on early-prefix states and the unrestricted delta bound.
struct CorrelationAudit {
  struct Entry {
    int t = 0;  // state index: availability at the start of round t
    int i = 0;
    int j = 0;
    double joint = 0.0;
    double product = 0.0;
    double f_factor = 0.0;      // min over orderings of f(y)
    double delta_factor = 0.0;
    bool early_prefix = false;  // both prefixes below tau at round t-1
    bool f_violated = false;
    bool delta_violated = false;
  };
  std::vector<Entry> entries;
  int violations = 0;
  bool positive_correlation = false;  // some joint strictly above the product
};

CorrelationAudit correlation_audit(const oracles::ExactReport& report, double kappa,
                                   double tol = 1e-9);
void write_audit_csv(std::ostream& os, const CorrelationAudit& audit,
                     const std::vector<std::pair<std::string, std::string>>& meta);

// Comparison table: LP optimum, optimum online when tractable, and the mean
// welfare of each requested algorithm with 95% confidence intervals.
enum class Algorithm { TwoProposalExact, TwoProposalSampled, TwoProposalGeneral, Bdm, Greedy };

std::string algorithm_name(Algorithm alg);
std::optional<Algorithm> algorithm_from_name(const std::string& name);

struct RatioReport {
  double lp_objective = 0.0;
  std::optional<double> opt_online;
  std::string opt_online_note;  // set when the oracle was skipped
  struct Row {
    std::string algorithm;
    long long trials = 0;
    double mean_welfare = 0.0;
    double ci95_half = 0.0;
    double ratio_to_lp = 0.0;
    std::optional<double> ratio_to_opt_online;
  };
  std::vector<Row> rows;
};

RatioReport ratio_report(const BernoulliInstance& inst, const std::vector<Algorithm>& algorithms,
                         long long trials, std::uint64_t seed, int jobs = 1);
void write_ratio_report_csv(std::ostream& os, const RatioReport& report,
                            const std::vector<std::pair<std::string, std::string>>& meta);

}  // namespace capalloc::diag
