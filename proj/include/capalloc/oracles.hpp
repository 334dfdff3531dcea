#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "capalloc/instance.hpp"

namespace capalloc::oracles {

// Raised when an exact computation would exceed its work budget; carries the
// estimated work so callers can report what would have been needed.
class BudgetError : public std::runtime_error {
 public:
  BudgetError(const std::string& msg, double required, double limit)
      : std::runtime_error(msg), required(required), limit(limit) {}
  double required = 0.0;
  double limit = 0.0;
};

inline constexpr double kDefaultOptOnlineBudget = 5e8;
inline constexpr double kDefaultEngineBudget = 2.5e8;

// Optimum online value by exact backward induction over (round, availability
// subset), with the inner maximization over allocation subsets of size at
// most c_t and exact expectation over success patterns.
struct OptOnlineValue {
  double value = 0.0;
  // table[t][mask]: optimum welfare from round t on, given the availability
  // mask; table[T][mask] = 0.
  std::vector<std::vector<double>> table;
};

OptOnlineValue opt_online(const BernoulliInstance& inst,
                          double budget = kDefaultOptOnlineBudget);
OptOnlineValue opt_online(const GeneralInstance& inst,
                          double budget = kDefaultOptOnlineBudget);

// Exact law of the two-proposal allocator on a Bernoulli instance: the joint
// distribution over availability masks is propagated round by round, mixing
// exactly over arrival coins, both pivotal-sampling laws, acceptance coins
// and success coins.  The rho values reported here are the ones the
// allocator's exact mode uses.
struct ExactReport {
  int n = 0;
  int T = 0;
  double kappa = 0.0;
  // Unconditional allocation probabilities per pair, split by proposal stage.
  std::vector<std::vector<double>> prob_first;   // [t][i]
  std::vector<std::vector<double>> prob_second;  // [t][i]
  // E[1[i available and unallocated after the first stage] (1 - A_t/c_t)],
  // conditioned on round t arriving; zero for skipped rounds.
  std::vector<std::vector<double>> rho;  // [t][i]
  std::vector<std::vector<double>> alpha;  // [t][i]
  std::vector<std::vector<double>> beta;   // [t][i], capped value used by the algorithm
  std::vector<std::vector<double>> y;      // [t][i], success-weighted prefix mass
  // Availability: avail[t][i] = Pr[user i free at the start of round t],
  // t = 0..T where index T is the state after the last round.
  std::vector<std::vector<double>> avail;
  // joint_avail[t][i][j] = Pr[i and j both free at the start of round t].
  std::vector<std::vector<std::vector<double>>> joint_avail;
  double expected_welfare = 0.0;
  // Largest raw beta argument (numerator / rho) over late pairs; at
  // kappa = 0.0115 this never exceeds one, making the min cap redundant.
  double max_beta_raw = 0.0;
};

ExactReport exact_report(const BernoulliInstance& inst,
                         const std::vector<std::vector<double>>& x, double kappa,
                         double budget = kDefaultEngineBudget);

// Same engine over general rounds; per-realization quantities are indexed
// [t][j][i], with prob_* unconditional (they include the factor p_{t,j}).
struct GeneralExactReport {
  int n = 0;
  int T = 0;
  double kappa = 0.0;
  std::vector<std::vector<std::vector<double>>> prob_first;
  std::vector<std::vector<std::vector<double>>> prob_second;
  std::vector<std::vector<std::vector<double>>> rho;   // conditional on realization j
  std::vector<std::vector<std::vector<double>>> beta;
  std::vector<std::vector<double>> alpha;  // [t][i]
  std::vector<std::vector<double>> y;      // [t][i]
  std::vector<std::vector<double>> avail;
  std::vector<std::vector<std::vector<double>>> joint_avail;
  double expected_welfare = 0.0;
  double max_beta_raw = 0.0;
};

GeneralExactReport exact_report(const GeneralInstance& inst,
                                const std::vector<std::vector<std::vector<double>>>& x,
                                double kappa, double budget = kDefaultEngineBudget);

// Monte-Carlo estimate of the optimum offline (prophet) value: per sampled
// arrival path, the maximum expected-weight capacitated assignment, solved
// exactly by subset DP on tiny instances and by successive shortest
// augmenting paths otherwise.
struct OfflineEstimate {
  double mean = 0.0;
  double ci95_half = 0.0;
  long long trials = 0;
};

OfflineEstimate opt_offline_estimate(const BernoulliInstance& inst, long long trials,
                                     std::uint64_t seed);
OfflineEstimate opt_offline_estimate(const GeneralInstance& inst, long long trials,
                                     std::uint64_t seed);

// Exposed for testing: the two per-path assignment solvers.
double assignment_value_dp(int n, const std::vector<int>& caps,
                           const std::vector<std::vector<double>>& weights);
double assignment_value_flow(int n, const std::vector<int>& caps,
                             const std::vector<std::vector<double>>& weights);

}  // namespace capalloc::oracles
