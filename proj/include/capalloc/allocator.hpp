#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

#include "capalloc/constants.hpp"
#include "capalloc/instance.hpp"
#include "capalloc/lp.hpp"
#include "capalloc/oracles.hpp"
#include "capalloc/pivotal.hpp"
#include "capalloc/rng.hpp"

namespace capalloc::alloc {

enum class RhoMode { Exact, Sampled };

struct AlgoConfig {
  double kappa = 0.0115;
  // Slack of the sample-based variant; in sampled mode the algorithm runs at
  // kappa - epsilon throughout.
  double epsilon = 0.001;
  RhoMode rho_mode = RhoMode::Exact;
  // Number of simulations behind each sigma estimate.  The paper's N makes
  // the guarantee work but is astronomically large; nullopt selects it,
  // the default keeps runs at desk scale.
  std::optional<std::int64_t> sigma_sample_override = 10000;
  std::uint64_t seed = 0;

  double effective_kappa() const {
    return rho_mode == RhoMode::Sampled ? kappa - epsilon : kappa;
  }
  void validate() const;
};

// N := 50 n T (epsilon / 400T)^{-2} kappa^{-2}, with kappa already reduced.
double paper_sigma_sample_count(int n, int T, double epsilon, double kappa);

struct RoundTrace {
  bool arrived = false;
  int realized = -1;  // realization index in general mode
  std::vector<int> first_proposal;
  std::vector<int> first_allocated;
  std::vector<int> second_proposal;
  std::vector<int> second_allocated;
  std::vector<int> successes;
};

struct RunTrace {
  std::vector<RoundTrace> rounds;
  double welfare = 0.0;
};

// Line-delimited records (round, event, payload), one JSON object per line.
void write_trace(std::ostream& os, const RunTrace& trace);

// Per-experiment precomputation for a Bernoulli run: marginals, prefix
// masses, acceptance probabilities.  Construction rejects solutions that are
// infeasible beyond solver noise.
struct BernoulliPlan {
  BernoulliInstance inst;
  double kappa = 0.0;
  std::vector<std::vector<double>> x;      // [t][i]
  std::vector<std::vector<double>> y;      // [t][i] success-weighted prefix
  std::vector<std::vector<double>> alpha;  // [t][i]
  std::vector<std::vector<double>> beta_num;  // [t][i], (0.5+k)y - (0.5-k)
  std::vector<std::vector<char>> late;     // [t][i]
  std::vector<pivotal::MarginalVector> fp_marg;  // per round (empty if skipped)
  std::vector<char> skip;                  // p = 0 or c = 0 rounds

  static BernoulliPlan build(const BernoulliInstance& inst,
                             const std::vector<std::vector<double>>& x, double kappa);
};

// General-instance counterpart; slot-indexed.
struct GeneralPlan {
  GeneralInstance inst;
  double kappa = 0.0;
  std::vector<std::vector<std::vector<double>>> x;  // [t][j][i]
  std::vector<std::vector<double>> y;               // [t][i]
  std::vector<std::vector<double>> alpha;           // [t][i]
  std::vector<std::vector<double>> beta_num;        // [t][i]
  std::vector<std::vector<char>> late;              // [t][i]
  std::vector<std::vector<pivotal::MarginalVector>> fp_marg;  // [t][j]
  std::vector<std::vector<char>> slot_skip;         // [t][j]
  std::vector<std::vector<double>> slot_cum;        // [t][j] cumulative probability

  static GeneralPlan build(const GeneralInstance& inst,
                           const std::vector<std::vector<std::vector<double>>>& x,
                           double kappa);
};

// Source of the second-proposal normalizer rho_{i,t} (rho_{i,t,j} in general
// mode, slot 0 otherwise).
class RhoSource {
 public:
  virtual ~RhoSource() = default;
  virtual double rho(int t, int j, int i) const = 0;
};

// Exact-mode values, lifted from an exact engine report.
class FixedRho : public RhoSource {
 public:
  explicit FixedRho(std::vector<std::vector<std::vector<double>>> values)
      : values_(std::move(values)) {}
  double rho(int t, int j, int i) const override { return values_[t][j][i]; }

 private:
  std::vector<std::vector<std::vector<double>>> values_;  // [t][j][i]
};

// Sample-based sigma estimates: each (i,t[,j]) is the empirical average of
// the availability-weighted capacity slack over N fresh simulations of the
// algorithm up to round t, reusing cached estimates for earlier rounds.
// The cache is filled lazily on first use and shared across trials; prefill()
// makes later lookups read-only so trials can run concurrently.
class SigmaEstimator : public RhoSource {
 public:
  SigmaEstimator(const BernoulliPlan* plan, std::uint64_t seed, std::int64_t samples);
  SigmaEstimator(const GeneralPlan* plan, std::uint64_t seed, std::int64_t samples);

  double rho(int t, int j, int i) const override;
  void prefill();
  std::int64_t simulations_run() const { return simulations_; }

 private:
  double fill(int t, int j, int i) const;

  const BernoulliPlan* bernoulli_ = nullptr;
  const GeneralPlan* general_ = nullptr;
  std::uint64_t seed_ = 0;
  std::int64_t samples_ = 0;
  mutable std::vector<std::vector<std::vector<std::optional<double>>>> cache_;  // [t][j][i]
  mutable std::int64_t simulations_ = 0;
};

// One configured run of the two-proposal algorithm over a fixed instance and
// LP solution: builds the plan, materializes the rho source (exact engine
// report or sigma cache) and then serves independent trials.
class TwoProposalExperiment {
 public:
  TwoProposalExperiment(const BernoulliInstance& inst,
                        const std::vector<std::vector<double>>& x, AlgoConfig cfg);

  // Builds the exact report or prefills the sigma cache; must be called
  // before concurrent run_trial use.  Idempotent.
  void prepare();
  RunTrace run_trial(std::uint64_t trial) const;

  const BernoulliPlan& plan() const { return plan_; }
  const AlgoConfig& config() const { return cfg_; }
  // Exact-mode only: the engine report backing rho.
  const oracles::ExactReport& report() const;
  std::int64_t sigma_simulations() const;
  double rho_value(int t, int i) const { return rho_->rho(t, 0, i); }
  std::int64_t sigma_samples() const { return sigma_samples_; }

 private:
  AlgoConfig cfg_;
  BernoulliPlan plan_;
  std::int64_t sigma_samples_ = 0;
  bool prepared_ = false;
  std::unique_ptr<oracles::ExactReport> report_;
  std::unique_ptr<RhoSource> rho_;
  SigmaEstimator* sigma_ = nullptr;  // owned via rho_
};

class GeneralTwoProposalExperiment {
 public:
  GeneralTwoProposalExperiment(const GeneralInstance& inst,
                               const std::vector<std::vector<std::vector<double>>>& x,
                               AlgoConfig cfg);

  void prepare();
  RunTrace run_trial(std::uint64_t trial) const;

  const GeneralPlan& plan() const { return plan_; }
  const AlgoConfig& config() const { return cfg_; }
  const oracles::GeneralExactReport& report() const;
  std::int64_t sigma_simulations() const;

 private:
  AlgoConfig cfg_;
  GeneralPlan plan_;
  std::int64_t sigma_samples_ = 0;
  bool prepared_ = false;
  std::unique_ptr<oracles::GeneralExactReport> report_;
  std::unique_ptr<RhoSource> rho_;
  SigmaEstimator* sigma_ = nullptr;
};

// Single-trial conveniences matching the operation contracts; each builds a
// one-off experiment.  trial selects the per-trial stream bundle.
RunTrace run(const BernoulliInstance& inst, const lp::LpModel& model,
             const lp::LpSolution& sol, const AlgoConfig& cfg, std::uint64_t trial = 0);
RunTrace run_general(const GeneralInstance& inst, const lp::LpModel& model,
                     const lp::LpSolution& sol, const AlgoConfig& cfg, std::uint64_t trial = 0);

}  // namespace capalloc::alloc
