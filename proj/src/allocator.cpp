#include "capalloc/allocator.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <json.hpp>

#include "capalloc/util.hpp"

namespace capalloc::alloc {

void AlgoConfig::validate() const {
  if (!(kappa > 0.0 && kappa < 0.5)) {
    throw std::invalid_argument(cat("AlgoConfig: kappa = ", kappa, " outside (0, 0.5)"));
  }
  if (!(epsilon >= 0.0)) throw std::invalid_argument("AlgoConfig: epsilon must be >= 0");
  if (!(effective_kappa() > 0.0)) {
    throw std::invalid_argument("AlgoConfig: kappa - epsilon must stay positive in sampled mode");
  }
  if (sigma_sample_override && *sigma_sample_override <= 0) {
    throw std::invalid_argument("AlgoConfig: sigma sample count must be positive");
  }
}

double paper_sigma_sample_count(int n, int T, double epsilon, double kappa) {
  const double rel = 400.0 * T / epsilon;
  return 50.0 * n * T * rel * rel / (kappa * kappa);
}

namespace {

constexpr double kFeasTol = 1e-8;

// Per-trial stream bundle; arrivals, pivotal draws and the three coin kinds
// never share a stream, so algorithms run with the same seed see identical
// arrival sequences.
struct TrialCtx {
  RngStream arrival;
  RngStream pivotal;
  RngStream alpha;
  RngStream beta;
  RngStream success;

  static TrialCtx for_trial(std::uint64_t master, std::uint64_t trial) {
    return TrialCtx{
        RngStream(derive_seed(master, {trial, stream::arrival})),
        RngStream(derive_seed(master, {trial, stream::pivotal})),
        RngStream(derive_seed(master, {trial, stream::alpha_coin})),
        RngStream(derive_seed(master, {trial, stream::beta_coin})),
        RngStream(derive_seed(master, {trial, stream::success}))};
  }

  static TrialCtx for_sigma(std::uint64_t master, std::uint64_t t, std::uint64_t j,
                            std::uint64_t i, std::uint64_t sim) {
    auto key = [&](std::uint64_t sub) {
      return derive_seed(master, {stream::sigma, t, j, i, sim, sub});
    };
    return TrialCtx{RngStream(key(stream::arrival)), RngStream(key(stream::pivotal)),
                    RngStream(key(stream::alpha_coin)), RngStream(key(stream::beta_coin)),
                    RngStream(key(stream::success))};
  }
};

// Shared plan arithmetic: prefix masses and pair policies for one user row.
struct PairRows {
  std::vector<std::vector<double>> y, alpha, beta_num;
  std::vector<std::vector<char>> late;
};

PairRows pair_rows(int n, int T, double kappa,
                   const std::vector<std::vector<double>>& per_round_mass) {
  PairRows rows;
  rows.y.assign(T, std::vector<double>(n, 0.0));
  rows.alpha.assign(T, std::vector<double>(n, 0.0));
  rows.beta_num.assign(T, std::vector<double>(n, 0.0));
  rows.late.assign(T, std::vector<char>(n, 0));
  std::vector<double> y(n, 0.0);
  for (int t = 0; t < T; ++t) {
    for (int i = 0; i < n; ++i) {
      if (y[i] > 1.0 + 1e-6) {
        throw std::invalid_argument(
            cat("allocator: success-weighted mass for user ", i, " exceeds 1 before round ", t));
      }
      const PairPolicy p = pair_policy(y[i], kappa);
      rows.y[t][i] = y[i];
      rows.alpha[t][i] = p.alpha;
      rows.beta_num[t][i] = p.beta_numerator;
      rows.late[t][i] = p.late ? 1 : 0;
      y[i] += per_round_mass[t][i];
    }
  }
  return rows;
}

// Clamped first-proposal marginals x/p; rejects solutions that are
// infeasible beyond solver noise.
pivotal::MarginalVector round_marginals(const std::vector<double>& x, double p, int cap,
                                        const std::string& where) {
  const int n = static_cast<int>(x.size());
  std::vector<double> marg(n, 0.0);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    double v = x[i];
    if (v < -kFeasTol) throw std::invalid_argument(cat("allocator: negative x at ", where));
    if (v > p + kFeasTol) {
      throw std::invalid_argument(cat("allocator: x exceeds its arrival bound at ", where,
                                      " (infeasible solution)"));
    }
    marg[i] = std::clamp(v / p, 0.0, 1.0);
    sum += v;
  }
  if (sum > p * cap + kFeasTol) {
    throw std::invalid_argument(cat("allocator: capacity constraint violated at ", where,
                                    " (infeasible solution)"));
  }
  double msum = 0.0;
  for (double v : marg) msum += v;
  if (msum > cap) {
    const double scale = cap / msum;
    for (double& v : marg) v *= scale;
  }
  return pivotal::MarginalVector::make(std::move(marg), cap);
}

}  // namespace

BernoulliPlan BernoulliPlan::build(const BernoulliInstance& inst,
                                   const std::vector<std::vector<double>>& x, double kappa) {
  const int n = inst.n;
  const int T = inst.num_rounds();
  if (static_cast<int>(x.size()) != T) {
    throw std::invalid_argument("allocator: solution grid does not match the instance");
  }
  BernoulliPlan plan;
  plan.inst = inst;
  plan.kappa = kappa;
  plan.x = x;
  plan.skip.assign(T, 0);
  plan.fp_marg.resize(T);

  std::vector<std::vector<double>> mass(T, std::vector<double>(n, 0.0));
  for (int t = 0; t < T; ++t) {
    if (static_cast<int>(x[t].size()) != n) {
      throw std::invalid_argument("allocator: solution grid does not match the instance");
    }
    const RoundSpec& r = inst.rounds[t];
    for (int i = 0; i < n; ++i) mass[t][i] = x[t][i] * r.q[i];
    if (r.p <= 0.0 || r.c <= 0) {
      plan.skip[t] = 1;
      for (int i = 0; i < n; ++i) {
        if (std::abs(x[t][i]) > kFeasTol) {
          throw std::invalid_argument(
              cat("allocator: nonzero x on a skipped round t=", t, " (infeasible solution)"));
        }
      }
      continue;
    }
    plan.fp_marg[t] = round_marginals(x[t], r.p, r.c, cat("(t=", t, ")"));
  }

  PairRows rows = pair_rows(n, T, kappa, mass);
  plan.y = std::move(rows.y);
  plan.alpha = std::move(rows.alpha);
  plan.beta_num = std::move(rows.beta_num);
  plan.late = std::move(rows.late);
  return plan;
}

GeneralPlan GeneralPlan::build(const GeneralInstance& inst,
                               const std::vector<std::vector<std::vector<double>>>& x,
                               double kappa) {
  const int n = inst.n;
  const int T = inst.num_rounds();
  if (static_cast<int>(x.size()) != T) {
    throw std::invalid_argument("allocator: solution grid does not match the instance");
  }
  GeneralPlan plan;
  plan.inst = inst;
  plan.kappa = kappa;
  plan.x = x;
  plan.fp_marg.resize(T);
  plan.slot_skip.resize(T);
  plan.slot_cum.resize(T);

  std::vector<std::vector<double>> mass(T, std::vector<double>(n, 0.0));
  for (int t = 0; t < T; ++t) {
    const GeneralRound& round = inst.rounds[t];
    const int m = static_cast<int>(round.realizations.size());
    if (static_cast<int>(x[t].size()) != m) {
      throw std::invalid_argument("allocator: solution grid does not match the instance");
    }
    plan.fp_marg[t].resize(m);
    plan.slot_skip[t].assign(m, 0);
    plan.slot_cum[t].assign(m, 0.0);
    double cum = 0.0;
    for (int j = 0; j < m; ++j) {
      const Realization& r = round.realizations[j];
      cum += r.p;
      plan.slot_cum[t][j] = cum;
      for (int i = 0; i < n; ++i) mass[t][i] += x[t][j][i] * r.q[i];
      if (r.p <= 0.0 || r.c <= 0) {
        plan.slot_skip[t][j] = 1;
        for (int i = 0; i < n; ++i) {
          if (std::abs(x[t][j][i]) > kFeasTol) {
            throw std::invalid_argument(cat("allocator: nonzero x on a skipped realization (t=",
                                            t, ", j=", j, ")"));
          }
        }
        continue;
      }
      plan.fp_marg[t][j] = round_marginals(x[t][j], r.p, r.c, cat("(t=", t, ", j=", j, ")"));
    }
  }

  PairRows rows = pair_rows(n, T, kappa, mass);
  plan.y = std::move(rows.y);
  plan.alpha = std::move(rows.alpha);
  plan.beta_num = std::move(rows.beta_num);
  plan.late = std::move(rows.late);
  return plan;
}

namespace {

struct FirstStage {
  std::vector<int> fp;
  std::vector<int> d1;
};

// First proposal plus acceptance coins against the current availability.
FirstStage first_stage(const pivotal::MarginalVector& marg,
                       const std::vector<double>& alpha_row, TrialCtx& ctx,
                       const std::vector<std::uint8_t>& avail) {
  FirstStage fs;
  fs.fp = pivotal::sample(marg, ctx.pivotal);
  for (int i : fs.fp) {
    if (avail[i] && ctx.alpha.bernoulli(alpha_row[i])) fs.d1.push_back(i);
  }
  return fs;
}

// Executes the remainder of a round after the first stage: second proposal,
// beta coins, success coins.  Shared by the Bernoulli and general paths.
void finish_round(const pivotal::MarginalVector& marg, int cap,
                  const std::vector<double>& values, const std::vector<double>& q,
                  const std::vector<double>& beta_num_row, const std::vector<char>& late_row,
                  const RhoSource& rho, int t, int j, const FirstStage& fs, TrialCtx& ctx,
                  std::vector<std::uint8_t>& avail, double& welfare, RoundTrace* trace) {
  const int n = marg.size();
  const int allocated = static_cast<int>(fs.d1.size());

  std::vector<std::uint8_t> in_d1(n, 0);
  for (int i : fs.d1) in_d1[i] = 1;

  const double scale = 1.0 - static_cast<double>(allocated) / cap;
  std::vector<double> sp_marg(n);
  for (int i = 0; i < n; ++i) sp_marg[i] = scale * marg.m[i];
  std::vector<int> sp = pivotal::sample(
      pivotal::MarginalVector::make(std::move(sp_marg), cap - allocated), ctx.pivotal);

  std::vector<int> d2;
  for (int i : sp) {
    if (!late_row[i] || !avail[i] || in_d1[i]) continue;
    const double b = capped_beta(beta_num_row[i], rho.rho(t, j, i));
    if (ctx.beta.bernoulli(b)) d2.push_back(i);
  }
  if (allocated + static_cast<int>(d2.size()) > cap) {
    throw std::logic_error("allocator: capacity exceeded");  // cannot happen
  }

  std::vector<int> successes;
  auto resolve = [&](const std::vector<int>& users) {
    for (int i : users) {
      if (ctx.success.bernoulli(q[i])) {
        avail[i] = 0;
        welfare += values[i];
        successes.push_back(i);
      }
    }
  };
  resolve(fs.d1);
  resolve(d2);

  if (trace) {
    trace->first_proposal = fs.fp;
    trace->first_allocated = fs.d1;
    trace->second_proposal = std::move(sp);
    trace->second_allocated = std::move(d2);
    trace->successes = std::move(successes);
  }
}

void bernoulli_round(const BernoulliPlan& plan, const RhoSource& rho, int t, bool arrived,
                     TrialCtx& ctx, std::vector<std::uint8_t>& avail, double& welfare,
                     RoundTrace* trace) {
  if (trace) trace->arrived = arrived;
  if (!arrived || plan.skip[t]) return;
  const RoundSpec& r = plan.inst.rounds[t];
  FirstStage fs = first_stage(plan.fp_marg[t], plan.alpha[t], ctx, avail);
  finish_round(plan.fp_marg[t], r.c, r.values, r.q, plan.beta_num[t], plan.late[t], rho, t, 0,
               fs, ctx, avail, welfare, trace);
}

int sample_slot(const GeneralPlan& plan, int t, TrialCtx& ctx) {
  const double u = ctx.arrival.uniform01();
  const std::vector<double>& cum = plan.slot_cum[t];
  for (int j = 0; j < static_cast<int>(cum.size()); ++j) {
    if (u < cum[j]) return j;
  }
  return static_cast<int>(cum.size()) - 1;
}

void general_round(const GeneralPlan& plan, const RhoSource& rho, int t, int j, TrialCtx& ctx,
                   std::vector<std::uint8_t>& avail, double& welfare, RoundTrace* trace) {
  if (trace) {
    trace->arrived = true;
    trace->realized = j;
  }
  if (plan.slot_skip[t][j]) return;
  const Realization& r = plan.inst.rounds[t].realizations[j];
  FirstStage fs = first_stage(plan.fp_marg[t][j], plan.alpha[t], ctx, avail);
  finish_round(plan.fp_marg[t][j], r.c, r.values, r.q, plan.beta_num[t], plan.late[t], rho, t,
               j, fs, ctx, avail, welfare, trace);
}

std::int64_t resolve_sigma_samples(const AlgoConfig& cfg, int n, int T) {
  if (cfg.sigma_sample_override) return *cfg.sigma_sample_override;
  double v = paper_sigma_sample_count(n, T, cfg.epsilon, cfg.effective_kappa());
  return v > 9e18 ? std::int64_t{9'000'000'000'000'000'000}
                  : static_cast<std::int64_t>(std::llround(v));
}

}  // namespace

// --- sigma estimation --------------------------------------------------------

SigmaEstimator::SigmaEstimator(const BernoulliPlan* plan, std::uint64_t seed,
                               std::int64_t samples)
    : bernoulli_(plan), seed_(seed), samples_(samples) {
  const int T = plan->inst.num_rounds();
  cache_.resize(T);
  for (int t = 0; t < T; ++t) {
    cache_[t].assign(1, std::vector<std::optional<double>>(plan->inst.n));
  }
}

SigmaEstimator::SigmaEstimator(const GeneralPlan* plan, std::uint64_t seed,
                               std::int64_t samples)
    : general_(plan), seed_(seed), samples_(samples) {
  const int T = plan->inst.num_rounds();
  cache_.resize(T);
  for (int t = 0; t < T; ++t) {
    cache_[t].assign(plan->inst.rounds[t].realizations.size(),
                     std::vector<std::optional<double>>(plan->inst.n));
  }
}

double SigmaEstimator::rho(int t, int j, int i) const {
  std::optional<double>& entry = cache_[t][j][i];
  if (!entry) entry = fill(t, j, i);
  return *entry;
}

double SigmaEstimator::fill(int t, int j, int i) const {
  double acc = 0.0;
  if (bernoulli_) {
    const BernoulliPlan& plan = *bernoulli_;
    const RoundSpec& r = plan.inst.rounds[t];
    for (std::int64_t sim = 0; sim < samples_; ++sim) {
      TrialCtx ctx = TrialCtx::for_sigma(seed_, static_cast<std::uint64_t>(t), 0,
                                         static_cast<std::uint64_t>(i),
                                         static_cast<std::uint64_t>(sim));
      std::vector<std::uint8_t> avail(plan.inst.n, 1);
      double welfare = 0.0;
      for (int prev = 0; prev < t; ++prev) {
        const bool arrived = ctx.arrival.bernoulli(plan.inst.rounds[prev].p);
        bernoulli_round(plan, *this, prev, arrived, ctx, avail, welfare, nullptr);
      }
      // Round t conditioned on arrival: first stage only.
      FirstStage fs = first_stage(plan.fp_marg[t], plan.alpha[t], ctx, avail);
      const bool unallocated =
          std::find(fs.d1.begin(), fs.d1.end(), i) == fs.d1.end();
      if (avail[i] && unallocated) {
        acc += 1.0 - static_cast<double>(fs.d1.size()) / r.c;
      }
    }
  } else {
    const GeneralPlan& plan = *general_;
    const Realization& r = plan.inst.rounds[t].realizations[j];
    for (std::int64_t sim = 0; sim < samples_; ++sim) {
      TrialCtx ctx = TrialCtx::for_sigma(seed_, static_cast<std::uint64_t>(t),
                                         static_cast<std::uint64_t>(j),
                                         static_cast<std::uint64_t>(i),
                                         static_cast<std::uint64_t>(sim));
      std::vector<std::uint8_t> avail(plan.inst.n, 1);
      double welfare = 0.0;
      for (int prev = 0; prev < t; ++prev) {
        const int slot = sample_slot(plan, prev, ctx);
        general_round(plan, *this, prev, slot, ctx, avail, welfare, nullptr);
      }
      // Round t conditioned on realizing index j.
      FirstStage fs = first_stage(plan.fp_marg[t][j], plan.alpha[t], ctx, avail);
      const bool unallocated =
          std::find(fs.d1.begin(), fs.d1.end(), i) == fs.d1.end();
      if (avail[i] && unallocated) {
        acc += 1.0 - static_cast<double>(fs.d1.size()) / r.c;
      }
    }
  }
  simulations_ += samples_;
  return acc / static_cast<double>(samples_);
}

void SigmaEstimator::prefill() {
  const int T = static_cast<int>(cache_.size());
  for (int t = 0; t < T; ++t) {
    for (int j = 0; j < static_cast<int>(cache_[t].size()); ++j) {
      const bool slot_live = bernoulli_ ? !bernoulli_->skip[t] : !general_->slot_skip[t][j];
      if (!slot_live) continue;
      const int n = static_cast<int>(cache_[t][j].size());
      for (int i = 0; i < n; ++i) {
        const bool late = bernoulli_ ? bernoulli_->late[t][i] : general_->late[t][i];
        const double xv = bernoulli_ ? bernoulli_->x[t][i] : general_->x[t][j][i];
        if (late && xv > 0.0) (void)rho(t, j, i);
      }
    }
  }
}

// --- experiments ---------------------------------------------------------------

TwoProposalExperiment::TwoProposalExperiment(const BernoulliInstance& inst,
                                             const std::vector<std::vector<double>>& x,
                                             AlgoConfig cfg)
    : cfg_(cfg), plan_(BernoulliPlan::build(inst, x, cfg.effective_kappa())) {
  cfg_.validate();
  if (cfg_.rho_mode == RhoMode::Sampled) {
    sigma_samples_ = resolve_sigma_samples(cfg_, inst.n, inst.num_rounds());
    auto sigma = std::make_unique<SigmaEstimator>(&plan_, cfg_.seed, sigma_samples_);
    sigma_ = sigma.get();
    rho_ = std::move(sigma);
  }
}

void TwoProposalExperiment::prepare() {
  if (prepared_) return;
  if (cfg_.rho_mode == RhoMode::Exact) {
    report_ = std::make_unique<oracles::ExactReport>(
        oracles::exact_report(plan_.inst, plan_.x, cfg_.effective_kappa()));
    std::vector<std::vector<std::vector<double>>> lifted(plan_.inst.num_rounds());
    for (int t = 0; t < plan_.inst.num_rounds(); ++t) lifted[t] = {report_->rho[t]};
    rho_ = std::make_unique<FixedRho>(std::move(lifted));
  } else {
    sigma_->prefill();
  }
  prepared_ = true;
}

RunTrace TwoProposalExperiment::run_trial(std::uint64_t trial) const {
  if (!prepared_) throw std::logic_error("TwoProposalExperiment: call prepare() first");
  TrialCtx ctx = TrialCtx::for_trial(cfg_.seed, trial);
  const int T = plan_.inst.num_rounds();
  RunTrace trace;
  trace.rounds.resize(T);
  std::vector<std::uint8_t> avail(plan_.inst.n, 1);
  for (int t = 0; t < T; ++t) {
    const bool arrived = ctx.arrival.bernoulli(plan_.inst.rounds[t].p);
    bernoulli_round(plan_, *rho_, t, arrived, ctx, avail, trace.welfare, &trace.rounds[t]);
  }
  return trace;
}

const oracles::ExactReport& TwoProposalExperiment::report() const {
  if (!report_) throw std::logic_error("TwoProposalExperiment: no exact report in this mode");
  return *report_;
}

std::int64_t TwoProposalExperiment::sigma_simulations() const {
  return sigma_ ? sigma_->simulations_run() : 0;
}

GeneralTwoProposalExperiment::GeneralTwoProposalExperiment(
    const GeneralInstance& inst, const std::vector<std::vector<std::vector<double>>>& x,
    AlgoConfig cfg)
    : cfg_(cfg), plan_(GeneralPlan::build(inst, x, cfg.effective_kappa())) {
  cfg_.validate();
  if (cfg_.rho_mode == RhoMode::Sampled) {
    sigma_samples_ = resolve_sigma_samples(cfg_, inst.n, inst.num_rounds());
    auto sigma = std::make_unique<SigmaEstimator>(&plan_, cfg_.seed, sigma_samples_);
    sigma_ = sigma.get();
    rho_ = std::move(sigma);
  }
}

void GeneralTwoProposalExperiment::prepare() {
  if (prepared_) return;
  if (cfg_.rho_mode == RhoMode::Exact) {
    report_ = std::make_unique<oracles::GeneralExactReport>(
        oracles::exact_report(plan_.inst, plan_.x, cfg_.effective_kappa()));
    rho_ = std::make_unique<FixedRho>(report_->rho);
  } else {
    sigma_->prefill();
  }
  prepared_ = true;
}

RunTrace GeneralTwoProposalExperiment::run_trial(std::uint64_t trial) const {
  if (!prepared_) throw std::logic_error("GeneralTwoProposalExperiment: call prepare() first");
  TrialCtx ctx = TrialCtx::for_trial(cfg_.seed, trial);
  const int T = plan_.inst.num_rounds();
  RunTrace trace;
  trace.rounds.resize(T);
  std::vector<std::uint8_t> avail(plan_.inst.n, 1);
  for (int t = 0; t < T; ++t) {
    const int slot = sample_slot(plan_, t, ctx);
    general_round(plan_, *rho_, t, slot, ctx, avail, trace.welfare, &trace.rounds[t]);
  }
  return trace;
}

const oracles::GeneralExactReport& GeneralTwoProposalExperiment::report() const {
  if (!report_) {
    throw std::logic_error("GeneralTwoProposalExperiment: no exact report in this mode");
  }
  return *report_;
}

std::int64_t GeneralTwoProposalExperiment::sigma_simulations() const {
  return sigma_ ? sigma_->simulations_run() : 0;
}

RunTrace run(const BernoulliInstance& inst, const lp::LpModel& model,
             const lp::LpSolution& sol, const AlgoConfig& cfg, std::uint64_t trial) {
  TwoProposalExperiment experiment(inst, lp::x_grid(inst, model, sol), cfg);
  experiment.prepare();
  return experiment.run_trial(trial);
}

RunTrace run_general(const GeneralInstance& inst, const lp::LpModel& model,
                     const lp::LpSolution& sol, const AlgoConfig& cfg, std::uint64_t trial) {
  GeneralTwoProposalExperiment experiment(inst, lp::x_grid(inst, model, sol), cfg);
  experiment.prepare();
  return experiment.run_trial(trial);
}

void write_trace(std::ostream& os, const RunTrace& trace) {
  using nlohmann::json;
  auto line = [&](int round, const char* event, json payload) {
    json rec{{"round", round}, {"event", event}, {"payload", std::move(payload)}};
    os << rec.dump() << "\n";
  };
  for (int t = 0; t < static_cast<int>(trace.rounds.size()); ++t) {
    const RoundTrace& r = trace.rounds[t];
    if (r.realized >= 0) {
      line(t, "realization", r.realized);
    } else {
      line(t, "arrival", r.arrived);
    }
    if (!r.arrived && r.realized < 0) continue;
    line(t, "first_proposal", r.first_proposal);
    line(t, "first_allocated", r.first_allocated);
    line(t, "second_proposal", r.second_proposal);
    line(t, "second_allocated", r.second_allocated);
    line(t, "successes", r.successes);
  }
  os << json{{"event", "welfare"}, {"payload", trace.welfare}}.dump() << "\n";
}

}  // namespace capalloc::alloc
