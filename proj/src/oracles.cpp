#include "capalloc/oracles.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <optional>

#include "capalloc/constants.hpp"
#include "capalloc/pivotal.hpp"
#include "capalloc/rng.hpp"
#include "capalloc/util.hpp"

namespace capalloc::oracles {

namespace {

using Mask = std::uint32_t;

int popcount(Mask m) { return std::popcount(m); }

// ---------------------------------------------------------------------------
// Optimum online (Bellman recursion over availability subsets)
// ---------------------------------------------------------------------------

struct RealizationView {
  double p = 0.0;
  int cap = 0;
  const std::vector<double>* values = nullptr;
  const std::vector<double>* q = nullptr;
};

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
  return r;
}

// The per-realization budget measure: 2^n * sum_{s <= c} C(n, s) 2^s.
double realization_work(int n, int cap) {
  double sum = 0.0;
  for (int s = 0; s <= std::min(cap, n); ++s) sum += binomial(n, s) * std::pow(2.0, s);
  return std::pow(2.0, n) * sum;
}

// Expected value of allocating subset pick out of availability mask, where
// each member succeeds independently: sum over success patterns of the
// immediate welfare plus the continuation value on the reduced mask.
double success_expectation(Mask avail_mask, Mask pick, const std::vector<double>& values,
                           const std::vector<double>& q,
                           const std::vector<double>& continuation) {
  Mask certain = 0;
  std::vector<int> random_bits;
  double base_value = 0.0;
  for (Mask rest = pick; rest != 0;) {
    int i = std::countr_zero(rest);
    rest &= rest - 1;
    if (q[i] >= 1.0) {
      certain |= Mask{1} << i;
      base_value += values[i];
    } else if (q[i] > 0.0) {
      random_bits.push_back(i);
    }
    // q = 0 members never succeed and never leave the pool.
  }

  double total = 0.0;
  const int r = static_cast<int>(random_bits.size());
  for (Mask sub = 0; sub < (Mask{1} << r); ++sub) {
    double prob = 1.0;
    Mask succ = certain;
    double value = base_value;
    for (int b = 0; b < r; ++b) {
      int i = random_bits[b];
      if (sub & (Mask{1} << b)) {
        prob *= q[i];
        succ |= Mask{1} << i;
        value += values[i];
      } else {
        prob *= 1.0 - q[i];
      }
    }
    total += prob * (value + continuation[avail_mask & ~succ]);
  }
  return total;
}

// Best over allocation subsets of the availability mask with |pick| <= cap.
double best_allocation(Mask avail_mask, int cap, const std::vector<double>& values,
                       const std::vector<double>& q,
                       const std::vector<double>& continuation) {
  double best = continuation[avail_mask];  // pick nothing
  if (cap <= 0) return best;
  // Enumerate nonempty submasks of avail_mask.
  for (Mask pick = avail_mask; pick != 0; pick = (pick - 1) & avail_mask) {
    if (popcount(pick) > cap) continue;
    best = std::max(best,
                    success_expectation(avail_mask, pick, values, q, continuation));
  }
  return best;
}

OptOnlineValue opt_online_impl(int n, const std::vector<std::vector<RealizationView>>& rounds,
                               double budget) {
  if (n > 12) {
    throw BudgetError(cat("opt_online: n = ", n, " exceeds the exact-DP limit of 12"),
                      std::pow(2.0, n), std::pow(2.0, 12));
  }
  double work = 0.0;
  for (const auto& round : rounds) {
    for (const RealizationView& r : round) {
      if (r.p > 0.0) work += realization_work(n, r.cap);
    }
  }
  if (work > budget) {
    throw BudgetError(cat("opt_online: required work ", work, " exceeds budget ", budget),
                      work, budget);
  }

  const int T = static_cast<int>(rounds.size());
  const Mask size = Mask{1} << n;
  OptOnlineValue result;
  result.table.assign(T + 1, std::vector<double>(size, 0.0));
  for (int t = T - 1; t >= 0; --t) {
    const std::vector<double>& next = result.table[t + 1];
    std::vector<double>& cur = result.table[t];
    for (Mask m = 0; m < size; ++m) {
      double v = 0.0;
      double residual = 1.0;  // probability mass not covered by realizations
      for (const RealizationView& r : rounds[t]) {
        if (r.p <= 0.0) continue;
        residual -= r.p;
        v += r.p * best_allocation(m, r.cap, *r.values, *r.q, next);
      }
      if (residual > 1e-12) v += residual * next[m];
      cur[m] = v;
    }
  }
  result.value = result.table[0][size - 1];
  return result;
}

}  // namespace

OptOnlineValue opt_online(const BernoulliInstance& inst, double budget) {
  std::vector<std::vector<RealizationView>> rounds(inst.num_rounds());
  for (int t = 0; t < inst.num_rounds(); ++t) {
    const RoundSpec& r = inst.rounds[t];
    if (r.p > 0.0) rounds[t].push_back({r.p, r.c, &r.values, &r.q});
    // Non-arrival is the residual mass; opt_online_impl adds it implicitly.
  }
  return opt_online_impl(inst.n, rounds, budget);
}

OptOnlineValue opt_online(const GeneralInstance& inst, double budget) {
  std::vector<std::vector<RealizationView>> rounds(inst.num_rounds());
  for (int t = 0; t < inst.num_rounds(); ++t) {
    for (const Realization& r : inst.rounds[t].realizations) {
      if (r.p > 0.0) rounds[t].push_back({r.p, r.c, &r.values, &r.q});
    }
  }
  return opt_online_impl(inst.n, rounds, budget);
}

// ---------------------------------------------------------------------------
// Exact two-proposal engine
// ---------------------------------------------------------------------------

namespace {

struct SlotView {
  double p = 0.0;
  int cap = 0;
  const std::vector<double>* x = nullptr;
  const std::vector<double>* values = nullptr;
  const std::vector<double>* q = nullptr;
};

// Enumerates subsets of `base` with independent per-bit inclusion
// probabilities, invoking emit(submask, weight) at every leaf.
template <class Emit>
void weighted_subsets(Mask base, const std::vector<double>& prob, const Emit& emit) {
  std::vector<int> bits;
  for (Mask rest = base; rest != 0; rest &= rest - 1) bits.push_back(std::countr_zero(rest));
  const int k = static_cast<int>(bits.size());
  // Iterative DFS over inclusion decisions.
  struct Frame {
    Mask chosen;
    double weight;
    int depth;
  };
  std::vector<Frame> stack{{0, 1.0, 0}};
  while (!stack.empty()) {
    Frame f = stack.back();
    stack.pop_back();
    while (f.depth < k) {
      const int i = bits[f.depth];
      const double p = prob[i];
      if (p >= 1.0) {
        f.chosen |= Mask{1} << i;
        ++f.depth;
      } else if (p <= 0.0) {
        ++f.depth;
      } else {
        stack.push_back({f.chosen | (Mask{1} << i), f.weight * p, f.depth + 1});
        f.weight *= 1.0 - p;
        ++f.depth;
      }
    }
    emit(f.chosen, f.weight);
  }
}

class ExactEngine {
 public:
  ExactEngine(int n, double kappa, double budget) : n_(n), kappa_(kappa), budget_(budget) {
    if (n_ > 10) {
      throw BudgetError(cat("exact engine: n = ", n_, " exceeds the enumeration limit of 10"),
                        std::pow(4.0, n_), std::pow(4.0, 10));
    }
    size_ = Mask{1} << n_;
    full_ = size_ - 1;
    avail_.assign(size_, 0.0);
    avail_[full_] = 1.0;
    y_.assign(n_, 0.0);
    g_.assign(std::size_t{size_} << n_, 0.0);
    h_.assign(std::size_t{size_} << n_, 0.0);
    next_.assign(size_, 0.0);
  }

  GeneralExactReport run(const std::vector<std::vector<SlotView>>& rounds) {
    const int T = static_cast<int>(rounds.size());
    GeneralExactReport rep;
    rep.n = n_;
    rep.T = T;
    rep.kappa = kappa_;
    rep.avail.reserve(T + 1);
    rep.joint_avail.reserve(T + 1);

    for (int t = 0; t < T; ++t) {
      record_state(rep);
      std::vector<PairPolicy> policy(n_);
      for (int i = 0; i < n_; ++i) policy[i] = pair_policy(y_[i], kappa_);
      std::vector<double> alpha_row(n_);
      for (int i = 0; i < n_; ++i) alpha_row[i] = policy[i].alpha;
      rep.alpha.push_back(alpha_row);

      const auto& slots = rounds[t];
      const int m = static_cast<int>(slots.size());
      rep.prob_first.emplace_back(m, std::vector<double>(n_, 0.0));
      rep.prob_second.emplace_back(m, std::vector<double>(n_, 0.0));
      rep.rho.emplace_back(m, std::vector<double>(n_, 0.0));
      rep.beta.emplace_back(m, std::vector<double>(n_, 0.0));

      std::fill(next_.begin(), next_.end(), 0.0);
      for (int j = 0; j < m; ++j) {
        step_slot(rep, t, j, slots[j], policy);
      }
      avail_.swap(next_);

      for (int i = 0; i < n_; ++i) {
        double dy = 0.0;
        for (const SlotView& s : slots) dy += (*s.x)[i] * (*s.q)[i];
        y_[i] += dy;
      }
    }
    record_state(rep);

    double welfare = 0.0;
    for (int t = 0; t < T; ++t) {
      for (int j = 0; j < static_cast<int>(rounds[t].size()); ++j) {
        const SlotView& s = rounds[t][j];
        for (int i = 0; i < n_; ++i) {
          welfare += (*s.values)[i] * (*s.q)[i] *
                     (rep.prob_first[t][j][i] + rep.prob_second[t][j][i]);
        }
      }
    }
    rep.expected_welfare = welfare;
    rep.max_beta_raw = max_beta_raw_;
    return rep;
  }

 private:
  void record_state(GeneralExactReport& rep) {
    rep.y.push_back(y_);
    std::vector<double> marg(n_, 0.0);
    std::vector<std::vector<double>> joint(n_, std::vector<double>(n_, 0.0));
    for (Mask msk = 0; msk < size_; ++msk) {
      const double w = avail_[msk];
      if (w == 0.0) continue;
      for (Mask rest = msk; rest != 0; rest &= rest - 1) {
        const int i = std::countr_zero(rest);
        marg[i] += w;
        for (Mask rest2 = rest & (rest - 1); rest2 != 0; rest2 &= rest2 - 1) {
          const int k = std::countr_zero(rest2);
          joint[i][k] += w;
          joint[k][i] += w;
        }
      }
    }
    for (int i = 0; i < n_; ++i) joint[i][i] = marg[i];
    rep.avail.push_back(std::move(marg));
    rep.joint_avail.push_back(std::move(joint));
  }

  void charge(double units) {
    work_ += units;
    if (work_ > budget_) {
      throw BudgetError(cat("exact engine: work exceeded budget ", budget_), work_, budget_);
    }
  }

  void step_slot(GeneralExactReport& rep, int t, int j, const SlotView& slot,
                 const std::vector<PairPolicy>& policy) {
    if (slot.p <= 0.0) return;

    std::vector<double> marg(n_, 0.0);
    bool any = false;
    if (slot.cap > 0) {
      for (int i = 0; i < n_; ++i) {
        marg[i] = (*slot.x)[i] / slot.p;
        any = any || marg[i] > 0.0;
      }
    }
    if (!any) {
      // Nothing can be proposed: the slot leaves availability untouched.
      for (Mask msk = 0; msk < size_; ++msk) next_[msk] += slot.p * avail_[msk];
      return;
    }

    const pivotal::MarginalVector fp_marg = pivotal::MarginalVector::make(marg, slot.cap);
    const pivotal::SubsetDistribution fp_dist = pivotal::subset_distribution(fp_marg);
    const std::vector<double> alphas = [&] {
      std::vector<double> a(n_);
      for (int i = 0; i < n_; ++i) a[i] = policy[i].alpha;
      return a;
    }();

    // Phase 1: conditional joint law of (availability mask, first-stage
    // allocations), entering g_[(mask << n) | allocated].
    std::fill(g_.begin(), g_.end(), 0.0);
    for (Mask msk = 0; msk < size_; ++msk) {
      const double w_mask = avail_[msk];
      if (w_mask == 0.0) continue;
      for (const auto& [fp, w_fp] : fp_dist.entries) {
        const Mask eligible = fp & msk;
        const double base = w_mask * w_fp;
        if (base == 0.0) continue;
        charge(static_cast<double>(Mask{1} << popcount(eligible)));
        weighted_subsets(eligible, alphas, [&](Mask d1, double w) {
          g_[(std::size_t{msk} << n_) | d1] += base * w;
        });
      }
    }

    // rho and first-stage allocation probabilities from the joint law.
    std::vector<double>& rho_row = rep.rho[t][j];
    std::vector<double>& pa1_row = rep.prob_first[t][j];
    std::vector<double> pa1_cond(n_, 0.0);
    for (std::size_t idx = 0; idx < g_.size(); ++idx) {
      const double w = g_[idx];
      if (w == 0.0) continue;
      const Mask msk = static_cast<Mask>(idx >> n_);
      const Mask d1 = static_cast<Mask>(idx) & full_;
      const double slack = 1.0 - static_cast<double>(popcount(d1)) / slot.cap;
      for (Mask rest = msk & ~d1; rest != 0; rest &= rest - 1) {
        rho_row[std::countr_zero(rest)] += w * slack;
      }
      for (Mask rest = d1; rest != 0; rest &= rest - 1) {
        pa1_cond[std::countr_zero(rest)] += w;
      }
    }

    // Second-stage acceptance probabilities.
    std::vector<double> betas(n_, 0.0);
    Mask beta_mask = 0;
    for (int i = 0; i < n_; ++i) {
      if (!policy[i].late) continue;
      if (rho_row[i] > 0.0) {
        max_beta_raw_ =
            std::max(max_beta_raw_, std::max(policy[i].beta_numerator, 0.0) / rho_row[i]);
      }
      const double b = capped_beta(policy[i].beta_numerator, rho_row[i]);
      rep.beta[t][j][i] = b;
      betas[i] = b;
      if (b > 0.0) beta_mask |= Mask{1} << i;
    }

    // Phase 2: mix in the second proposal, entering h_[(mask << n) | allocated].
    std::fill(h_.begin(), h_.end(), 0.0);
    std::vector<std::optional<pivotal::SubsetDistribution>> sp_cache(slot.cap + 1);
    std::vector<double> pa2_cond(n_, 0.0);
    for (std::size_t idx = 0; idx < g_.size(); ++idx) {
      const double w = g_[idx];
      if (w == 0.0) continue;
      const Mask msk = static_cast<Mask>(idx >> n_);
      const Mask d1 = static_cast<Mask>(idx) & full_;
      const int allocated = popcount(d1);
      if (allocated >= slot.cap || beta_mask == 0) {
        h_[idx] += w;
        continue;
      }
      auto& spd = sp_cache[allocated];
      if (!spd) {
        const double scale = 1.0 - static_cast<double>(allocated) / slot.cap;
        std::vector<double> sp_marg(n_);
        for (int i = 0; i < n_; ++i) sp_marg[i] = scale * marg[i];
        spd = pivotal::subset_distribution(
            pivotal::MarginalVector::make(std::move(sp_marg), slot.cap - allocated));
      }
      for (const auto& [sp, w_sp] : spd->entries) {
        const Mask cands = sp & msk & ~d1 & beta_mask;
        const double base = w * w_sp;
        if (base == 0.0) continue;
        if (cands == 0) {
          h_[idx] += base;
          continue;
        }
        charge(static_cast<double>(Mask{1} << popcount(cands)));
        weighted_subsets(cands, betas, [&](Mask d2, double w2) {
          h_[(std::size_t{msk} << n_) | (d1 | d2)] += base * w2;
          for (Mask rest = d2; rest != 0; rest &= rest - 1) {
            pa2_cond[std::countr_zero(rest)] += base * w2;
          }
        });
      }
    }

    // Phase 3: success coins shrink the availability mask.
    const std::vector<double>& q = *slot.q;
    for (std::size_t idx = 0; idx < h_.size(); ++idx) {
      const double w = h_[idx];
      if (w == 0.0) continue;
      const Mask msk = static_cast<Mask>(idx >> n_);
      const Mask allocated = static_cast<Mask>(idx) & full_;
      Mask certain = 0;
      Mask random = 0;
      for (Mask rest = allocated; rest != 0; rest &= rest - 1) {
        const int i = std::countr_zero(rest);
        if (q[i] >= 1.0) {
          certain |= Mask{1} << i;
        } else if (q[i] > 0.0) {
          random |= Mask{1} << i;
        }
      }
      const double base = slot.p * w;
      charge(static_cast<double>(Mask{1} << popcount(random)));
      weighted_subsets(random, q, [&](Mask succ, double wq) {
        next_[msk & ~(certain | succ)] += base * wq;
      });
    }

    for (int i = 0; i < n_; ++i) {
      pa1_row[i] = slot.p * pa1_cond[i];
      rep.prob_second[t][j][i] = slot.p * pa2_cond[i];
    }
  }

  int n_;
  double kappa_;
  double budget_;
  Mask size_ = 0;
  Mask full_ = 0;
  double work_ = 0.0;
  double max_beta_raw_ = 0.0;
  std::vector<double> avail_;
  std::vector<double> next_;
  std::vector<double> y_;
  std::vector<double> g_;
  std::vector<double> h_;
};

}  // namespace

GeneralExactReport exact_report(const GeneralInstance& inst,
                                const std::vector<std::vector<std::vector<double>>>& x,
                                double kappa, double budget) {
  std::vector<std::vector<SlotView>> rounds(inst.num_rounds());
  for (int t = 0; t < inst.num_rounds(); ++t) {
    const GeneralRound& round = inst.rounds[t];
    rounds[t].resize(round.realizations.size());
    for (std::size_t j = 0; j < round.realizations.size(); ++j) {
      const Realization& r = round.realizations[j];
      rounds[t][j] = {r.p, r.c, &x[t][j], &r.values, &r.q};
    }
  }
  ExactEngine engine(inst.n, kappa, budget);
  return engine.run(rounds);
}

ExactReport exact_report(const BernoulliInstance& inst,
                         const std::vector<std::vector<double>>& x, double kappa,
                         double budget) {
  // Embed rounds as (active, null) realizations and run the general engine.
  const int T = inst.num_rounds();
  const std::vector<double> zeros(inst.n, 0.0);
  std::vector<std::vector<SlotView>> rounds(T);
  std::vector<int> active_slot(T, -1);
  for (int t = 0; t < T; ++t) {
    const RoundSpec& r = inst.rounds[t];
    if (r.p > 0.0) {
      active_slot[t] = 0;
      rounds[t].push_back({r.p, r.c, &x[t], &r.values, &r.q});
    }
    if (r.p < 1.0) rounds[t].push_back({1.0 - r.p, 0, &zeros, &zeros, &zeros});
  }
  ExactEngine engine(inst.n, kappa, budget);
  GeneralExactReport gen = engine.run(rounds);

  ExactReport rep;
  rep.n = inst.n;
  rep.T = T;
  rep.kappa = kappa;
  rep.avail = std::move(gen.avail);
  rep.joint_avail = std::move(gen.joint_avail);
  rep.alpha = std::move(gen.alpha);
  rep.y = std::move(gen.y);
  rep.expected_welfare = gen.expected_welfare;
  rep.max_beta_raw = gen.max_beta_raw;
  rep.prob_first.assign(T, std::vector<double>(inst.n, 0.0));
  rep.prob_second.assign(T, std::vector<double>(inst.n, 0.0));
  rep.rho.assign(T, std::vector<double>(inst.n, 0.0));
  rep.beta.assign(T, std::vector<double>(inst.n, 0.0));
  for (int t = 0; t < T; ++t) {
    if (active_slot[t] < 0) continue;
    rep.prob_first[t] = gen.prob_first[t][0];
    rep.prob_second[t] = gen.prob_second[t][0];
    rep.rho[t] = gen.rho[t][0];
    rep.beta[t] = gen.beta[t][0];
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Optimum offline estimate
// ---------------------------------------------------------------------------

double assignment_value_dp(int n, const std::vector<int>& caps,
                           const std::vector<std::vector<double>>& weights) {
  const Mask size = Mask{1} << n;
  std::vector<double> value(size, 0.0);
  std::vector<double> next(size, 0.0);
  for (int r = static_cast<int>(caps.size()) - 1; r >= 0; --r) {
    next.swap(value);
    const std::vector<double>& w = weights[r];
    for (Mask m = 0; m < size; ++m) {
      double best = next[m];
      for (Mask pick = m; pick != 0; pick = (pick - 1) & m) {
        if (popcount(pick) > caps[r]) continue;
        double gain = 0.0;
        for (Mask rest = pick; rest != 0; rest &= rest - 1) gain += w[std::countr_zero(rest)];
        best = std::max(best, gain + next[m & ~pick]);
      }
      value[m] = best;
    }
  }
  return value[size - 1];
}

namespace {

struct FlowEdge {
  int to;
  int cap;
  double cost;
  int flow = 0;
};

class MinCostFlow {
 public:
  explicit MinCostFlow(int num_nodes) : adj_(num_nodes) {}

  void add_edge(int from, int to, int cap, double cost) {
    adj_[from].push_back(static_cast<int>(edges_.size()));
    edges_.push_back({to, cap, cost});
    adj_[to].push_back(static_cast<int>(edges_.size()));
    edges_.push_back({from, 0, -cost});
  }

  // Augments unit flow along shortest (most negative) paths while they
  // improve the objective; returns the total collected weight.
  double max_weight(int source, int sink) {
    double total = 0.0;
    while (true) {
      const int nodes = static_cast<int>(adj_.size());
      std::vector<double> dist(nodes, kInf);
      std::vector<int> via(nodes, -1);
      dist[source] = 0.0;
      for (int round = 0; round < nodes; ++round) {
        bool changed = false;
        for (int u = 0; u < nodes; ++u) {
          if (dist[u] >= kInf) continue;
          for (int id : adj_[u]) {
            const FlowEdge& e = edges_[id];
            if (e.flow >= e.cap) continue;
            if (dist[u] + e.cost < dist[e.to] - 1e-12) {
              dist[e.to] = dist[u] + e.cost;
              via[e.to] = id;
              changed = true;
            }
          }
        }
        if (!changed) break;
      }
      if (dist[sink] >= -1e-12) break;  // assignment is optional
      total -= dist[sink];
      for (int v = sink; v != source;) {
        FlowEdge& e = edges_[via[v]];
        e.flow += 1;
        edges_[via[v] ^ 1].flow -= 1;
        v = edges_[via[v] ^ 1].to;
      }
    }
    return total;
  }

 private:
  static constexpr double kInf = 1e100;
  std::vector<FlowEdge> edges_;
  std::vector<std::vector<int>> adj_;
};

}  // namespace

double assignment_value_flow(int n, const std::vector<int>& caps,
                             const std::vector<std::vector<double>>& weights) {
  const int rounds = static_cast<int>(caps.size());
  const int source = 0;
  const int sink = 1 + n + rounds;
  MinCostFlow flow(sink + 1);
  for (int i = 0; i < n; ++i) flow.add_edge(source, 1 + i, 1, 0.0);
  for (int r = 0; r < rounds; ++r) {
    if (caps[r] > 0) flow.add_edge(1 + n + r, sink, caps[r], 0.0);
  }
  for (int r = 0; r < rounds; ++r) {
    if (caps[r] <= 0) continue;
    for (int i = 0; i < n; ++i) {
      if (weights[r][i] > 0.0) flow.add_edge(1 + i, 1 + n + r, 1, -weights[r][i]);
    }
  }
  return flow.max_weight(source, sink);
}

namespace {

double assignment_value(int n, const std::vector<int>& caps,
                        const std::vector<std::vector<double>>& weights) {
  const double dp_work = std::pow(3.0, n) * (static_cast<double>(caps.size()) + 1.0);
  if (n <= 6 || dp_work <= 5000.0) return assignment_value_dp(n, caps, weights);
  return assignment_value_flow(n, caps, weights);
}

OfflineEstimate summarize(const std::vector<double>& samples) {
  OfflineEstimate est;
  est.trials = static_cast<long long>(samples.size());
  double sum = 0.0;
  for (double v : samples) sum += v;
  est.mean = sum / est.trials;
  double var = 0.0;
  for (double v : samples) var += (v - est.mean) * (v - est.mean);
  var = est.trials > 1 ? var / (est.trials - 1) : 0.0;
  est.ci95_half = 1.96 * std::sqrt(var / est.trials);
  return est;
}

}  // namespace

OfflineEstimate opt_offline_estimate(const BernoulliInstance& inst, long long trials,
                                     std::uint64_t seed) {
  std::vector<double> samples;
  samples.reserve(trials);
  std::vector<int> caps;
  std::vector<std::vector<double>> weights;
  for (long long trial = 0; trial < trials; ++trial) {
    RngStream rng(derive_seed(seed, {static_cast<std::uint64_t>(trial), stream::offline}));
    caps.clear();
    weights.clear();
    for (const RoundSpec& r : inst.rounds) {
      if (!rng.bernoulli(r.p)) continue;
      caps.push_back(r.c);
      std::vector<double> w(inst.n);
      for (int i = 0; i < inst.n; ++i) w[i] = r.values[i] * r.q[i];
      weights.push_back(std::move(w));
    }
    samples.push_back(assignment_value(inst.n, caps, weights));
  }
  return summarize(samples);
}

OfflineEstimate opt_offline_estimate(const GeneralInstance& inst, long long trials,
                                     std::uint64_t seed) {
  std::vector<double> samples;
  samples.reserve(trials);
  std::vector<int> caps;
  std::vector<std::vector<double>> weights;
  for (long long trial = 0; trial < trials; ++trial) {
    RngStream rng(derive_seed(seed, {static_cast<std::uint64_t>(trial), stream::offline}));
    caps.clear();
    weights.clear();
    for (const GeneralRound& round : inst.rounds) {
      double u = rng.uniform01();
      double acc = 0.0;
      const Realization* chosen = nullptr;
      for (const Realization& r : round.realizations) {
        acc += r.p;
        if (u < acc) {
          chosen = &r;
          break;
        }
      }
      if (chosen == nullptr) chosen = &round.realizations.back();
      if (chosen->c <= 0) continue;
      caps.push_back(chosen->c);
      std::vector<double> w(inst.n);
      for (int i = 0; i < inst.n; ++i) w[i] = chosen->values[i] * chosen->q[i];
      weights.push_back(std::move(w));
    }
    samples.push_back(assignment_value(inst.n, caps, weights));
  }
  return summarize(samples);
}

}  // namespace capalloc::oracles
