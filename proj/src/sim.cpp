#include "capalloc/sim.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <thread>

#include <json.hpp>

namespace capalloc::sim {

Aggregate run_trials(const TrialFn& fn, long long trials, int jobs,
                     const std::vector<int>& slots_per_round, int n) {
  const int T = static_cast<int>(slots_per_round.size());
  Aggregate agg;
  agg.trials = trials;
  agg.counts.resize(T);
  for (int t = 0; t < T; ++t) {
    agg.counts[t].assign(std::max(slots_per_round[t], 1), std::vector<long long>(n, 0));
  }
  if (trials <= 0) return agg;

  jobs = std::clamp<int>(jobs, 1, static_cast<int>(std::thread::hardware_concurrency() > 0
                                                       ? std::thread::hardware_concurrency()
                                                       : 1) *
                                     4);
  jobs = static_cast<int>(std::min<long long>(jobs, trials));

  std::vector<double> welfare(trials, 0.0);
  std::vector<Aggregate> partial(jobs, agg);

  auto worker = [&](int job) {
    Aggregate& local = partial[job];
    for (long long trial = job; trial < trials; trial += jobs) {
      alloc::RunTrace trace = fn(static_cast<std::uint64_t>(trial));
      welfare[trial] = trace.welfare;
      for (int t = 0; t < T; ++t) {
        const alloc::RoundTrace& r = trace.rounds[t];
        const int j = r.realized >= 0 ? r.realized : 0;
        for (int i : r.first_allocated) ++local.counts[t][j][i];
        for (int i : r.second_allocated) ++local.counts[t][j][i];
      }
    }
  };

  if (jobs == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int job = 0; job < jobs; ++job) pool.emplace_back(worker, job);
    for (std::thread& th : pool) th.join();
  }

  for (const Aggregate& local : partial) {
    for (int t = 0; t < T; ++t) {
      for (std::size_t j = 0; j < agg.counts[t].size(); ++j) {
        for (int i = 0; i < n; ++i) agg.counts[t][j][i] += local.counts[t][j][i];
      }
    }
  }

  double sum = 0.0;
  for (double w : welfare) sum += w;
  agg.welfare_mean = sum / trials;
  double var = 0.0;
  for (double w : welfare) var += (w - agg.welfare_mean) * (w - agg.welfare_mean);
  agg.welfare_sd = trials > 1 ? std::sqrt(var / (trials - 1)) : 0.0;
  agg.welfare_ci95_half = 1.96 * agg.welfare_sd / std::sqrt(static_cast<double>(trials));
  return agg;
}

std::string fmt_double(double v) {
  return nlohmann::json(v).dump();
}

void write_csv_header(std::ostream& os,
                      const std::vector<std::pair<std::string, std::string>>& meta) {
  for (const auto& [key, value] : meta) os << "# " << key << ": " << value << "\n";
}

void write_pair_rows(std::ostream& os, const std::vector<PairRow>& rows, bool with_realization) {
  os << (with_realization ? "round,realization,user,x,empirical_prob,target_prob,ci_half_width"
                          : "round,user,x,empirical_prob,target_prob,ci_half_width")
     << "\n";
  for (const PairRow& row : rows) {
    os << row.round << ",";
    if (with_realization) os << row.realization << ",";
    os << row.user << ",";
    os << (row.x ? fmt_double(*row.x) : std::string{}) << ",";
    os << fmt_double(row.empirical) << ",";
    os << (row.target ? fmt_double(*row.target) : std::string{}) << ",";
    os << fmt_double(row.ci_half) << "\n";
  }
}

}  // namespace capalloc::sim
