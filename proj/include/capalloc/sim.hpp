#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "capalloc/allocator.hpp"

namespace capalloc::sim {

// Aggregated results of repeated trials: per-pair allocation counts and
// welfare statistics.  counts[t][j][i] with j = 0 for Bernoulli algorithms.
struct Aggregate {
  long long trials = 0;
  std::vector<std::vector<std::vector<long long>>> counts;
  double welfare_mean = 0.0;
  double welfare_sd = 0.0;
  double welfare_ci95_half = 0.0;

  double frequency(int t, int j, int i) const {
    return trials == 0 ? 0.0 : static_cast<double>(counts[t][j][i]) / trials;
  }
};

using TrialFn = std::function<alloc::RunTrace(std::uint64_t)>;

// Runs trials 0..trials-1 over `jobs` threads.  Per-trial streams are keyed
// by trial index, and welfare is reduced in trial order, so the result is
// byte-identical for any job count.
Aggregate run_trials(const TrialFn& fn, long long trials, int jobs,
                     const std::vector<int>& slots_per_round, int n);

// --- CSV helpers -------------------------------------------------------------

// Shortest round-trip decimal form; keeps CSV bodies reproducible.
std::string fmt_double(double v);

// '#'-prefixed key: value block above the column header.
void write_csv_header(std::ostream& os, const std::vector<std::pair<std::string, std::string>>& meta);

struct PairRow {
  int round = 0;
  int realization = -1;  // -1: omit the column (Bernoulli aggregates)
  int user = 0;
  std::optional<double> x;
  double empirical = 0.0;
  std::optional<double> target;
  double ci_half = 0.0;
};

void write_pair_rows(std::ostream& os, const std::vector<PairRow>& rows, bool with_realization);

}  // namespace capalloc::sim
