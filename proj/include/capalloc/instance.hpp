#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace capalloc {

// One online round: the resource arrives with probability p, has capacity c,
// and offers value values[i] to user i; an allocated pair (i,t) succeeds
// independently with probability q[i].
struct RoundSpec {
  double p = 0.0;
  int c = 0;
  std::vector<double> values;
  std::vector<double> q;
};

struct BernoulliInstance {
  int n = 0;
  std::vector<RoundSpec> rounds;

  int num_rounds() const { return static_cast<int>(rounds.size()); }
};

// One realization of a general round: sampled with probability p, it brings
// capacity c, values and success probabilities.  Realization probabilities
// within a round sum to one (non-arrival is modeled as an explicit all-zeros
// realization).
struct Realization {
  double p = 0.0;
  int c = 0;
  std::vector<double> values;
  std::vector<double> q;
};

struct GeneralRound {
  std::vector<Realization> realizations;
};

struct GeneralInstance {
  int n = 0;
  std::vector<GeneralRound> rounds;

  int num_rounds() const { return static_cast<int>(rounds.size()); }
};

// Report-style validation: returns one message per violated invariant,
// empty iff the instance is well formed.
std::vector<std::string> validate(const BernoulliInstance& inst);
std::vector<std::string> validate(const GeneralInstance& inst);

// The two-user, two-round instance whose optimum-online value is 1.5 while
// the online LP reaches 2.0.
BernoulliInstance gen_lp_gap();

// The n-user instance on which the capacity-generalized proposal baseline
// collapses: a near-certain capacity-n round of unit values followed by a
// certain unit-capacity round worth n^2 per user.  Requires n >= 2.
BernoulliInstance gen_bdm_counterexample(int n);

// Two users, one capacity-two round arriving with probability eps, plus a
// sentinel zero-value round so availability after the round is a first-class
// observable.  Requires 0 < eps < 1.
BernoulliInstance gen_positive_correlation(double eps);

struct RandomInstanceParams {
  int n = 2;
  int T = 2;
  int c_min = 1, c_max = 2;
  double v_min = 0.0, v_max = 1.0;
  double q_min = 1.0, q_max = 1.0;
  double p_min = 0.5, p_max = 1.0;
};

// Uniform sampling within the given ranges; deterministic for a fixed seed,
// and the output always passes validate().  Empty or out-of-range bounds are
// rejected with std::invalid_argument.
BernoulliInstance gen_random(const RandomInstanceParams& params, std::uint64_t seed);

// Embeds a Bernoulli instance into the general model: each round becomes an
// active realization with probability p plus an all-zeros capacity-0
// realization with probability 1-p.  Degenerate realizations (p = 0 or p = 1)
// drop the vacuous branch so exact enumeration trees stay minimal.
GeneralInstance to_general(const BernoulliInstance& inst);

// Thrown on malformed instance/solution files and schema-version mismatches.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kBernoulliSchema = "capalloc-bernoulli/1";
inline constexpr const char* kGeneralSchema = "capalloc-general/1";

struct InstanceFile {
  std::variant<BernoulliInstance, GeneralInstance> value;
  std::vector<std::string> warnings;  // unknown fields, etc.

  bool is_general() const { return value.index() == 1; }
  const BernoulliInstance& bernoulli() const { return std::get<0>(value); }
  const GeneralInstance& general() const { return std::get<1>(value); }
};

InstanceFile read_instance(const std::filesystem::path& path);
void write_instance(const BernoulliInstance& inst, const std::filesystem::path& path);
void write_instance(const GeneralInstance& inst, const std::filesystem::path& path);

}  // namespace capalloc
