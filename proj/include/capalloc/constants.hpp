#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace capalloc {

// Analysis constants of the two-proposal scheme at a given kappa:
//   tau       early/late threshold for the prefix mass y,
//   gamma     correlation-bound factor for early-prefix pairs (f(1)),
//   delta     unrestricted correlation-bound factor,
//   rho_floor worst-case lower bound on the second-proposal normalizer.
struct DerivedConstants {
  double tau = 0.0;
  double gamma = 0.0;
  double delta = 0.0;
  double rho_floor = 0.0;

  static DerivedConstants at(double kappa) {
    const double hi = 0.5 + kappa;
    const double lo = 0.5 - kappa;
    DerivedConstants c;
    c.tau = lo / hi;
    c.gamma = 1.0 + hi * hi / lo;
    c.delta = c.gamma * (hi / lo) * (hi / lo);
    c.rho_floor = lo * (2.0 * c.tau - 1.0 - c.delta * hi);
    return c;
  }
};

// First-proposal acceptance probability and late flag for a pair with
// success-weighted prefix mass y.  The flag and the probability are derived
// from the same floating-point expression so that "alpha == 1" and "late"
// can never disagree between the simulator and the exact engine.
struct PairPolicy {
  double alpha = 0.0;
  bool late = false;
  double beta_numerator = 0.0;  // (0.5+kappa)*y - (0.5-kappa); negative iff early
};

inline PairPolicy pair_policy(double y, double kappa) {
  const double hi = 0.5 + kappa;
  y = std::clamp(y, 0.0, 1.0);
  PairPolicy p;
  const double raw = hi / (1.0 - hi * y);
  p.late = raw >= 1.0;
  p.alpha = p.late ? 1.0 : raw;
  p.beta_numerator = hi * y - (0.5 - kappa);
  return p;
}

// alpha_{i,t} = min(1, (0.5+kappa) / (1 - (0.5+kappa) y)).  Equals one
// exactly when y reaches tau.
inline double alpha_probability(double y, double kappa) {
  if (!(y >= 0.0) || y > 1.0 + 1e-9) {
    throw std::invalid_argument("alpha_probability: prefix mass outside [0, 1]");
  }
  return pair_policy(y, kappa).alpha;
}

// beta_{i,t} = min(1, ((0.5+kappa) y - (0.5-kappa)) / rho), clamped at zero
// against rounding when y sits exactly on tau.
inline double beta_probability(double y, double rho, double kappa) {
  if (!(rho > 0.0)) throw std::invalid_argument("beta_probability: rho must be positive");
  const double num = (0.5 + kappa) * y - (0.5 - kappa);
  return std::clamp(num / rho, 0.0, 1.0);
}

// The beta value actually used given a numerator and a normalizer.  A
// nonpositive rho means the qualifying event has probability zero, so the
// coin is never flipped; the convention below keeps min(1, num/rho) at its
// limit.  Shared by the simulator and the exact engine so the two can never
// disagree on a coin probability.
inline double capped_beta(double numerator, double rho) {
  const double num = std::max(numerator, 0.0);
  if (rho > 0.0) return std::min(1.0, num / rho);
  return num > 0.0 ? 1.0 : 0.0;
}

// Correlation growth function f(z) = 1 + z (0.5+kappa)^2 / (1 - z (0.5+kappa)).
inline double correlation_growth(double z, double kappa) {
  const double hi = 0.5 + kappa;
  return 1.0 + z * (hi * hi / (1.0 - z * hi));
}

}  // namespace capalloc
