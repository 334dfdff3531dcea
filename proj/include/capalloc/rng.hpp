#pragma once

#include <cstdint>
#include <initializer_list>

namespace capalloc {

// splitmix64 finalizer; used for seed derivation and for seeding streams.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Derives an independent stream seed from a master seed and a key path, e.g.
// {trial, substream} or {sigma-tag, round, slot, user, sim}.  All randomness
// in the project flows through this: one master seed fans out into keyed
// streams, so results do not depend on evaluation order or thread count.
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = mix64(master ^ 0x6d75ab3074c1a91bull);
  for (std::uint64_t key : path) {
    h = mix64(h ^ (key * 0xd1342543de82ef95ull + 0x2545f4914f6cdd1dull));
  }
  return h;
}

// Substream tags used with derive_seed.  Trials draw their coins from
// separate streams per purpose so that, e.g., two algorithms run with the
// same seed see identical arrival sequences.
namespace stream {
inline constexpr std::uint64_t arrival = 1;
inline constexpr std::uint64_t pivotal = 2;
inline constexpr std::uint64_t alpha_coin = 3;
inline constexpr std::uint64_t beta_coin = 4;
inline constexpr std::uint64_t success = 5;
inline constexpr std::uint64_t sigma = 6;
inline constexpr std::uint64_t generator = 7;
inline constexpr std::uint64_t offline = 8;
inline constexpr std::uint64_t proposal = 9;
}  // namespace stream

// xoshiro256++ with splitmix64 seeding.  Cheap to construct (we spawn five
// streams per trial), and uniform01() is bit-identical across platforms,
// unlike std::uniform_real_distribution.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& word : state_) {
      s += 0x9e3779b97f4a7c15ull;
      std::uint64_t z = s;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
      word = z ^ (z >> 31);
    }
    if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0,1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform01() < p; }

  // Unbiased integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t v = next_u64();
    while (v >= limit) v = next_u64();
    return v % n;
  }

  // Inclusive bounds.
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  double uniform_real(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4];
};

}  // namespace capalloc
