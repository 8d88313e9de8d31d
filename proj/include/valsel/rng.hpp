#pragma once

#include <cstdint>
#include <vector>

namespace valsel {

// Deterministic splitmix64 generator. All randomized operations in the
// library derive their streams from (seed, stream) pairs so results do not
// depend on call order, scheduling, or the platform's distribution
// implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  static Rng derive(std::uint64_t seed, std::uint64_t stream) {
    Rng r(seed);
    std::uint64_t a = r.next_u64();
    Rng s(a ^ (stream * 0x9e3779b97f4a7c15ULL));
    s.next_u64();
    return s;
  }

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Unbiased uniform integer in [0, bound).
  std::uint64_t next_below(std::uint64_t bound) {
    if (bound <= 1) return 0;
    const std::uint64_t threshold = -bound % bound;
    for (;;) {
      std::uint64_t r = next_u64();
      if (r >= threshold) return r % bound;
    }
  }

  // Standard normal via Box-Muller (no state caching, two draws per call).
  double next_normal();

 private:
  std::uint64_t state_;
};

// In-place Fisher-Yates shuffle.
void fisher_yates(std::vector<int>& v, Rng& rng);

std::vector<int> random_permutation(int n, Rng& rng);

// k distinct values from {0,...,n-1}; order is the draw order.
std::vector<int> sample_without_replacement(int n, int k, Rng& rng);

}  // namespace valsel
