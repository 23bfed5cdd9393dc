#pragma once

#include <cmath>
#include <cstdint>

// Self-contained PRNG so results are identical across platforms and standard
// library versions. std::* distributions are implementation-defined and would
// break byte-identical reruns.

namespace driftbench {

constexpr std::uint64_t splitmix64_step(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Child seed for component `index` of a run seeded with `master`. Keying by
/// component index (tree ordinal, window ordinal, month ordinal, ...) keeps
/// parallel and serial execution in agreement.
constexpr std::uint64_t derive_seed(std::uint64_t master,
                                    std::uint64_t index) noexcept {
  std::uint64_t s = master ^ (0x632be59bd9b4e019ULL * (index + 1));
  std::uint64_t a = splitmix64_step(s);
  std::uint64_t b = splitmix64_step(s);
  return a ^ (b << 1 | b >> 63);
}

class Rng {
 public:
  explicit constexpr Rng(std::uint64_t seed) : state_(seed) {}

  constexpr std::uint64_t next_u64() noexcept { return splitmix64_step(state_); }

  /// Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t next_below(std::uint64_t bound) noexcept {
    // Rejection sampling keeps the draw unbiased.
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % bound;
    }
  }

  /// Uniform double in [0, 1).
  double next_double() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  bool next_bernoulli(double p) noexcept { return next_double() < p; }

  /// Standard normal via Marsaglia polar; deterministic in the stream.
  double next_gaussian() noexcept {
    for (;;) {
      const double u = 2.0 * next_double() - 1.0;
      const double v = 2.0 * next_double() - 1.0;
      const double s = u * u + v * v;
      if (s > 0.0 && s < 1.0) {
        return u * std::sqrt(-2.0 * std::log(s) / s);
      }
    }
  }

 private:
  std::uint64_t state_;
};

}  // namespace driftbench
