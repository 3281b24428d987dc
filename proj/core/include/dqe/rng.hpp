#pragma once

#include <cstdint>
#include <random>

namespace dqe {

// Deterministic random source used everywhere randomness is needed.
// std::mt19937_64 is fully specified by the standard, and the uniform
// mappings below avoid std::uniform_real_distribution (whose output is
// implementation-defined), so equal seeds give equal draws on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53-bit resolution.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Unbiased uniform integer on [0, n); n must be positive.
  std::uint64_t below(std::uint64_t n);

  /// Independent per-item seed derived from a master seed (splitmix64 mix).
  static std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

 private:
  std::mt19937_64 engine_;
};

/// In-place Fisher–Yates shuffle with the portable Rng (std::shuffle is
/// implementation-defined and would break cross-platform determinism).
template <typename Container>
void deterministic_shuffle(Container& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace dqe
