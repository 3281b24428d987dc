#include "dqe/rng.hpp"

#include <stdexcept>

namespace dqe {

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("Rng::below: n must be positive");
  // Rejection sampling over the largest multiple of n to avoid modulo bias.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t Rng::derive_seed(std::uint64_t master, std::uint64_t stream) {
  // Two mixing rounds decorrelate nearby (master, stream) pairs.
  return splitmix64(splitmix64(master) ^ splitmix64(stream));
}

}  // namespace dqe
