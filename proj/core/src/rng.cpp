#include "dsslat/rng.hpp"

#include <cmath>

namespace dsslat {

namespace {

// splitmix64 finalizer; decorrelates nearby seeds.
std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace

Rng Rng::stream(std::uint64_t master_seed, std::uint64_t index) {
  return Rng(mix64(mix64(master_seed) + index));
}

double Rng::exponential(double rate) {
  // -log1p(-u) maps u in [0,1) to (0, inf) without hitting log(0).
  return -std::log1p(-uniform01()) / rate;
}

std::uint32_t Rng::below(std::uint32_t n) {
  // Rejection below the largest multiple of n; unbiased for all n.
  const std::uint64_t limit = ~0ull - ~0ull % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return static_cast<std::uint32_t>(x % n);
}

}  // namespace dsslat
