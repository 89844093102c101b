#pragma once

#include <cstdint>
#include <random>

namespace dsslat {

// Deterministic random source. Variates are derived from raw mt19937_64
// output with fixed arithmetic, so a given seed yields the same stream on
// every platform and standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Decorrelated stream for replication `index` under one master seed.
  static Rng stream(std::uint64_t master_seed, std::uint64_t index);

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double exponential(double rate);

  bool bernoulli(double p) { return uniform01() < p; }

  // Uniform on {0, ..., n - 1}, unbiased.
  std::uint32_t below(std::uint32_t n);

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace dsslat
