#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace jcindex {

// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Seed for task `index` under a top-level seed: splitmix64(splitmix64(seed) ^ index).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(seed) ^ (index * 0xD1B54A32D192ED03ULL + 1));
}

// std::mt19937_64 (output sequence fixed by the standard) with variate
// transforms written out here so streams do not depend on the standard
// library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on (0, 1): 53 random bits, offset by half an ulp.
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
  }

  // Standard normal by Box-Muller; the second variate is cached.
  double normal();

  // Exp(rate); rate == 0 gives +infinity. One uniform is always consumed.
  double exponential(double rate);

  // Uniform integer in [0, n), unbiased.
  std::uint64_t index(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace jcindex
