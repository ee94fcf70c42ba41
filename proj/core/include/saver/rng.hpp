#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "saver/text.hpp"

namespace saver {

// Seeded RNG wrapper. Uniform draws are derived from the raw mt19937_64
// stream instead of std::*_distribution so identical seeds give identical
// draws on every platform and standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0,1) with 53 bits of precision.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform index in [0,n); rejection sampling to avoid modulo bias.
  std::size_t index(std::size_t n) {
    if (n <= 1) return 0;
    const std::uint64_t span = n;
    const std::uint64_t limit = std::uint64_t(-1) - (std::uint64_t(-1) % span);
    std::uint64_t v = engine_();
    while (v >= limit) v = engine_();
    return static_cast<std::size_t>(v % span);
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

// Stable per-entity seed derivation, independent of processing order.
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view label) {
  return fnv1a64_mix(root ^ 0x9e3779b97f4a7c15ULL, label);
}

}  // namespace saver
