// include/codedmec/random.hpp
//
// Seeded random streams. Every draw goes through mt19937_64 and an explicit
// bits-to-double mapping so that results are identical across standard
// library implementations.
#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace codedmec {

/// Derive an independent 64-bit seed for a named substream of a master seed.
std::uint64_t derive_seed(std::uint64_t master, std::string_view stream, std::uint64_t index = 0);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Exp(1) by inversion.
  double exponential();

  /// Index drawn from a probability vector by inverse CDF. The last index
  /// with nonzero mass absorbs round-off.
  std::size_t categorical(std::span<const double> probabilities);

 private:
  std::mt19937_64 engine_;
};

}  // namespace codedmec
