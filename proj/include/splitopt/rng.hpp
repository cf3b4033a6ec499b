#pragma once

#include <cstdint>
#include <random>

namespace splitopt {

// Seeded random source with engine-independent draws so that seeded runs are
// reproducible across standard library implementations. Only the raw
// mt19937_64 output stream is consumed; bounded integers, unit uniforms and
// gaussians are derived here instead of through std distributions, whose
// algorithms are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  // Unbiased uniform in [0, n); n must be positive.
  std::size_t uniform_index(std::size_t n);

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform_unit();

  // Standard normal via Box-Muller; consumes exactly two uniforms per call.
  double gaussian();

  std::uint64_t seed() const { return seed_; }

  // Independent stream keyed by (seed, stream_id); does not advance *this.
  Rng derive(std::uint64_t stream_id) const;

  // splitmix64-style mixing of two words into a well-scrambled seed.
  static std::uint64_t mix(std::uint64_t a, std::uint64_t b);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace splitopt
