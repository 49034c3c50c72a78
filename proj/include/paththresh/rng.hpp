#pragma once

#include <cstdint>
#include <random>

namespace paththresh {

/// Portable seeded random source. The engine is std::mt19937_64, whose output
/// sequence is fixed by the C++ standard; the transforms below are written out
/// here because the standard library's distributions are implementation
/// defined.
///   uniform():  (bits >> 11) * 2^-53, in [0, 1)
///   normal():   Box-Muller on two uniforms, u1 mapped to (0, 1]; both outputs
///               of a pair are used, cosine branch first
///   below(m):   rejection sampling on the low bits, unbiased in [0, m)
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal();

  std::uint64_t below(std::uint64_t m);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace paththresh
