#pragma once

#include <cstdint>
#include <random>

#include "geometry.hpp"

namespace malab {

// Deterministic RNG. mt19937_64 output is fully specified by the standard,
// but the std distributions are not, so the mappings are done by hand to
// keep results bit-identical across compilers.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t bits() { return eng_(); }

  // uniform in [0,1)
  double uniform() { return (eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // uniform integer in [0, n)
  std::uint64_t below(std::uint64_t n) {
    // modulo bias is negligible for our n << 2^64 and keeps this branch-free
    return eng_() % n;
  }

  bool coin() { return (eng_() & 1u) != 0; }

 private:
  std::mt19937_64 eng_;
};

// Halton low-discrepancy sequence (bases 2 and 3): quasi-random points
// in the unit square, used for reproducible section-center sampling.
inline double haltonDigit(std::uint64_t i, std::uint64_t base) {
  double f = 1.0, r = 0.0;
  while (i > 0) {
    f /= static_cast<double>(base);
    r += f * static_cast<double>(i % base);
    i /= base;
  }
  return r;
}

inline Vec2 halton2(std::uint64_t i) { return vec2(haltonDigit(i + 1, 2), haltonDigit(i + 1, 3)); }

// FNV-1a, used for output digests in run manifests.
inline std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h = 1469598103934665603ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace malab
