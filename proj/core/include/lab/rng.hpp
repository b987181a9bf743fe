#pragma once

#include <cstdint>
#include <random>

namespace lab {

/// Seeded generator with a platform-independent output stream.
/// mt19937_64 is algorithmically pinned by the standard, and doubles are
/// extracted from raw bits instead of going through distribution objects
/// (whose algorithms the standard leaves unspecified).
class Rng {
public:
  explicit Rng(std::uint64_t seed) : seed_(seed), eng_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next() { return eng_(); }

  /// Uniform in [0, 1), 53 mantissa bits.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [lo, hi] inclusive.
  int uniform_int(int lo, int hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(eng_() % span);
  }

  /// Independent stream for a sub-task; deterministic in (seed, tag).
  Rng fork(std::uint64_t tag) const {
    std::uint64_t s = seed_ ^ 0x243f6a8885a308d3ULL;
    s += (tag + 1) * 0x9e3779b97f4a7c15ULL;
    s ^= s >> 31;
    s *= 0xbf58476d1ce4e5b9ULL;
    s ^= s >> 29;
    return Rng(s == 0 ? 0x1234567ULL : s);
  }

private:
  std::uint64_t seed_;
  std::mt19937_64 eng_;
};

}  // namespace lab
