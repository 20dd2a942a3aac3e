#pragma once

#include <cstdint>
#include <random>

namespace seqei {

/// Seeded random stream with a fully specified output sequence.
///
/// The engine is std::mt19937_64, whose output is fixed by the C++ standard.
/// Everything layered on top is implemented here rather than taken from
/// <random> distributions (whose algorithms are implementation-defined):
///
///   uniform()  = (engine() >> 11) * 2^-53, a 53-bit double in [0, 1)
///   normal()   = Box-Muller: with u1 = 1 - uniform(), u2 = uniform(),
///                r = sqrt(-2 ln u1), t = 2 pi u2; returns r cos t, then the
///                cached r sin t on the following call
///   below(n)   = unbiased integer in [0, n) by rejection of the top
///                partial block of the 64-bit range
///
/// Two streams built from the same seed produce identical values on every
/// conforming platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  std::uint64_t below(std::uint64_t n);

  template <typename RandomIt>
  void shuffle(RandomIt first, RandomIt last) {
    const auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
      const auto j = below(i);
      std::swap(first[i - 1], first[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

/// Mixes a base seed with a stream index (SplitMix64 finalizer) so that
/// sub-streams such as restarts or trials are decorrelated.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace seqei
