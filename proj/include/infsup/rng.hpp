#ifndef INFSUP_RNG_HPP
#define INFSUP_RNG_HPP

#include <cstdint>

namespace infsup {

namespace detail {

// SplitMix64 finalizer; used for seeding and stream derivation.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace detail

/// xoshiro256++ generator with SplitMix64 seeding and cheap stream
/// derivation. Distinct stream tags give statistically independent
/// sequences, so samplers for interior/boundary/test points never
/// interleave; results are bit-stable across platforms and builds.
class SplitRng {
 public:
  explicit SplitRng(std::uint64_t seed) : base_seed_(seed) {
    std::uint64_t sm = seed;
    for (auto& w : s_) w = detail::splitmix64(sm);
  }

  /// Derive an independent stream. Children of the same parent with
  /// different tags (and children of different parents) do not collide.
  SplitRng split(std::uint64_t stream_tag) const {
    std::uint64_t sm = base_seed_ ^ (0xd1342543de82ef95ULL * (stream_tag + 1));
    return SplitRng(detail::splitmix64(sm));
  }

  std::uint64_t next() {
    const std::uint64_t result = detail::rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = detail::rotl(s_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [0, n). Fixed-point multiply; bias is O(n/2^64).
  std::uint64_t uniform_int(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * n) >> 64);
  }

  std::uint64_t base_seed() const { return base_seed_; }

 private:
  std::uint64_t base_seed_;
  std::uint64_t s_[4];
};

}  // namespace infsup

#endif  // INFSUP_RNG_HPP
