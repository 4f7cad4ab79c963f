#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace hazrate {

// SplitMix64 (Steele, Lea & Flood 2014). Each subject gets its own stream whose state is
// derived from (seed, subject index), so results do not depend on how subjects are scheduled.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t state) : state_(state) {}

  static SplitMix64 for_subject(std::uint64_t seed, std::uint64_t subject) {
    return SplitMix64(mix(seed ^ mix(subject + 0x632be59bd9b4e019ULL)));
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return mix(state_ += 0x9e3779b97f4a7c15ULL); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }
  // Standard exponential via inversion.
  double exponential() { return -std::log1p(-uniform()); }

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

}  // namespace hazrate
