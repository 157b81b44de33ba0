#pragma once

// Counter-based pseudo-random generator ("splitmix64-ctr").
//
// The stream is fully specified by the algorithm so that ports in other
// languages reproduce the same draws:
//
//   mix64(z):  z ^= z >> 30; z *= 0xbf58476d1ce4e5b9;
//              z ^= z >> 27; z *= 0x94d049bb133111eb;
//              z ^= z >> 31
//   key(seed)          = mix64(seed ^ 0x6a09e667f3bcc909)
//   key.substream(id)  = mix64(key ^ mix64(id + 0x9e3779b97f4a7c15))
//   draw #i (i = 1,2,..) = mix64(key + i * 0x9e3779b97f4a7c15)   (mod 2^64)
//   uniform            = (draw >> 11) * 2^-53              in [0, 1)
//   normal             = sqrt(-2 ln(1 - u1)) * cos(2 pi u2) (two draws)

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <span>

#include "dmexp/error.hpp"

namespace dmexp {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : key_(mix64(seed ^ 0x6a09e667f3bcc909ULL)) {}

  /// Independent stream keyed by `id`; the parent stream is unaffected.
  [[nodiscard]] CounterRng substream(std::uint64_t id) const {
    CounterRng child(*this);
    child.key_ = mix64(key_ ^ mix64(id + kGolden));
    child.counter_ = 0;
    return child;
  }

  /// Nested substream, e.g. substream({trial, step}).
  [[nodiscard]] CounterRng substream(std::initializer_list<std::uint64_t> ids) const {
    CounterRng out(*this);
    for (auto id : ids) out = out.substream(id);
    return out;
  }

  std::uint64_t next_u64() { return mix64(key_ + (++counter_) * kGolden); }

  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double normal() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Uniform integer in [0, n) by rejection (unbiased).
  std::uint64_t below(std::uint64_t n) {
    require(n > 0, "CounterRng::below: n must be positive");
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t x = next_u64();
      if (x >= threshold) return x % n;
    }
  }

  /// Index drawn with probability proportional to weights[i] (weights >= 0).
  std::size_t categorical(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    require(total > 0.0, "CounterRng::categorical: weights sum to zero");
    const double u = uniform() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      acc += weights[i];
      if (u < acc) return i;
    }
    // u landed in the roundoff gap at the top; return the last positive weight
    for (std::size_t i = weights.size(); i-- > 0;)
      if (weights[i] > 0.0) return i;
    return weights.size() - 1;
  }

  [[nodiscard]] std::uint64_t draws() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace dmexp
