#pragma once

#include <cstdint>
#include <limits>

namespace gsgi {

// SplitMix64 generator. The whole state is one 64-bit word, so generators are
// cheap to copy into game states and to split into independent streams.
// Conversions to reals and bounded integers are done here rather than through
// <random> distributions, whose output differs between standard libraries.
class Rng {
 public:
  using result_type = std::uint64_t;

  Rng() = default;
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() { return next(); }

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). Rejection sampling keeps it unbiased.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = max() - max() % n;
    std::uint64_t x;
    do {
      x = next();
    } while (x >= limit);
    return x % n;
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Derives an independent generator for a sub-stream (episode, worker, ...).
  Rng split(std::uint64_t stream) const {
    return Rng(mix(state_ ^ mix(stream + 0x632BE59BD9B4E019ULL)));
  }

  std::uint64_t state() const { return state_; }

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  friend bool operator==(const Rng&, const Rng&) = default;

 private:
  std::uint64_t state_ = 0;
};

}  // namespace gsgi
