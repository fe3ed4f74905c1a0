#pragma once

#include <cmath>
#include <cstdint>

namespace ued {

// Counter-based deterministic random source. A draw is a pure function of
// (seed, stream, counter), so identical (seed, stream) pairs replay the same
// sequence on any platform, and independent streams can be handed to
// concurrent workers without shared state. Splitting is explicit: split(id)
// derives a child stream with its counter reset to zero.
class RngState {
 public:
  RngState() : RngState(0, 0) {}
  RngState(uint64_t seed, uint64_t stream = 0)
      : seed_(seed), stream_(stream), counter_(0) {
    key_ = mix(seed_ + mix(stream_ + kGolden));
  }

  uint64_t seed() const { return seed_; }
  uint64_t stream() const { return stream_; }

  RngState split(uint64_t stream_id) const {
    return RngState(seed_, mix(stream_ + kGolden * (stream_id + 1)));
  }

  uint64_t next_u64() { return mix(key_ + (++counter_) * kGolden); }

  // [0, 1)
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // [0, n)
  uint64_t uniform_u64(uint64_t n) {
    return static_cast<uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // [lo, hi] inclusive
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(uniform_u64(static_cast<uint64_t>(hi - lo) + 1));
  }

  bool bernoulli(double p) { return uniform() < p; }

  double normal() {
    // Box-Muller; u1 in (0,1] keeps the log finite.
    const double u1 =
        (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

 private:
  static constexpr uint64_t kGolden = 0x9E3779B97F4A7C15ull;
  static constexpr double kPi = 3.14159265358979323846;

  static uint64_t mix(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  uint64_t seed_;
  uint64_t stream_;
  uint64_t counter_;
  uint64_t key_;
};

}  // namespace ued
