#pragma once

#include <cstdint>
#include <cstddef>

namespace emim {

// Deterministic, platform-independent generator (splitmix64). The standard
// <random> distributions are implementation-defined, which would break
// bit-reproducibility contracts, so all randomness in the library flows
// through this type.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  // Derives an independent stream for a substream index. Used to make
  // per-clip generation order-independent: stream(seed, i) gives the same
  // values whether clips are generated serially or in parallel.
  static Rng stream(std::uint64_t seed, std::uint64_t index) {
    Rng mixer(seed + 0x9e3779b97f4a7c15ULL * (index + 1));
    mixer.next_u64();
    return mixer;
  }

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 bits of precision.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

  int uniform_int(int lo, int hi) {  // inclusive range
    return lo + static_cast<int>(next_below(static_cast<std::uint64_t>(hi - lo + 1)));
  }

 private:
  std::uint64_t state_;
};

}  // namespace emim
