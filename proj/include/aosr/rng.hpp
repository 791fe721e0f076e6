#pragma once

#include <cstdint>
#include <optional>

namespace aosr {

/// Counter-based generator: output k is a hash of (seed, stream, k), so a
/// stream can be forked for any sub-task without sharing state.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) : seed_(seed), stream_(stream) {}

  std::uint64_t next_u64();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  /// Standard normal via Box-Muller; the second value of each pair is cached.
  double normal();

  /// Independent generator keyed by (seed, stream, id).
  Rng fork(std::uint64_t id) const;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  std::optional<double> cached_normal_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace aosr
