#pragma once

#include <cstdint>

namespace urnlab {

std::uint64_t splitmix64(std::uint64_t& state);

/// xoshiro256++ keyed by (seed, stream_index).
class StreamRng {
 public:
  StreamRng(std::uint64_t seed, std::uint64_t stream_index);

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal via the polar Box-Muller method.
  double gaussian();
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace urnlab
