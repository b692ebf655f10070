#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace qcollapse {

/// Philox4x64-10 block function (Salmon et al., "Parallel random numbers:
/// as easy as 1, 2, 3"). Maps a 256-bit counter and 128-bit key to 256 bits.
using PhiloxCounter = std::array<std::uint64_t, 4>;
using PhiloxKey = std::array<std::uint64_t, 2>;
PhiloxCounter philox4x64_10(PhiloxCounter counter, PhiloxKey key);

/// Counter-based random stream.
///
/// The key is (run seed, stream id); the counter enumerates blocks. Streams
/// with distinct ids are independent, so ensemble member i draws from
/// Rng(seed, i) no matter which worker thread runs it. Outputs match numpy's
/// `Philox(key=[seed, stream])` word for word.
class Rng {
 public:
  using result_type = std::uint64_t;

  Rng(std::uint64_t seed, std::uint64_t stream) : key_{seed, stream} {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();
  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::uint64_t seed() const { return key_[0]; }
  std::uint64_t stream() const { return key_[1]; }

 private:
  PhiloxKey key_;
  PhiloxCounter counter_{0, 0, 0, 0};
  PhiloxCounter buffer_{};
  int used_ = 4;
};

/// Reserved stream ids for run-level draws; ensemble members use 0..N-1.
inline constexpr std::uint64_t kChaosTestStream = 0xC4A05ull << 32;

}  // namespace qcollapse
