#pragma once

#include <array>
#include <cstdint>

namespace fracpot {

/// Philox4x32-10 block function (Salmon et al., "Parallel random numbers: as easy as 1, 2, 3").
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

/// SplitMix64 finalizer; used to derive keys for child streams.
std::uint64_t mix64(std::uint64_t z);

/// Counter-based random stream. The pair (seed, stream_index) fixes the whole
/// sequence; the seed is the Philox key and the stream index occupies the high
/// half of the counter, so distinct indices never share a block.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_index) : seed_(seed), stream_(stream_index) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_index() const { return stream_; }

  /// Independent child stream i of this stream.
  RngStream split(std::uint64_t i) const;

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform();
  double normal();
  /// Gamma(shape, 1) in log space; valid for every shape > 0.
  double log_gamma_variate(double shape);

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int available_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace fracpot
