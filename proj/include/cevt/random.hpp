#pragma once

#include <array>
#include <cstdint>

namespace cevt {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// A stream is identified by a 64-bit key (the master seed) and a 64-bit stream id
/// (the replication index); the remaining 64 counter bits enumerate blocks inside the
/// stream. Two streams with different ids never share a counter value, so replications
/// can be generated in any order or in parallel with identical output.
///
/// Satisfies UniformRandomBitGenerator with 32-bit results.
class RandomStream {
 public:
  using result_type = std::uint32_t;

  RandomStream(std::uint64_t seed, std::uint64_t stream_id);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return 0xFFFFFFFFu; }
  result_type operator()();

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform();
  double standard_normal();
  double standard_exponential();
  double standard_gumbel();

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int next_ = 4;
};

}  // namespace cevt
