// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "gfnm/numerics/complex_matrix.hpp"

namespace gfnm {

/// Philox4x64-10 block function (Salmon et al. 2011 constants).
/// Maps a 256-bit counter and a 128-bit key to 256 random bits.
std::array<std::uint64_t, 4> philox4x64(std::array<std::uint64_t, 4> counter,
                                        std::array<std::uint64_t, 2> key);

/// SplitMix64 finalizer, used for subkey derivation.
std::uint64_t splitmix64(std::uint64_t x);

/// Counter-based random stream.
///
/// The key is (seed, stream id); the 256-bit counter starts at zero and its
/// low word is incremented once per 4-word block. Child streams are derived
/// with derive(sub): key' = (seed, splitmix64(stream id ^ splitmix64(sub + 1))).
/// A stream is single-owner; use derive() to hand independent streams to
/// concurrent workers.
class RngStream {
 public:
  static constexpr std::string_view kAlgorithm = "philox4x64-10";

  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  RngStream derive(std::uint64_t sub) const;

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1].
  double uniform_open_zero();
  /// Unbiased integer on [0, n), n > 0 (rejection sampling).
  std::uint64_t uniform_index(std::uint64_t n);
  /// N(0, 1) by the cosine branch of Box-Muller (two uniforms per draw).
  double normal();
  /// CN(0, 1): real and imaginary parts independent N(0, 1/2).
  cplx complex_normal();
  bool bernoulli(double p) { return uniform() < p; }

  std::uint64_t draws() const noexcept { return draws_; }
  std::uint64_t seed() const noexcept { return key_[0]; }
  std::uint64_t stream_id() const noexcept { return key_[1]; }

 private:
  std::array<std::uint64_t, 4> counter_{};
  std::array<std::uint64_t, 2> key_{};
  std::array<std::uint64_t, 4> block_{};
  unsigned next_word_ = 4;
  std::uint64_t draws_ = 0;
};

CVector gaussian_complex(RngStream& stream, std::size_t n);

/// k distinct indices drawn uniformly from [0, n) by a partial Fisher-Yates
/// shuffle, in draw order.
std::vector<std::uint32_t> sample_without_replacement(RngStream& stream, std::uint32_t n,
                                                      std::uint32_t k);

/// Same, drawing from an explicit pool.
std::vector<std::uint32_t> sample_from(RngStream& stream, std::span<const std::uint32_t> pool,
                                       std::uint32_t k);

}  // namespace gfnm
