// SPDX-License-Identifier: Apache-2.0
#include "gfnm/numerics/rng.hpp"

#include <cmath>
#include <numbers>

#include "gfnm/errors.hpp"

namespace gfnm {

namespace {

constexpr std::uint64_t kPhiloxM0 = 0xD2E7470EE14C6C93ULL;
constexpr std::uint64_t kPhiloxM1 = 0xCA5A826395121157ULL;
constexpr std::uint64_t kPhiloxW0 = 0x9E3779B97F4A7C15ULL;  // golden ratio
constexpr std::uint64_t kPhiloxW1 = 0xBB67AE8584CAA73BULL;  // sqrt(3) - 1

__extension__ typedef unsigned __int128 uint128;

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi, std::uint64_t& lo) {
  const uint128 p = static_cast<uint128>(a) * b;
  hi = static_cast<std::uint64_t>(p >> 64);
  lo = static_cast<std::uint64_t>(p);
}

inline std::array<std::uint64_t, 4> philox_round(const std::array<std::uint64_t, 4>& c,
                                                 const std::array<std::uint64_t, 2>& k) {
  std::uint64_t hi0, lo0, hi1, lo1;
  mulhilo(kPhiloxM0, c[0], hi0, lo0);
  mulhilo(kPhiloxM1, c[2], hi1, lo1);
  return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

}  // namespace

std::array<std::uint64_t, 4> philox4x64(std::array<std::uint64_t, 4> counter,
                                        std::array<std::uint64_t, 2> key) {
  counter = philox_round(counter, key);
  for (int r = 1; r < 10; ++r) {
    key[0] += kPhiloxW0;
    key[1] += kPhiloxW1;
    counter = philox_round(counter, key);
  }
  return counter;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id) : key_{seed, stream_id} {}

RngStream RngStream::derive(std::uint64_t sub) const {
  return RngStream(key_[0], splitmix64(key_[1] ^ splitmix64(sub + 1)));
}

std::uint64_t RngStream::next_u64() {
  if (next_word_ == 4) {
    block_ = philox4x64(counter_, key_);
    // 256-bit increment
    for (auto& w : counter_)
      if (++w != 0) break;
    next_word_ = 0;
  }
  ++draws_;
  return block_[next_word_++];
}

double RngStream::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double RngStream::uniform_open_zero() {
  return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
}

std::uint64_t RngStream::uniform_index(std::uint64_t n) {
  if (n == 0) throw InputError("uniform_index: empty range");
  // Draws above `limit` fall in the incomplete last block of n values.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n + 1) % n;
  for (;;) {
    const std::uint64_t x = next_u64();
    if (x <= limit) return x % n;
  }
}

double RngStream::normal() {
  const double u1 = uniform_open_zero();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

cplx RngStream::complex_normal() {
  const double u1 = uniform_open_zero();
  const double u2 = uniform();
  const double r = std::sqrt(-std::log(u1));
  const double phi = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(phi), r * std::sin(phi)};
}

CVector gaussian_complex(RngStream& stream, std::size_t n) {
  CVector out(n);
  for (auto& v : out) v = stream.complex_normal();
  return out;
}

std::vector<std::uint32_t> sample_without_replacement(RngStream& stream, std::uint32_t n,
                                                      std::uint32_t k) {
  if (k > n) throw InputError("sample_without_replacement: k exceeds population");
  std::vector<std::uint32_t> pool(n);
  for (std::uint32_t i = 0; i < n; ++i) pool[i] = i;
  return sample_from(stream, pool, k);
}

std::vector<std::uint32_t> sample_from(RngStream& stream, std::span<const std::uint32_t> pool,
                                       std::uint32_t k) {
  if (k > pool.size()) throw InputError("sample_from: k exceeds pool size");
  std::vector<std::uint32_t> work(pool.begin(), pool.end());
  for (std::uint32_t i = 0; i < k; ++i) {
    const auto j = i + stream.uniform_index(work.size() - i);
    std::swap(work[i], work[j]);
  }
  work.resize(k);
  return work;
}

}  // namespace gfnm
