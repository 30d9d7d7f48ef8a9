// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gfnm/numerics/complex_matrix.hpp"

namespace gfnm {

using Bits = std::vector<std::uint8_t>;

/// A labeled constellation: point i carries the bit label i, most
/// significant bit first.
class ModulationScheme {
 public:
  ModulationScheme(std::vector<cplx> points, std::size_t bits_per_symbol);

  /// Gray-labeled unit-energy QPSK:
  /// 00 → (1+i)/√2, 01 → (−1+i)/√2, 11 → (−1−i)/√2, 10 → (1−i)/√2.
  static ModulationScheme qpsk();

  std::size_t bits_per_symbol() const noexcept { return bits_per_symbol_; }
  std::span<const cplx> points() const noexcept { return points_; }

  cplx map(std::span<const std::uint8_t> label) const;
  /// Throws InputError unless bits.size() is a multiple of bits_per_symbol().
  CVector modulate(std::span<const std::uint8_t> bits) const;

  std::size_t nearest_index(cplx symbol) const;
  cplx nearest_point(cplx symbol) const { return points_[nearest_index(symbol)]; }
  /// Nearest point in Euclidean distance, returned as its bit label.
  Bits demap(cplx symbol) const;
  void demap_into(cplx symbol, std::span<std::uint8_t> out) const;

 private:
  std::vector<cplx> points_;
  std::size_t bits_per_symbol_;
};

}  // namespace gfnm
