// SPDX-License-Identifier: Apache-2.0
#include "gfnm/signal/modulation.hpp"

#include <cmath>
#include <string>

#include "gfnm/errors.hpp"

namespace gfnm {

ModulationScheme::ModulationScheme(std::vector<cplx> points, std::size_t bits_per_symbol)
    : points_(std::move(points)), bits_per_symbol_(bits_per_symbol) {
  if (bits_per_symbol_ == 0 || bits_per_symbol_ > 16 ||
      points_.size() != (std::size_t{1} << bits_per_symbol_)) {
    throw ConfigError("ModulationScheme: need 2^bits_per_symbol constellation points");
  }
}

ModulationScheme ModulationScheme::qpsk() {
  const double a = 1.0 / std::sqrt(2.0);
  // label index = b0·2 + b1
  return ModulationScheme({{a, a}, {-a, a}, {a, -a}, {-a, -a}}, 2);
}

cplx ModulationScheme::map(std::span<const std::uint8_t> label) const {
  if (label.size() != bits_per_symbol_) throw InputError("ModulationScheme::map: label width");
  std::size_t index = 0;
  for (auto b : label) index = (index << 1) | (b & 1u);
  return points_[index];
}

CVector ModulationScheme::modulate(std::span<const std::uint8_t> bits) const {
  if (bits.size() % bits_per_symbol_ != 0) {
    throw InputError("modulate: " + std::to_string(bits.size()) +
                     " bits is not a multiple of " + std::to_string(bits_per_symbol_));
  }
  CVector out(bits.size() / bits_per_symbol_);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = map(bits.subspan(i * bits_per_symbol_, bits_per_symbol_));
  return out;
}

std::size_t ModulationScheme::nearest_index(cplx symbol) const {
  std::size_t best = 0;
  double best_d = std::norm(symbol - points_[0]);
  for (std::size_t i = 1; i < points_.size(); ++i) {
    const double d = std::norm(symbol - points_[i]);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

Bits ModulationScheme::demap(cplx symbol) const {
  Bits out(bits_per_symbol_);
  demap_into(symbol, out);
  return out;
}

void ModulationScheme::demap_into(cplx symbol, std::span<std::uint8_t> out) const {
  if (out.size() != bits_per_symbol_) throw InputError("demap: output width");
  const std::size_t index = nearest_index(symbol);
  for (std::size_t b = 0; b < bits_per_symbol_; ++b)
    out[b] = static_cast<std::uint8_t>((index >> (bits_per_symbol_ - 1 - b)) & 1u);
}

}  // namespace gfnm
