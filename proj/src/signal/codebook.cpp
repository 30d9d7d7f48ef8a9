// SPDX-License-Identifier: Apache-2.0
#include "gfnm/signal/codebook.hpp"

#include <algorithm>
#include <cmath>

#include "gfnm/errors.hpp"
#include "gfnm/numerics/rng.hpp"

namespace gfnm {

CVector SpreadingCodebook::sequence(std::size_t k) const {
  CVector c(spreading_length);
  for (std::size_t n = 0; n < spreading_length; ++n) c[n] = sequences(n, k);
  return c;
}

ComplexMatrix SpreadingCodebook::slot_matrix() const {
  const std::size_t n_len = spreading_length;
  ComplexMatrix c(n_len, n_len * num_devices);
  for (std::size_t k = 0; k < num_devices; ++k)
    for (std::size_t n = 0; n < n_len; ++n) c(n, k * n_len + n) = sequences(n, k);
  return c;
}

ComplexMatrix SpreadingCodebook::stacked_sensing_matrix(std::size_t slots) const {
  const std::size_t n_len = spreading_length;
  ComplexMatrix xi(n_len * slots, n_len * slots * num_devices);
  for (std::size_t k = 0; k < num_devices; ++k)
    for (std::size_t j = 0; j < slots; ++j)
      for (std::size_t n = 0; n < n_len; ++n)
        xi(j * n_len + n, (k * slots + j) * n_len + n) = sequences(n, k);
  return xi;
}

std::vector<cplx> product_alphabet(std::span<const double> levels) {
  std::vector<cplx> out;
  out.reserve(levels.size() * levels.size());
  for (double re : levels)
    for (double im : levels) out.emplace_back(re, im);
  return out;
}

std::vector<cplx> default_spreading_alphabet() {
  static constexpr double kLevels[] = {-2.0, -1.0, 0.0, 1.0};
  return product_alphabet(kLevels);
}

SpreadingCodebook generate_codebook(std::size_t num_devices, std::size_t spreading_length,
                                    std::span<const cplx> alphabet, std::uint64_t seed) {
  if (num_devices == 0) throw ConfigError("generate_codebook: K must be >= 1");
  if (spreading_length == 0) throw ConfigError("generate_codebook: N must be >= 1");
  if (alphabet.empty()) throw ConfigError("generate_codebook: spreading alphabet is empty");
  if (std::all_of(alphabet.begin(), alphabet.end(), [](cplx a) { return a == cplx{}; })) {
    throw ConfigError("generate_codebook: spreading alphabet contains only zero");
  }

  SpreadingCodebook cb;
  cb.num_devices = num_devices;
  cb.spreading_length = spreading_length;
  cb.alphabet.assign(alphabet.begin(), alphabet.end());
  cb.sequences = ComplexMatrix(spreading_length, num_devices);

  RngStream stream(seed);
  CVector column(spreading_length);
  for (std::size_t k = 0; k < num_devices; ++k) {
    double energy = 0.0;
    do {
      energy = 0.0;
      for (auto& c : column) {
        c = alphabet[stream.uniform_index(alphabet.size())];
        energy += std::norm(c);
      }
    } while (energy == 0.0);
    const double scale = 1.0 / std::sqrt(energy);
    for (std::size_t n = 0; n < spreading_length; ++n) cb.sequences(n, k) = column[n] * scale;
  }

  for (std::size_t k = 1; k < num_devices; ++k) {
    for (std::size_t q = 0; q < k; ++q) {
      bool same = true;
      for (std::size_t n = 0; n < spreading_length && same; ++n)
        same = cb.sequences(n, k) == cb.sequences(n, q);
      if (same) {
        ++cb.collisions;
        break;
      }
    }
  }
  return cb;
}

}  // namespace gfnm
