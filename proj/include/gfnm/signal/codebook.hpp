// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gfnm/numerics/complex_matrix.hpp"

namespace gfnm {

/// K unit-norm complex spreading sequences of length N (stored as the N×K
/// matrix whose column k is c_k).
struct SpreadingCodebook {
  std::size_t num_devices = 0;
  std::size_t spreading_length = 0;
  std::vector<cplx> alphabet;
  ComplexMatrix sequences;
  /// Number of columns identical to an earlier column.
  std::size_t collisions = 0;

  cplx entry(std::size_t n, std::size_t k) const { return sequences(n, k); }
  CVector sequence(std::size_t k) const;

  /// C = [diag(c_1) … diag(c_K)], N × NK.
  ComplexMatrix slot_matrix() const;
  /// Stacked J-slot sensing matrix ξ = [ξ_1 … ξ_K], NJ × NJK, where ξ_k is the
  /// block-diagonal repetition of diag(c_k) over the slots. Column index of
  /// (device k, slot j, subcarrier n) is (k·J + j)·N + n. Memory grows as
  /// N²J²K; intended for small configurations and cross-checks.
  ComplexMatrix stacked_sensing_matrix(std::size_t slots) const;
};

/// Every a + ib with a, b ∈ levels, ordered by (a, b).
std::vector<cplx> product_alphabet(std::span<const double> levels);

/// The 16-point set with real and imaginary parts in {−2, −1, 0, 1}.
std::vector<cplx> default_spreading_alphabet();

/// Entries drawn uniformly and independently from `alphabet`, then each
/// column scaled to unit Euclidean norm. An all-zero column cannot be
/// normalized and is redrawn. Deterministic in `seed`.
SpreadingCodebook generate_codebook(std::size_t num_devices, std::size_t spreading_length,
                                    std::span<const cplx> alphabet, std::uint64_t seed);

}  // namespace gfnm
