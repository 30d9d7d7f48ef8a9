// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gfnm/numerics/complex_matrix.hpp"

namespace gfnm {

/// Lower-triangular Cholesky factor L with H = L·Lᴴ.
struct CholeskyFactor {
  ComplexMatrix lower;
};

/// Throws DecompositionError naming the first non-positive pivot. Pivots at
/// or below `relative_tol`·max diagonal are treated as non-positive.
CholeskyFactor cholesky(const ComplexMatrix& h, double relative_tol = 1e-12);

CVector cholesky_solve(const CholeskyFactor& factor, std::span<const cplx> b);

/// Solves Hx = b for Hermitian positive definite H.
CVector hermitian_posdef_solve(const ComplexMatrix& h, std::span<const cplx> b);

/// Returns x = (AᴴA + reg·I)⁻¹Aᴴb, the minimizer of ‖Ax − b‖² + reg‖x‖².
///
/// For reg > 0 and a wide A (cols > rows) the equivalent m×m system
/// x = Aᴴ(AAᴴ + reg·I)⁻¹b is factorized instead. With reg = 0 the n×n normal
/// equations are always used and a singular AᴴA raises RankDeficiencyError.
CVector regularized_normal_solve(const ComplexMatrix& a, std::span<const cplx> b, double reg);

struct MinNormSolution {
  CVector x;
  std::size_t rank = 0;
};

/// x = A⁺b, the shortest minimizer of ‖Ax − b‖, for any shape and rank.
/// Complete orthogonal decomposition; rank uses Eigen's default threshold.
MinNormSolution min_norm_least_squares(const ComplexMatrix& a, std::span<const cplx> b);

}  // namespace gfnm
