// SPDX-License-Identifier: Apache-2.0
#include "gfnm/numerics/linalg.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

#include "gfnm/errors.hpp"

namespace gfnm {

CholeskyFactor cholesky(const ComplexMatrix& h, double relative_tol) {
  const std::size_t n = h.rows();
  if (h.cols() != n) throw InputError("cholesky: matrix is not square");
  if (!h.all_finite()) throw NumericFault("cholesky: non-finite input");

  double max_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, std::abs(h(i, i).real()));
  const double floor = relative_tol * std::max(max_diag, 1e-300);

  ComplexMatrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = h(j, j).real();
    for (std::size_t k = 0; k < j; ++k) d -= std::norm(l(j, k));
    if (!(d > floor)) throw DecompositionError("cholesky: matrix is not positive definite", j);
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      cplx acc = h(i, j);
      for (std::size_t k = 0; k < j; ++k) acc -= l(i, k) * std::conj(l(j, k));
      l(i, j) = acc / ljj;
    }
  }
  return {std::move(l)};
}

CVector cholesky_solve(const CholeskyFactor& factor, std::span<const cplx> b) {
  const auto& l = factor.lower;
  const std::size_t n = l.rows();
  if (b.size() != n) throw InputError("cholesky_solve: right-hand side length mismatch");
  CVector z(n);
  for (std::size_t i = 0; i < n; ++i) {
    cplx acc = b[i];
    for (std::size_t k = 0; k < i; ++k) acc -= l(i, k) * z[k];
    z[i] = acc / l(i, i).real();
  }
  CVector x(n);
  for (std::size_t ii = n; ii-- > 0;) {
    cplx acc = z[ii];
    for (std::size_t k = ii + 1; k < n; ++k) acc -= std::conj(l(k, ii)) * x[k];
    x[ii] = acc / l(ii, ii).real();
  }
  return x;
}

CVector hermitian_posdef_solve(const ComplexMatrix& h, std::span<const cplx> b) {
  if (h.rows() != b.size()) throw InputError("hermitian_posdef_solve: shape mismatch");
  return cholesky_solve(cholesky(h), b);
}

CVector regularized_normal_solve(const ComplexMatrix& a, std::span<const cplx> b, double reg) {
  if (a.rows() == 0 || a.cols() == 0) throw InputError("regularized_normal_solve: empty matrix");
  if (b.size() != a.rows()) {
    throw InputError("regularized_normal_solve: observation length " + std::to_string(b.size()) +
                     ", matrix has " + std::to_string(a.rows()) + " rows");
  }
  if (!(reg >= 0.0) || !std::isfinite(reg)) {
    throw InputError("regularized_normal_solve: regularization must be finite and >= 0");
  }

  if (reg > 0.0 && a.cols() > a.rows()) {
    const auto y = cholesky_solve(cholesky(a.outer_gram(reg)), b);
    return a.apply_adjoint(y);
  }

  const auto rhs = a.apply_adjoint(b);
  try {
    return cholesky_solve(cholesky(a.gram(reg)), rhs);
  } catch (const DecompositionError& e) {
    if (reg == 0.0) {
      throw RankDeficiencyError("regularized_normal_solve: AᴴA is singular", e.pivot());
    }
    throw;
  }
}

MinNormSolution min_norm_least_squares(const ComplexMatrix& a, std::span<const cplx> b) {
  if (b.size() != a.rows()) throw InputError("min_norm_least_squares: length of b differs from rows of A");
  const auto rows = static_cast<Eigen::Index>(a.rows());
  const auto cols = static_cast<Eigen::Index>(a.cols());
  Eigen::MatrixXcd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c)
      m(r, c) = a(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
  const Eigen::Map<const Eigen::VectorXcd> rhs(b.data(), rows);
  const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(m);
  const Eigen::VectorXcd x = cod.solve(rhs);
  MinNormSolution out;
  out.x.assign(x.data(), x.data() + x.size());
  out.rank = static_cast<std::size_t>(cod.rank());
  return out;
}

}  // namespace gfnm
