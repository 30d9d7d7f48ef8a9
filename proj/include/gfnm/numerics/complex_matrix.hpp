// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace gfnm {

using cplx = std::complex<double>;
using CVector = std::vector<cplx>;

/// Dense row-major complex matrix. All reductions run in a fixed
/// left-to-right order so results are bit-reproducible for fixed inputs.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols);
  ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> entries);

  static ComplexMatrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return entries_.empty(); }

  cplx& operator()(std::size_t r, std::size_t c) { return entries_[r * cols_ + c]; }
  const cplx& operator()(std::size_t r, std::size_t c) const { return entries_[r * cols_ + c]; }

  std::span<const cplx> data() const noexcept { return entries_; }
  std::span<cplx> data() noexcept { return entries_; }

  ComplexMatrix adjoint() const;
  ComplexMatrix operator*(const ComplexMatrix& rhs) const;

  /// A·x
  CVector apply(std::span<const cplx> x) const;
  /// Aᴴ·x
  CVector apply_adjoint(std::span<const cplx> x) const;

  /// AᴴA (+ reg·I). The lower triangle is computed and mirrored, so the
  /// result is exactly Hermitian.
  ComplexMatrix gram(double reg = 0.0) const;
  /// AAᴴ (+ reg·I), exactly Hermitian.
  ComplexMatrix outer_gram(double reg = 0.0) const;

  bool all_finite() const noexcept;

  friend bool operator==(const ComplexMatrix&, const ComplexMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cplx> entries_;
};

double norm2(std::span<const cplx> v);
double norm(std::span<const cplx> v);
/// aᴴb
cplx dot(std::span<const cplx> a, std::span<const cplx> b);

}  // namespace gfnm
