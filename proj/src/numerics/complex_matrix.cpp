// SPDX-License-Identifier: Apache-2.0
#include "gfnm/numerics/complex_matrix.hpp"

#include <cmath>
#include <string>

#include "gfnm/errors.hpp"

namespace gfnm {

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), entries_(rows * cols) {}

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
  if (entries_.size() != rows * cols) {
    throw InputError("ComplexMatrix: " + std::to_string(entries_.size()) + " entries for a " +
                     std::to_string(rows) + "x" + std::to_string(cols) + " matrix");
  }
}

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
  ComplexMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

ComplexMatrix ComplexMatrix::adjoint() const {
  ComplexMatrix out(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) out(c, r) = std::conj((*this)(r, c));
  return out;
}

ComplexMatrix ComplexMatrix::operator*(const ComplexMatrix& rhs) const {
  if (cols_ != rhs.rows_) {
    throw InputError("ComplexMatrix product: inner dimensions " + std::to_string(cols_) +
                     " and " + std::to_string(rhs.rows_) + " differ");
  }
  ComplexMatrix out(rows_, rhs.cols_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < rhs.cols_; ++c) {
      cplx acc = 0.0;
      for (std::size_t i = 0; i < cols_; ++i) acc += (*this)(r, i) * rhs(i, c);
      out(r, c) = acc;
    }
  }
  return out;
}

CVector ComplexMatrix::apply(std::span<const cplx> x) const {
  if (x.size() != cols_) {
    throw InputError("ComplexMatrix::apply: vector length " + std::to_string(x.size()) +
                     ", expected " + std::to_string(cols_));
  }
  CVector y(rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    cplx acc = 0.0;
    const cplx* row = &entries_[r * cols_];
    for (std::size_t c = 0; c < cols_; ++c) acc += row[c] * x[c];
    y[r] = acc;
  }
  return y;
}

CVector ComplexMatrix::apply_adjoint(std::span<const cplx> x) const {
  if (x.size() != rows_) {
    throw InputError("ComplexMatrix::apply_adjoint: vector length " + std::to_string(x.size()) +
                     ", expected " + std::to_string(rows_));
  }
  CVector y(cols_);
  for (std::size_t c = 0; c < cols_; ++c) {
    cplx acc = 0.0;
    for (std::size_t r = 0; r < rows_; ++r) acc += std::conj((*this)(r, c)) * x[r];
    y[c] = acc;
  }
  return y;
}

ComplexMatrix ComplexMatrix::gram(double reg) const {
  ComplexMatrix g(cols_, cols_);
  for (std::size_t i = 0; i < cols_; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      cplx acc = 0.0;
      for (std::size_t r = 0; r < rows_; ++r) acc += std::conj((*this)(r, i)) * (*this)(r, j);
      g(i, j) = acc;
      g(j, i) = std::conj(acc);
    }
    g(i, i) = cplx(g(i, i).real() + reg, 0.0);
  }
  return g;
}

ComplexMatrix ComplexMatrix::outer_gram(double reg) const {
  ComplexMatrix g(rows_, rows_);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      cplx acc = 0.0;
      for (std::size_t c = 0; c < cols_; ++c) acc += (*this)(i, c) * std::conj((*this)(j, c));
      g(i, j) = acc;
      g(j, i) = std::conj(acc);
    }
    g(i, i) = cplx(g(i, i).real() + reg, 0.0);
  }
  return g;
}

bool ComplexMatrix::all_finite() const noexcept {
  for (const auto& v : entries_)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  return true;
}

double norm2(std::span<const cplx> v) {
  double acc = 0.0;
  for (const auto& x : v) acc += std::norm(x);
  return acc;
}

double norm(std::span<const cplx> v) { return std::sqrt(norm2(v)); }

cplx dot(std::span<const cplx> a, std::span<const cplx> b) {
  if (a.size() != b.size()) throw InputError("dot: length mismatch");
  cplx acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
  return acc;
}

}  // namespace gfnm
