#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "hrgc/error.hpp"
#include "hrgc/gf.hpp"

namespace hrgc {

// Dense row-major matrix of field symbols. Arithmetic lives in free functions
// that take the Field explicitly.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<Symbol> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows * cols) throw Error(ErrorKind::LengthMismatch, "matrix data size");
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  Symbol& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  Symbol operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<Symbol> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const Symbol> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  const std::vector<Symbol>& data() const { return data_; }
  std::vector<Symbol>& data() { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<Symbol> data_;
};

namespace linalg {

inline Matrix mul(const Field& f, const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw Error(ErrorKind::LengthMismatch, "matrix product shape");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      Symbol s = a(i, k);
      if (s == 0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) f.axpy(out(i, j), s, b(k, j));
    }
  return out;
}

inline std::vector<Symbol> mul(const Field& f, const Matrix& a, std::span<const Symbol> x) {
  if (a.cols() != x.size()) throw Error(ErrorKind::LengthMismatch, "matrix-vector shape");
  std::vector<Symbol> out(a.rows(), 0);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) f.axpy(out[i], a(i, k), x[k]);
  return out;
}

inline Symbol dot(const Field& f, std::span<const Symbol> a, std::span<const Symbol> b) {
  if (a.size() != b.size()) throw Error(ErrorKind::LengthMismatch, "dot product length");
  Symbol s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) f.axpy(s, a[i], b[i]);
  return s;
}

inline Matrix add(const Field& f, const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw Error(ErrorKind::LengthMismatch, "matrix sum shape");
  Matrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.data().size(); ++i) out.data()[i] = f.add(a.data()[i], b.data()[i]);
  return out;
}

inline Matrix sub(const Field& f, const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw Error(ErrorKind::LengthMismatch, "matrix difference shape");
  Matrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.data().size(); ++i) out.data()[i] = f.sub(a.data()[i], b.data()[i]);
  return out;
}

inline Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

inline Matrix select_rows(const Matrix& a, std::span<const int> rows) {
  Matrix out(rows.size(), a.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto r = static_cast<std::size_t>(rows[i]);
    if (r >= a.rows()) throw Error(ErrorKind::IndexOutOfRange, "row index");
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = a(r, j);
  }
  return out;
}

inline Matrix block(const Matrix& a, std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) {
  if (r0 + nr > a.rows() || c0 + nc > a.cols()) throw Error(ErrorKind::IndexOutOfRange, "block");
  Matrix out(nr, nc);
  for (std::size_t i = 0; i < nr; ++i)
    for (std::size_t j = 0; j < nc; ++j) out(i, j) = a(r0 + i, c0 + j);
  return out;
}

inline bool is_symmetric(const Matrix& a) {
  if (a.rows() != a.cols()) return false;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j)
      if (a(i, j) != a(j, i)) return false;
  return true;
}

// Reduces m to reduced row echelon form in place; returns pivot columns.
inline std::vector<std::size_t> rref(const Field& f, Matrix& m, std::size_t col_limit) {
  std::vector<std::size_t> pivots;
  std::size_t r = 0;
  for (std::size_t c = 0; c < col_limit && r < m.rows(); ++c) {
    std::size_t piv = r;
    while (piv < m.rows() && m(piv, c) == 0) ++piv;
    if (piv == m.rows()) continue;
    if (piv != r)
      for (std::size_t j = 0; j < m.cols(); ++j) std::swap(m(r, j), m(piv, j));
    Symbol inv = f.inv(m(r, c));
    for (std::size_t j = c; j < m.cols(); ++j) m(r, j) = f.mul(m(r, j), inv);
    for (std::size_t i = 0; i < m.rows(); ++i) {
      if (i == r || m(i, c) == 0) continue;
      Symbol factor = f.neg(m(i, c));
      for (std::size_t j = c; j < m.cols(); ++j) f.axpy(m(i, j), factor, m(r, j));
    }
    pivots.push_back(c);
    ++r;
  }
  return pivots;
}

inline std::size_t rank(const Field& f, Matrix m) { return rref(f, m, m.cols()).size(); }

inline std::optional<Matrix> inverse(const Field& f, const Matrix& a) {
  if (a.rows() != a.cols()) throw Error(ErrorKind::LengthMismatch, "inverse of non-square matrix");
  const std::size_t n = a.rows();
  Matrix aug(n, 2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) aug(i, j) = a(i, j);
    aug(i, n + i) = 1;
  }
  if (rref(f, aug, n).size() != n) return std::nullopt;
  return block(aug, 0, n, n, n);
}

inline Symbol determinant(const Field& f, Matrix m) {
  if (m.rows() != m.cols()) throw Error(ErrorKind::LengthMismatch, "determinant of non-square matrix");
  const std::size_t n = m.rows();
  Symbol det = 1;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    while (piv < n && m(piv, c) == 0) ++piv;
    if (piv == n) return 0;
    if (piv != c) {
      for (std::size_t j = 0; j < n; ++j) std::swap(m(c, j), m(piv, j));
      det = f.neg(det);
    }
    det = f.mul(det, m(c, c));
    Symbol inv = f.inv(m(c, c));
    for (std::size_t i = c + 1; i < n; ++i) {
      if (m(i, c) == 0) continue;
      Symbol factor = f.neg(f.mul(m(i, c), inv));
      for (std::size_t j = c; j < n; ++j) f.axpy(m(i, j), factor, m(c, j));
    }
  }
  return det;
}

struct SystemSolution {
  bool consistent = false;
  bool unique = false;
  std::vector<Symbol> x;  // one solution (free variables zero) when consistent
};

// Solves a x = b for any shape of a.
inline SystemSolution solve_system(const Field& f, const Matrix& a, std::span<const Symbol> b) {
  if (b.size() != a.rows()) throw Error(ErrorKind::LengthMismatch, "right-hand side length");
  const std::size_t n = a.cols();
  Matrix aug(a.rows(), n + 1);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < n; ++j) aug(i, j) = a(i, j);
    aug(i, n) = b[i];
  }
  auto piv = rref(f, aug, n);
  SystemSolution s;
  for (std::size_t i = piv.size(); i < aug.rows(); ++i)
    if (aug(i, n) != 0) return s;
  s.consistent = true;
  s.unique = piv.size() == n;
  s.x.assign(n, 0);
  for (std::size_t i = 0; i < piv.size(); ++i) s.x[piv[i]] = aug(i, n);
  return s;
}

// Square solve; nullopt when a is singular.
inline std::optional<std::vector<Symbol>> solve(const Field& f, const Matrix& a, std::span<const Symbol> b) {
  if (a.rows() != a.cols()) throw Error(ErrorKind::LengthMismatch, "square solve needs a square matrix");
  auto s = solve_system(f, a, b);
  if (!s.unique) return std::nullopt;
  return s.x;
}

// Right-multiply by inverse: X a = b  =>  X = b a^{-1}. Nullopt when singular.
inline std::optional<Matrix> solve_right(const Field& f, const Matrix& b, const Matrix& a) {
  auto inv = inverse(f, a);
  if (!inv) return std::nullopt;
  return mul(f, b, *inv);
}

}  // namespace linalg
}  // namespace hrgc
