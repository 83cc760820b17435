#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "carleman/scalar.hpp"

namespace carleman {

/// Dense row-major matrix of scalars sharing one mode.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, Mode mode);

  static Matrix identity(std::size_t n, Mode mode);
  /// Rows must be non-empty and rectangular.
  static Matrix from_rows(const std::vector<std::vector<Scalar>>& rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  Mode mode() const noexcept { return mode_; }
  bool is_square() const noexcept { return rows_ == cols_; }

  Scalar& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const Scalar& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::vector<Scalar> row(std::size_t r) const;
  std::vector<Scalar> column(std::size_t c) const;
  std::vector<Scalar> diagonal() const;

  /// All entries strictly below the diagonal are exactly zero.
  bool is_upper_triangular() const;
  /// Largest |entry| strictly below the diagonal.
  double max_below_diagonal() const;
  double max_abs() const;

  Matrix adjoint() const;

  friend Matrix operator*(const Matrix& a, const Matrix& b);
  friend Matrix operator+(const Matrix& a, const Matrix& b);
  friend Matrix operator-(const Matrix& a, const Matrix& b);
  friend bool operator==(const Matrix& a, const Matrix& b);
  friend bool operator!=(const Matrix& a, const Matrix& b) { return !(a == b); }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Mode mode_ = Mode::Exact;
  std::vector<Scalar> data_;
};

std::vector<Scalar> operator*(const Matrix& m, const std::vector<Scalar>& v);

/// Gauss-Jordan inverse; partial pivoting by magnitude in float mode.
/// Throws SingularTransform when no usable pivot exists.
Matrix inverse(const Matrix& m);
Scalar determinant(const Matrix& m);

/// Characteristic polynomial coefficients det(xI - M), lowest degree first
/// (Faddeev-LeVerrier); the leading coefficient is 1.
std::vector<Scalar> characteristic_polynomial(const Matrix& m);

/// One non-zero vector of ker(m), or empty when the kernel is trivial. In exact
/// mode the first non-zero entry is scaled to 1.
std::vector<Scalar> null_vector(const Matrix& m, double float_tol = 1e-9);

/// |a_ij - b_ij| <= tol * max(1, ||a||, ||b||) for every entry.
bool approx_equal(const Matrix& a, const Matrix& b, double tol);

}  // namespace carleman
