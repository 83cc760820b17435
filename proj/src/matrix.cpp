#include "carleman/matrix.hpp"

#include <algorithm>
#include <cmath>

namespace carleman {

Matrix::Matrix(std::size_t rows, std::size_t cols, Mode mode)
    : rows_(rows), cols_(cols), mode_(mode), data_(rows * cols, Scalar::zero(mode)) {}

Matrix Matrix::identity(std::size_t n, Mode mode) {
  Matrix m(n, n, mode);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = Scalar::one(mode);
  return m;
}

Matrix Matrix::from_rows(const std::vector<std::vector<Scalar>>& rows) {
  if (rows.empty() || rows.front().empty()) {
    throw Error(ErrorCode::Arity, "matrix needs at least one row and column");
  }
  Mode mode = rows.front().front().mode();
  Matrix m(rows.size(), rows.front().size(), mode);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != m.cols_) throw Error(ErrorCode::Arity, "ragged matrix rows");
    for (std::size_t c = 0; c < m.cols_; ++c) {
      if (rows[r][c].mode() != mode) throw Error(ErrorCode::ModeMismatch, "matrix entries of mixed mode");
      m(r, c) = rows[r][c];
    }
  }
  return m;
}

std::vector<Scalar> Matrix::row(std::size_t r) const {
  return {data_.begin() + static_cast<std::ptrdiff_t>(r * cols_),
          data_.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols_)};
}

std::vector<Scalar> Matrix::column(std::size_t c) const {
  std::vector<Scalar> out;
  out.reserve(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out.push_back((*this)(r, c));
  return out;
}

std::vector<Scalar> Matrix::diagonal() const {
  std::vector<Scalar> out;
  for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) out.push_back((*this)(i, i));
  return out;
}

bool Matrix::is_upper_triangular() const {
  for (std::size_t r = 1; r < rows_; ++r) {
    for (std::size_t c = 0; c < std::min(r, cols_); ++c) {
      if (!(*this)(r, c).is_zero()) return false;
    }
  }
  return true;
}

double Matrix::max_below_diagonal() const {
  double worst = 0.0;
  for (std::size_t r = 1; r < rows_; ++r) {
    for (std::size_t c = 0; c < std::min(r, cols_); ++c) worst = std::max(worst, (*this)(r, c).abs());
  }
  return worst;
}

double Matrix::max_abs() const {
  double worst = 0.0;
  for (const auto& v : data_) worst = std::max(worst, v.abs());
  return worst;
}

Matrix Matrix::adjoint() const {
  Matrix out(cols_, rows_, mode_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) {
      const Scalar& v = (*this)(r, c);
      out(c, r) = v.is_exact() ? v : Scalar(std::conj(v.to_complex()));
    }
  }
  return out;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols_ != b.rows_) throw Error(ErrorCode::Arity, "matrix product dimension mismatch");
  Matrix out(a.rows_, b.cols_, a.mode_);
  for (std::size_t r = 0; r < a.rows_; ++r) {
    for (std::size_t k = 0; k < a.cols_; ++k) {
      const Scalar& lhs = a(r, k);
      if (lhs.is_zero()) continue;
      for (std::size_t c = 0; c < b.cols_; ++c) {
        const Scalar& rhs = b(k, c);
        if (!rhs.is_zero()) out(r, c) += lhs * rhs;
      }
    }
  }
  return out;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
  if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw Error(ErrorCode::Arity, "matrix sum dimension mismatch");
  Matrix out = a;
  for (std::size_t i = 0; i < out.data_.size(); ++i) out.data_[i] += b.data_[i];
  return out;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw Error(ErrorCode::Arity, "matrix difference dimension mismatch");
  Matrix out = a;
  for (std::size_t i = 0; i < out.data_.size(); ++i) out.data_[i] -= b.data_[i];
  return out;
}

bool operator==(const Matrix& a, const Matrix& b) {
  return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
}

std::vector<Scalar> operator*(const Matrix& m, const std::vector<Scalar>& v) {
  if (m.cols() != v.size()) throw Error(ErrorCode::Arity, "matrix-vector dimension mismatch");
  std::vector<Scalar> out(m.rows(), Scalar::zero(m.mode()));
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) out[r] += m(r, c) * v[c];
  }
  return out;
}

namespace {

// Index of the pivot row for column `col` among rows [from, n), or n if none.
std::size_t choose_pivot(const Matrix& m, std::size_t col, std::size_t from, double tol) {
  std::size_t best = m.rows();
  double best_mag = 0.0;
  for (std::size_t r = from; r < m.rows(); ++r) {
    const Scalar& v = m(r, col);
    if (v.is_exact()) {
      if (!v.is_zero()) return r;
      continue;
    }
    double mag = v.abs();
    if (mag > best_mag) {
      best_mag = mag;
      best = r;
    }
  }
  if (best != m.rows() && best_mag <= tol) return m.rows();
  return best;
}

void swap_rows(Matrix& m, std::size_t a, std::size_t b) {
  if (a == b) return;
  for (std::size_t c = 0; c < m.cols(); ++c) std::swap(m(a, c), m(b, c));
}

}  // namespace

Matrix inverse(const Matrix& m) {
  if (!m.is_square()) throw Error(ErrorCode::Arity, "inverse of a non-square matrix");
  const std::size_t n = m.rows();
  const double tol = 1e-14 * std::max(1.0, m.max_abs());
  Matrix work = m;
  Matrix inv = Matrix::identity(n, m.mode());
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t p = choose_pivot(work, col, col, tol);
    if (p == n) throw Error(ErrorCode::SingularTransform, "matrix is singular");
    swap_rows(work, p, col);
    swap_rows(inv, p, col);
    Scalar pivot = work(col, col);
    for (std::size_t c = 0; c < n; ++c) {
      work(col, c) /= pivot;
      inv(col, c) /= pivot;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col || work(r, col).is_zero()) continue;
      Scalar f = work(r, col);
      for (std::size_t c = 0; c < n; ++c) {
        work(r, c) -= f * work(col, c);
        inv(r, c) -= f * inv(col, c);
      }
    }
  }
  return inv;
}

Scalar determinant(const Matrix& m) {
  if (!m.is_square()) throw Error(ErrorCode::Arity, "determinant of a non-square matrix");
  const std::size_t n = m.rows();
  Matrix work = m;
  Scalar det = Scalar::one(m.mode());
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t p = choose_pivot(work, col, col, 0.0);
    if (p == n) return Scalar::zero(m.mode());
    if (p != col) {
      swap_rows(work, p, col);
      det = -det;
    }
    det *= work(col, col);
    for (std::size_t r = col + 1; r < n; ++r) {
      if (work(r, col).is_zero()) continue;
      Scalar f = work(r, col) / work(col, col);
      for (std::size_t c = col; c < n; ++c) work(r, c) -= f * work(col, c);
    }
  }
  return det;
}

std::vector<Scalar> characteristic_polynomial(const Matrix& m) {
  if (!m.is_square()) throw Error(ErrorCode::Arity, "characteristic polynomial of a non-square matrix");
  const std::size_t n = m.rows();
  const Mode mode = m.mode();
  std::vector<Scalar> coeffs(n + 1, Scalar::zero(mode));
  coeffs[n] = Scalar::one(mode);
  Matrix acc(n, n, mode);  // M_0 = 0
  for (std::size_t k = 1; k <= n; ++k) {
    acc = m * acc;
    for (std::size_t i = 0; i < n; ++i) acc(i, i) += coeffs[n - k + 1];
    Matrix am = m * acc;
    Scalar trace = Scalar::zero(mode);
    for (std::size_t i = 0; i < n; ++i) trace += am(i, i);
    coeffs[n - k] = -trace / Scalar::from_int(static_cast<long>(k), mode);
  }
  return coeffs;
}

std::vector<Scalar> null_vector(const Matrix& m, double float_tol) {
  const std::size_t rows = m.rows();
  const std::size_t cols = m.cols();
  const double tol = float_tol * std::max(1.0, m.max_abs());
  Matrix work = m;
  std::vector<std::size_t> pivot_cols;
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t p = choose_pivot(work, c, r, tol);
    if (p == rows) continue;
    swap_rows(work, p, r);
    Scalar pivot = work(r, c);
    for (std::size_t cc = 0; cc < cols; ++cc) work(r, cc) /= pivot;
    for (std::size_t rr = 0; rr < rows; ++rr) {
      if (rr == r || work(rr, c).is_zero()) continue;
      Scalar f = work(rr, c);
      for (std::size_t cc = 0; cc < cols; ++cc) work(rr, cc) -= f * work(r, cc);
    }
    pivot_cols.push_back(c);
    ++r;
  }
  if (pivot_cols.size() == cols) return {};
  std::size_t free_col = 0;
  for (std::size_t c = 0; c < cols; ++c) {
    if (std::find(pivot_cols.begin(), pivot_cols.end(), c) == pivot_cols.end()) {
      free_col = c;
      break;
    }
  }
  std::vector<Scalar> v(cols, Scalar::zero(m.mode()));
  v[free_col] = Scalar::one(m.mode());
  for (std::size_t i = 0; i < pivot_cols.size(); ++i) v[pivot_cols[i]] = -work(i, free_col);
  if (m.mode() == Mode::Exact) {
    auto first = std::find_if(v.begin(), v.end(), [](const Scalar& s) { return !s.is_zero(); });
    Scalar scale = *first;
    for (auto& s : v) s /= scale;
  } else {
    double norm = 0.0;
    for (const auto& s : v) norm += std::norm(s.to_complex());
    Scalar inv(Scalar::Complex(1.0 / std::sqrt(norm), 0.0));
    for (auto& s : v) s *= inv;
  }
  return v;
}

bool approx_equal(const Matrix& a, const Matrix& b, double tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  if (a.mode() == Mode::Exact && b.mode() == Mode::Exact) return a == b;
  double scale = std::max({1.0, a.max_abs(), b.max_abs()});
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t c = 0; c < a.cols(); ++c) {
      if (std::abs(a(r, c).to_complex() - b(r, c).to_complex()) > tol * scale) return false;
    }
  }
  return true;
}

}  // namespace carleman
