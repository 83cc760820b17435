#pragma once

#include <vector>

#include "carleman/matrix.hpp"

namespace carleman {

/// T = P D P^{-1} with P upper triangular and unit diagonal.
struct SpectralDecomposition {
  std::vector<Scalar> eigenvalues;
  Matrix modal;          // P, columns are eigenvectors
  Matrix modal_inverse;  // P^{-1}
};

struct SpectralOptions {
  /// Float mode: diagonal entries closer than this (relative) count as equal.
  double distinct_tolerance = 1e-9;
};

/// Eigenvalues (the diagonal) and unit-diagonal eigenvectors of an upper
/// triangular matrix by back substitution. `modal_inverse` is left empty.
SpectralDecomposition eigvecs_triangular(const Matrix& t, const SpectralOptions& opts = {});

/// Upper-triangular inverse by column-wise back substitution.
Matrix invert_triangular(const Matrix& u);

/// eigvecs_triangular followed by invert_triangular of P.
SpectralDecomposition decompose(const Matrix& t, const SpectralOptions& opts = {});

/// Reference formulas summing over strictly increasing index chains; cost is
/// exponential, so matrices larger than kPathSumLimit are refused.
inline constexpr std::size_t kPathSumLimit = 10;
Scalar path_sum_eigvec_entry(const Matrix& t, std::size_t l0, std::size_t lp1);
Scalar path_sum_inverse_entry(const Matrix& u, std::size_t l0, std::size_t lp1);

/// P diag(lambda^i) P^{-1}.
Matrix matrix_power_spectral(const SpectralDecomposition& dec, unsigned i);

}  // namespace carleman
