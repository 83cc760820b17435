#include "carleman/spectral.hpp"

#include <functional>

namespace carleman {

namespace {

void require_upper_triangular(const Matrix& m, const char* what) {
  if (!m.is_square()) throw Error(ErrorCode::Arity, std::string(what) + " must be square", "spectral");
  if (!m.is_upper_triangular()) {
    throw Error(ErrorCode::NotTriangular,
                std::string(what) + " is not upper triangular (largest entry below the diagonal " +
                    format_double(m.max_below_diagonal()) + ")",
                "spectral");
  }
}

bool same_eigenvalue(const Scalar& a, const Scalar& b, double tol) {
  return a.is_exact() ? a == b : approx_equal(a, b, tol);
}

}  // namespace

SpectralDecomposition eigvecs_triangular(const Matrix& t, const SpectralOptions& opts) {
  require_upper_triangular(t, "transition matrix");
  const std::size_t n = t.rows();
  const Mode mode = t.mode();
  SpectralDecomposition dec;
  dec.eigenvalues = t.diagonal();

  // distinctness; sort a copy so the check is O(n log n)
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scalar_less(dec.eigenvalues[a], dec.eigenvalues[b]); });
  auto report = [&](std::size_t a, std::size_t b) {
    if (a > b) std::swap(a, b);
    throw Error(ErrorCode::RepeatedEigenvalue,
                "eigenvalue " + dec.eigenvalues[a].str() + " repeated at diagonal positions " + std::to_string(a) +
                    " and " + std::to_string(b) +
                    "; not diagonalizable under the distinctness condition (Jordan fallback is not supported)",
                "spectral");
  };
  if (mode == Mode::Exact) {
    for (std::size_t i = 1; i < n; ++i) {
      if (dec.eigenvalues[order[i]] == dec.eigenvalues[order[i - 1]]) report(order[i - 1], order[i]);
    }
  } else {
    // magnitude ordering does not keep near-equal complex values adjacent
    // in every case, so compare all pairs
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a + 1; b < n; ++b)
        if (same_eigenvalue(dec.eigenvalues[a], dec.eigenvalues[b], opts.distinct_tolerance)) report(a, b);
  }

  dec.modal = Matrix(n, n, mode);
  for (std::size_t a = 0; a < n; ++a) {
    const Scalar& lambda = dec.eigenvalues[a];
    dec.modal(a, a) = Scalar::one(mode);
    for (std::size_t b = a; b-- > 0;) {
      Scalar acc = Scalar::zero(mode);
      for (std::size_t c = b + 1; c <= a; ++c) {
        if (!t(b, c).is_zero() && !dec.modal(c, a).is_zero()) acc += t(b, c) * dec.modal(c, a);
      }
      if (!acc.is_zero()) dec.modal(b, a) = -acc / (t(b, b) - lambda);
    }
  }
  return dec;
}

Matrix invert_triangular(const Matrix& u) {
  require_upper_triangular(u, "matrix");
  const std::size_t n = u.rows();
  const Mode mode = u.mode();
  for (std::size_t i = 0; i < n; ++i) {
    if (u(i, i).is_zero()) {
      throw Error(ErrorCode::SingularTransform, "zero diagonal entry at index " + std::to_string(i), "spectral");
    }
  }
  Matrix inv(n, n, mode);
  for (std::size_t col = 0; col < n; ++col) {
    inv(col, col) = u(col, col).reciprocal();
    for (std::size_t r = col; r-- > 0;) {
      Scalar acc = Scalar::zero(mode);
      for (std::size_t c = r + 1; c <= col; ++c) {
        if (!u(r, c).is_zero() && !inv(c, col).is_zero()) acc += u(r, c) * inv(c, col);
      }
      if (!acc.is_zero()) inv(r, col) = -acc / u(r, r);
    }
  }
  return inv;
}

SpectralDecomposition decompose(const Matrix& t, const SpectralOptions& opts) {
  SpectralDecomposition dec = eigvecs_triangular(t, opts);
  dec.modal_inverse = invert_triangular(dec.modal);
  return dec;
}

namespace {

void require_path_sum_size(const Matrix& m) {
  if (m.rows() > kPathSumLimit) {
    throw Error(ErrorCode::SizeLimit,
                "path-sum reference limited to " + std::to_string(kPathSumLimit) + "x" +
                    std::to_string(kPathSumLimit) + " matrices",
                "spectral");
  }
}

// Calls visit(chain) for every strictly increasing chain from `from` to `to`.
void for_each_chain(std::size_t from, std::size_t to, const std::function<void(const std::vector<std::size_t>&)>& visit) {
  std::vector<std::size_t> chain{from};
  std::function<void()> rec = [&]() {
    std::size_t last = chain.back();
    if (last == to) {
      visit(chain);
      return;
    }
    for (std::size_t next = last + 1; next <= to; ++next) {
      chain.push_back(next);
      rec();
      chain.pop_back();
    }
  };
  rec();
}

}  // namespace

Scalar path_sum_eigvec_entry(const Matrix& t, std::size_t l0, std::size_t lp1) {
  require_path_sum_size(t);
  require_upper_triangular(t, "matrix");
  const Mode mode = t.mode();
  if (l0 > lp1) return Scalar::zero(mode);
  if (l0 == lp1) return Scalar::one(mode);
  const Scalar& lambda = t(lp1, lp1);
  Scalar total = Scalar::zero(mode);
  for_each_chain(l0, lp1, [&](const std::vector<std::size_t>& chain) {
    // (-1)^{p+1} prod_j M[l_j][l_{j+1}] / (M[l_j][l_j] - lambda)
    Scalar term = Scalar::one(mode);
    for (std::size_t j = 0; j + 1 < chain.size(); ++j) {
      const Scalar& entry = t(chain[j], chain[j + 1]);
      if (entry.is_zero()) return;
      term *= entry / (t(chain[j], chain[j]) - lambda);
    }
    if ((chain.size() - 1) % 2 == 1) term = -term;
    total += term;
  });
  return total;
}

Scalar path_sum_inverse_entry(const Matrix& u, std::size_t l0, std::size_t lp1) {
  require_path_sum_size(u);
  require_upper_triangular(u, "matrix");
  const Mode mode = u.mode();
  if (l0 > lp1) return Scalar::zero(mode);
  if (u(lp1, lp1).is_zero()) {
    throw Error(ErrorCode::SingularTransform, "zero diagonal entry at index " + std::to_string(lp1), "spectral");
  }
  Scalar total = Scalar::zero(mode);
  for_each_chain(l0, lp1, [&](const std::vector<std::size_t>& chain) {
    // (-1)^{p+1} prod_j U[l_j][l_{j+1}] / U[l_j][l_j]; the empty chain is 1
    Scalar term = Scalar::one(mode);
    for (std::size_t j = 0; j + 1 < chain.size(); ++j) {
      const Scalar& entry = u(chain[j], chain[j + 1]);
      if (entry.is_zero()) return;
      term *= entry / u(chain[j], chain[j]);
    }
    if ((chain.size() - 1) % 2 == 1) term = -term;
    total += term;
  });
  return total / u(lp1, lp1);
}

Matrix matrix_power_spectral(const SpectralDecomposition& dec, unsigned i) {
  const std::size_t n = dec.eigenvalues.size();
  if (dec.modal.rows() != n || dec.modal_inverse.rows() != n) {
    throw Error(ErrorCode::InvalidArgument, "decomposition is missing P or its inverse", "spectral");
  }
  Matrix scaled = dec.modal;
  for (std::size_t c = 0; c < n; ++c) {
    Scalar p = dec.eigenvalues[c].pow(i);
    for (std::size_t r = 0; r <= c; ++r) {
      if (!scaled(r, c).is_zero()) scaled(r, c) *= p;
    }
  }
  return scaled * dec.modal_inverse;
}

}  // namespace carleman
