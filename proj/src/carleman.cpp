#include "carleman/carleman.hpp"

#include <functional>

namespace carleman {

std::size_t basis_size(std::size_t k, unsigned order) {
  // binomial(N + k, k) built incrementally as binomial(N + j, j), j = 1..k
  unsigned __int128 size = 1;
  for (std::size_t j = 1; j <= k; ++j) {
    size = size * (order + j) / j;
    if (size > MonomialBasis::kMaxSize) return MonomialBasis::kMaxSize + 1;
  }
  return static_cast<std::size_t>(size);
}

MonomialBasis::MonomialBasis(std::size_t k, unsigned order) : k_(k), order_(order) {
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "basis needs at least one variable", "basis");
  if (order == 0) throw Error(ErrorCode::InvalidArgument, "truncation order must be at least 1", "basis");
  if (basis_size(k, order) > kMaxSize) {
    throw Error(ErrorCode::SizeLimit,
                "basis for k=" + std::to_string(k) + ", N=" + std::to_string(order) + " exceeds " +
                    std::to_string(kMaxSize) + " monomials",
                "basis");
  }
  monomials_ = monomials_up_to(k, order);
  for (std::size_t i = 0; i < monomials_.size(); ++i) index_.emplace(monomials_[i], i);
}

std::size_t MonomialBasis::index_of(const Monomial& m) const {
  auto it = index_.find(m);
  return it == index_.end() ? monomials_.size() : it->second;
}

MonomialBasis build_basis(std::size_t k, unsigned order) { return MonomialBasis(k, order); }

CarlemanMatrix build_transition(const PolySystem& system, const MonomialBasis& basis) {
  system.validate();
  if (!system.is_depth_one()) {
    throw Error(ErrorCode::Arity, "transition matrix needs a depth-one system", "matrix");
  }
  if (system.k != basis.k()) {
    throw Error(ErrorCode::Arity, "basis dimension differs from system variable count", "matrix");
  }
  const std::size_t size = basis.size();
  const unsigned order = basis.order();
  CarlemanMatrix out{basis, Matrix(size, size, system.mode)};

  // powers[s][e] = F_s^e truncated at the order, filled on demand
  std::vector<std::vector<Poly>> powers(system.k);
  auto power = [&](std::size_t s, unsigned e) -> const Poly& {
    auto& row = powers[s];
    if (row.empty()) row.push_back(Poly::constant(system.k, Scalar::one(system.mode)));
    while (row.size() <= e) row.push_back(poly_mul_truncated(row.back(), system.equations[s], order));
    return row[e];
  };

  for (std::size_t a = 0; a < size; ++a) {
    const Monomial& m = basis[a];
    Poly image = Poly::constant(system.k, Scalar::one(system.mode));
    for (std::size_t s = 0; s < system.k && !image.is_zero(); ++s) {
      if (m.exponents[s] == 0) continue;
      image = poly_mul_truncated(image, power(s, m.exponents[s]), order);
    }
    for (const auto& [mono, c] : image.terms()) out.entries(a, basis.index_of(mono)) = c;
  }
  return out;
}

Scalar multinomial_entry(const std::vector<Scalar>& c, unsigned a, unsigned b) {
  if (c.empty()) throw Error(ErrorCode::InvalidArgument, "empty coefficient vector");
  const Mode mode = c.front().mode();
  const std::size_t m = c.size() - 1;
  Scalar total = Scalar::zero(mode);
  std::vector<unsigned> ks(m + 1, 0);
  mpz_class a_fact;
  mpz_fac_ui(a_fact.get_mpz_t(), a);

  // enumerate k_0..k_m with sum k = a, sum l*k_l = b
  std::function<void(std::size_t, unsigned, unsigned)> rec = [&](std::size_t l, unsigned left, unsigned weight) {
    if (l == m) {
      if (weight + static_cast<unsigned>(m) * left != b) return;
      ks[m] = left;
      mpz_class denom = 1;
      Scalar term = Scalar::one(mode);
      for (std::size_t t = 0; t <= m; ++t) {
        mpz_class f;
        mpz_fac_ui(f.get_mpz_t(), ks[t]);
        denom *= f;
        term *= c[t].pow(ks[t]);
      }
      mpq_class coef(a_fact, denom);
      coef.canonicalize();
      total += term * Scalar::from_rational(coef, mode);
      return;
    }
    for (unsigned kl = 0; kl <= left; ++kl) {
      unsigned w = weight + static_cast<unsigned>(l) * kl;
      if (w > b) break;
      ks[l] = kl;
      rec(l + 1, left - kl, w);
    }
    ks[l] = 0;
  };
  rec(0, a, 0);
  return total;
}

Monomial kron_index_map(std::size_t k, std::size_t kron_index) {
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "k must be positive");
  // block s starts at 1 + k + ... + k^{s-1}
  std::size_t degree = 0;
  std::size_t block_start = 0;
  std::size_t block_len = 1;
  while (kron_index >= block_start + block_len) {
    block_start += block_len;
    block_len *= k;
    ++degree;
  }
  Monomial m = Monomial::constant(k);
  std::size_t offset = kron_index - block_start;
  // base-k digits of the offset name the factor chosen from each copy of y
  for (std::size_t d = 0; d < degree; ++d) {
    m.exponents[offset % k] += 1;
    offset /= k;
  }
  return m;
}

Matrix matrix_power_direct(const Matrix& m, unsigned i) {
  if (!m.is_square()) throw Error(ErrorCode::Arity, "matrix power needs a square matrix");
  Matrix result = Matrix::identity(m.rows(), m.mode());
  Matrix base = m;
  while (i > 0) {
    if (i & 1U) result = result * base;
    i >>= 1U;
    if (i > 0) base = base * base;
  }
  return result;
}

}  // namespace carleman
