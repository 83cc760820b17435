#pragma once

#include <map>
#include <vector>

#include "carleman/matrix.hpp"
#include "carleman/poly.hpp"
#include "carleman/recurrence.hpp"

namespace carleman {

/// All monomials of total degree <= N in k variables, graded-lex ordered.
class MonomialBasis {
 public:
  static constexpr std::size_t kMaxSize = 1000000;

  MonomialBasis() = default;
  MonomialBasis(std::size_t k, unsigned order);

  std::size_t k() const noexcept { return k_; }
  unsigned order() const noexcept { return order_; }
  std::size_t size() const noexcept { return monomials_.size(); }
  const Monomial& operator[](std::size_t i) const { return monomials_.at(i); }
  const std::vector<Monomial>& monomials() const noexcept { return monomials_; }
  /// Position of m, or size() when m is not in the basis.
  std::size_t index_of(const Monomial& m) const;

 private:
  std::size_t k_ = 0;
  unsigned order_ = 0;
  std::vector<Monomial> monomials_;
  std::map<Monomial, std::size_t, GradedLexLess> index_;
};

/// binomial(N + k, k), or kMaxSize + 1 when it exceeds the limit.
std::size_t basis_size(std::size_t k, unsigned order);

MonomialBasis build_basis(std::size_t k, unsigned order);

struct CarlemanMatrix {
  MonomialBasis basis;
  Matrix entries;

  bool triangular() const { return entries.is_upper_triangular(); }
};

/// Row a holds the basis coordinates of prod_s F_s^{e_s(a)} truncated at the
/// basis order.
CarlemanMatrix build_transition(const PolySystem& system, const MonomialBasis& basis);

/// Univariate entry via the constrained multinomial sum over k_0..k_m with
/// sum k_l = a and sum l*k_l = b.
Scalar multinomial_entry(const std::vector<Scalar>& c, unsigned a, unsigned b);

/// Exponent vector of position `kron_index` in the concatenation of the
/// Kronecker powers y^{(0)}, y^{(1)}, y^{(2)}, ... of a k-vector.
Monomial kron_index_map(std::size_t k, std::size_t kron_index);

/// m^i by repeated squaring.
Matrix matrix_power_direct(const Matrix& m, unsigned i);

}  // namespace carleman
