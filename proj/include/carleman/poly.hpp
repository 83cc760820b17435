#pragma once

#include <cstddef>
#include <limits>
#include <map>
#include <vector>

#include "carleman/matrix.hpp"
#include "carleman/scalar.hpp"

namespace carleman {

/// Exponent vector of a monomial in a fixed number of variables.
struct Monomial {
  std::vector<unsigned> exponents;

  Monomial() = default;
  explicit Monomial(std::vector<unsigned> e) : exponents(std::move(e)) {}

  static Monomial constant(std::size_t nvars) { return Monomial(std::vector<unsigned>(nvars, 0)); }
  static Monomial unit(std::size_t nvars, std::size_t var, unsigned power = 1);

  std::size_t size() const noexcept { return exponents.size(); }
  unsigned degree() const noexcept;
  bool is_constant() const noexcept { return degree() == 0; }

  Monomial operator*(const Monomial& o) const;
  bool operator==(const Monomial& o) const = default;
};

/// Graded order: total degree ascending, then exponent vectors compared
/// lexicographically in *descending* order. For two variables and degree 2
/// this lists x^2, xy, y^2.
struct GradedLexLess {
  bool operator()(const Monomial& a, const Monomial& b) const;
};

inline constexpr unsigned kNoTruncation = std::numeric_limits<unsigned>::max();

/// Sparse multivariate polynomial in canonical form: no stored zero
/// coefficients, terms iterated in graded-lex order.
class Poly {
 public:
  using Terms = std::map<Monomial, Scalar, GradedLexLess>;

  Poly() = default;
  Poly(std::size_t nvars, Mode mode) : nvars_(nvars), mode_(mode) {}

  static Poly constant(std::size_t nvars, const Scalar& c);
  static Poly variable(std::size_t nvars, std::size_t var, Mode mode);
  static Poly monomial(const Monomial& m, const Scalar& c);

  std::size_t var_count() const noexcept { return nvars_; }
  Mode mode() const noexcept { return mode_; }
  const Terms& terms() const noexcept { return terms_; }
  bool is_zero() const noexcept { return terms_.empty(); }
  std::size_t term_count() const noexcept { return terms_.size(); }

  /// Highest total degree; 0 for constants and the zero polynomial.
  unsigned degree() const;
  Scalar coeff(const Monomial& m) const;
  Scalar constant_term() const { return coeff(Monomial::constant(nvars_)); }

  /// Adds `c` to the coefficient of `m`, dropping the term if it cancels.
  void add_term(const Monomial& m, const Scalar& c);

  bool operator==(const Poly& o) const {
    return nvars_ == o.nvars_ && mode_ == o.mode_ && terms_ == o.terms_;
  }

 private:
  std::size_t nvars_ = 0;
  Mode mode_ = Mode::Exact;
  Terms terms_;
};

Poly poly_add(const Poly& a, const Poly& b);
Poly poly_sub(const Poly& a, const Poly& b);
Poly poly_scale(const Poly& p, const Scalar& s);
Poly poly_truncate(const Poly& p, unsigned max_degree);
Poly poly_mul_truncated(const Poly& a, const Poly& b, unsigned max_degree = kNoTruncation);
Poly poly_pow_truncated(const Poly& p, unsigned e, unsigned max_degree = kNoTruncation);

/// p(subs[0], ..., subs[n-1]); every substitute must share one var_count.
Poly poly_compose(const Poly& p, const std::vector<Poly>& subs, unsigned max_degree = kNoTruncation);

/// p(A z' + B) expanded in z', truncated at max_degree.
Poly poly_substitute_affine(const Poly& p, const Matrix& a, const std::vector<Scalar>& b,
                            unsigned max_degree = kNoTruncation);

Scalar poly_eval(const Poly& p, const std::vector<Scalar>& z);
Poly poly_derivative(const Poly& p, std::size_t var);

/// Convert a float-free exact polynomial to float mode.
Poly poly_to_mode(const Poly& p, Mode mode);

}  // namespace carleman

namespace carleman {

/// All monomials in `nvars` variables of total degree <= max_degree, in
/// graded-lex order (constant first).
std::vector<Monomial> monomials_up_to(std::size_t nvars, unsigned max_degree);

}  // namespace carleman
