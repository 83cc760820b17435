#pragma once

#include <initializer_list>
#include <map>
#include <random>
#include <utility>
#include <vector>

#include "carleman/poly.hpp"
#include "carleman/recurrence.hpp"

namespace testing_support {

using carleman::Matrix;
using carleman::Mode;
using carleman::Monomial;
using carleman::Poly;
using carleman::Scalar;

inline Scalar q(long num, long den = 1) {
  mpq_class v(num, den);
  v.canonicalize();
  return Scalar(v);
}

inline Scalar f(double re, double im = 0.0) { return Scalar(Scalar::Complex(re, im)); }

using TermList = std::vector<std::pair<std::vector<unsigned>, Scalar>>;

inline Poly poly(std::size_t nvars, const TermList& terms, Mode mode = Mode::Exact) {
  Poly p(nvars, mode);
  for (const auto& [e, c] : terms) p.add_term(Monomial(e), c);
  return p;
}

inline Matrix qmatrix(std::initializer_list<std::initializer_list<long>> rows) {
  std::vector<std::vector<Scalar>> r;
  for (const auto& row : rows) {
    std::vector<Scalar> out;
    for (long v : row) out.push_back(q(v));
    r.push_back(std::move(out));
  }
  return Matrix::from_rows(r);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  long integer(long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(gen_); }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(gen_); }
  double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }

  /// n/d with |n| <= bound, 1 <= d <= bound.
  Scalar rational(long bound, bool allow_zero = true) {
    while (true) {
      long n = integer(-bound, bound);
      if (n == 0 && !allow_zero) continue;
      return q(n, integer(1, bound));
    }
  }

  Monomial monomial(std::size_t nvars, unsigned max_degree, unsigned min_degree = 0) {
    unsigned d = static_cast<unsigned>(integer(min_degree, max_degree));
    std::vector<unsigned> e(nvars, 0);
    for (unsigned i = 0; i < d; ++i) e[static_cast<std::size_t>(integer(0, static_cast<long>(nvars) - 1))] += 1;
    return Monomial(e);
  }

  Poly polynomial(std::size_t nvars, unsigned max_degree, std::size_t terms, long bound, unsigned min_degree = 0) {
    Poly p(nvars, Mode::Exact);
    for (std::size_t t = 0; t < terms; ++t) p.add_term(monomial(nvars, max_degree, min_degree), rational(bound, false));
    return p;
  }

  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

/// Random depth-one exact system with zero constant terms, an upper
/// triangular linear part whose diagonal is drawn from distinct non-zero
/// rationals, and higher terms of degree 2..max_degree.
inline carleman::PolySystem random_triangular_system(Rng& rng, std::size_t k, unsigned max_degree, long bound) {
  std::vector<Scalar> diag;
  while (diag.size() < k) {
    Scalar c = rng.rational(bound, false);
    bool fresh = true;
    for (const auto& d : diag) fresh = fresh && !(d == c);
    if (fresh) diag.push_back(c);
  }
  std::vector<Poly> eqs;
  for (std::size_t p = 0; p < k; ++p) {
    Poly f(k, Mode::Exact);
    f.add_term(Monomial::unit(k, p), diag[p]);
    for (std::size_t l = p + 1; l < k; ++l) {
      if (rng.coin()) f.add_term(Monomial::unit(k, l), rng.rational(bound));
    }
    if (max_degree >= 2) {
      std::size_t extra = static_cast<std::size_t>(rng.integer(0, 4));
      for (std::size_t t = 0; t < extra; ++t) f.add_term(rng.monomial(k, max_degree, 2), rng.rational(bound, false));
    }
    eqs.push_back(std::move(f));
  }
  return carleman::make_system(std::move(eqs), 1);
}

}  // namespace testing_support
