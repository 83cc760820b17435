#include "carleman/poly.hpp"

#include <numeric>

namespace carleman {

Monomial Monomial::unit(std::size_t nvars, std::size_t var, unsigned power) {
  Monomial m = constant(nvars);
  m.exponents.at(var) = power;
  return m;
}

unsigned Monomial::degree() const noexcept {
  return std::accumulate(exponents.begin(), exponents.end(), 0U);
}

Monomial Monomial::operator*(const Monomial& o) const {
  if (o.size() != size()) throw Error(ErrorCode::Arity, "monomial arity mismatch");
  Monomial out = *this;
  for (std::size_t i = 0; i < size(); ++i) out.exponents[i] += o.exponents[i];
  return out;
}

bool GradedLexLess::operator()(const Monomial& a, const Monomial& b) const {
  unsigned da = a.degree(), db = b.degree();
  if (da != db) return da < db;
  return b.exponents < a.exponents;
}

Poly Poly::constant(std::size_t nvars, const Scalar& c) {
  Poly p(nvars, c.mode());
  p.add_term(Monomial::constant(nvars), c);
  return p;
}

Poly Poly::variable(std::size_t nvars, std::size_t var, Mode mode) {
  if (var >= nvars) throw Error(ErrorCode::Arity, "variable index out of range");
  Poly p(nvars, mode);
  p.add_term(Monomial::unit(nvars, var), Scalar::one(mode));
  return p;
}

Poly Poly::monomial(const Monomial& m, const Scalar& c) {
  Poly p(m.size(), c.mode());
  p.add_term(m, c);
  return p;
}

unsigned Poly::degree() const { return terms_.empty() ? 0 : terms_.rbegin()->first.degree(); }

Scalar Poly::coeff(const Monomial& m) const {
  auto it = terms_.find(m);
  return it == terms_.end() ? Scalar::zero(mode_) : it->second;
}

void Poly::add_term(const Monomial& m, const Scalar& c) {
  if (m.size() != nvars_) throw Error(ErrorCode::Arity, "monomial arity does not match polynomial");
  if (c.mode() != mode_) throw Error(ErrorCode::ModeMismatch, "coefficient mode does not match polynomial");
  if (c.is_zero()) return;
  auto [it, inserted] = terms_.try_emplace(m, c);
  if (!inserted) {
    it->second += c;
    if (it->second.is_zero()) terms_.erase(it);
  }
}

namespace {

void require_same_arity(const Poly& a, const Poly& b) {
  if (a.var_count() != b.var_count()) {
    throw Error(ErrorCode::Arity, "polynomials over " + std::to_string(a.var_count()) + " and " +
                                      std::to_string(b.var_count()) + " variables");
  }
  if (a.mode() != b.mode()) throw Error(ErrorCode::ModeMismatch, "polynomials of different mode");
}

}  // namespace

Poly poly_add(const Poly& a, const Poly& b) {
  require_same_arity(a, b);
  Poly out = a;
  for (const auto& [m, c] : b.terms()) out.add_term(m, c);
  return out;
}

Poly poly_sub(const Poly& a, const Poly& b) {
  require_same_arity(a, b);
  Poly out = a;
  for (const auto& [m, c] : b.terms()) out.add_term(m, -c);
  return out;
}

Poly poly_scale(const Poly& p, const Scalar& s) {
  Poly out(p.var_count(), p.mode());
  if (s.is_zero()) return out;
  for (const auto& [m, c] : p.terms()) out.add_term(m, c * s);
  return out;
}

Poly poly_truncate(const Poly& p, unsigned max_degree) {
  if (max_degree == kNoTruncation || p.degree() <= max_degree) return p;
  Poly out(p.var_count(), p.mode());
  for (const auto& [m, c] : p.terms()) {
    if (m.degree() > max_degree) break;
    out.add_term(m, c);
  }
  return out;
}

Poly poly_mul_truncated(const Poly& a, const Poly& b, unsigned max_degree) {
  require_same_arity(a, b);
  Poly out(a.var_count(), a.mode());
  for (const auto& [ma, ca] : a.terms()) {
    const unsigned da = ma.degree();
    if (max_degree != kNoTruncation && da > max_degree) break;
    for (const auto& [mb, cb] : b.terms()) {
      // terms are ordered by degree, so the rest of b is too large as well
      if (max_degree != kNoTruncation && da + mb.degree() > max_degree) break;
      out.add_term(ma * mb, ca * cb);
    }
  }
  return out;
}

Poly poly_pow_truncated(const Poly& p, unsigned e, unsigned max_degree) {
  Poly result = Poly::constant(p.var_count(), Scalar::one(p.mode()));
  Poly base = poly_truncate(p, max_degree);
  while (e > 0) {
    if (e & 1U) result = poly_mul_truncated(result, base, max_degree);
    e >>= 1U;
    if (e > 0) base = poly_mul_truncated(base, base, max_degree);
  }
  return poly_truncate(result, max_degree);
}

Poly poly_compose(const Poly& p, const std::vector<Poly>& subs, unsigned max_degree) {
  if (subs.size() != p.var_count()) {
    throw Error(ErrorCode::Arity, "composition needs one substitute per variable");
  }
  if (subs.empty()) return p;
  const std::size_t nvars = subs.front().var_count();
  for (const auto& s : subs) {
    if (s.var_count() != nvars) throw Error(ErrorCode::Arity, "substitutes of different arity");
    if (s.mode() != p.mode()) throw Error(ErrorCode::ModeMismatch, "substitute mode differs from polynomial");
  }
  // cache[v][e] = subs[v]^e truncated
  std::vector<std::vector<Poly>> cache(subs.size());
  auto power = [&](std::size_t v, unsigned e) -> const Poly& {
    auto& row = cache[v];
    if (row.empty()) row.push_back(Poly::constant(nvars, Scalar::one(p.mode())));
    while (row.size() <= e) row.push_back(poly_mul_truncated(row.back(), subs[v], max_degree));
    return row[e];
  };
  Poly out(nvars, p.mode());
  for (const auto& [m, c] : p.terms()) {
    Poly term = Poly::constant(nvars, c);
    for (std::size_t v = 0; v < m.size() && !term.is_zero(); ++v) {
      if (m.exponents[v] == 0) continue;
      term = poly_mul_truncated(term, power(v, m.exponents[v]), max_degree);
    }
    for (const auto& [tm, tc] : term.terms()) out.add_term(tm, tc);
  }
  return out;
}

Poly poly_substitute_affine(const Poly& p, const Matrix& a, const std::vector<Scalar>& b,
                            unsigned max_degree) {
  const std::size_t k = p.var_count();
  if (!a.is_square() || a.rows() != k || b.size() != k) {
    throw Error(ErrorCode::Arity, "affine substitution dimensions do not match polynomial arity");
  }
  std::vector<Poly> subs;
  subs.reserve(k);
  for (std::size_t r = 0; r < k; ++r) {
    Poly s = Poly::constant(k, b[r]);
    for (std::size_t c = 0; c < k; ++c) s.add_term(Monomial::unit(k, c), a(r, c));
    subs.push_back(std::move(s));
  }
  return poly_compose(p, subs, max_degree);
}

Scalar poly_eval(const Poly& p, const std::vector<Scalar>& z) {
  if (z.size() != p.var_count()) {
    throw Error(ErrorCode::Arity, "evaluation point has " + std::to_string(z.size()) +
                                      " coordinates, polynomial has " + std::to_string(p.var_count()));
  }
  // powers[v][e] = z[v]^e, built lazily
  std::vector<std::vector<Scalar>> powers(z.size());
  Scalar acc = Scalar::zero(p.mode());
  for (const auto& [m, c] : p.terms()) {
    Scalar term = c;
    for (std::size_t v = 0; v < m.size(); ++v) {
      unsigned e = m.exponents[v];
      if (e == 0) continue;
      auto& row = powers[v];
      if (row.empty()) row.push_back(Scalar::one(p.mode()));
      while (row.size() <= e) row.push_back(row.back() * z[v]);
      term *= row[e];
    }
    acc += term;
  }
  return acc;
}

Poly poly_derivative(const Poly& p, std::size_t var) {
  if (var >= p.var_count()) throw Error(ErrorCode::Arity, "derivative variable out of range");
  Poly out(p.var_count(), p.mode());
  for (const auto& [m, c] : p.terms()) {
    unsigned e = m.exponents[var];
    if (e == 0) continue;
    Monomial d = m;
    d.exponents[var] = e - 1;
    out.add_term(d, c * Scalar::from_int(static_cast<long>(e), p.mode()));
  }
  return out;
}

Poly poly_to_mode(const Poly& p, Mode mode) {
  if (p.mode() == mode) return p;
  if (mode == Mode::Exact) throw Error(ErrorCode::ModeMismatch, "cannot convert float polynomial to exact");
  Poly out(p.var_count(), mode);
  for (const auto& [m, c] : p.terms()) out.add_term(m, Scalar::from_rational(c.rational(), mode));
  return out;
}

}  // namespace carleman

namespace carleman {

namespace {

// Exponent vectors of exactly `degree`, lexicographically descending.
void fill_degree(std::size_t var, unsigned remaining, std::vector<unsigned>& current,
                 std::vector<Monomial>& out) {
  if (var + 1 == current.size()) {
    current[var] = remaining;
    out.emplace_back(current);
    return;
  }
  for (unsigned e = remaining + 1; e-- > 0;) {
    current[var] = e;
    fill_degree(var + 1, remaining - e, current, out);
  }
  current[var] = 0;
}

}  // namespace

std::vector<Monomial> monomials_up_to(std::size_t nvars, unsigned max_degree) {
  std::vector<Monomial> out;
  if (nvars == 0) {
    out.emplace_back();
    return out;
  }
  std::vector<unsigned> current(nvars, 0);
  for (unsigned d = 0; d <= max_degree; ++d) fill_degree(0, d, current, out);
  return out;
}

}  // namespace carleman
