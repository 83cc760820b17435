#include "carleman/recurrence.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "carleman/roots.hpp"

namespace carleman {

// ---------------------------------------------------------------------------
// PolySystem

void PolySystem::validate() const {
  if (k == 0) throw Error(ErrorCode::Arity, "a system needs at least one variable");
  if (depth == 0) throw Error(ErrorCode::Arity, "depth must be at least 1");
  if (equations.size() != k) throw Error(ErrorCode::Arity, "expected one equation per variable");
  if (!names.empty() && names.size() != k) throw Error(ErrorCode::Arity, "expected one name per variable");
  for (const auto& f : equations) {
    if (f.var_count() != var_count()) {
      throw Error(ErrorCode::Arity, "equation over " + std::to_string(f.var_count()) +
                                        " variables, expected " + std::to_string(var_count()));
    }
    if (f.mode() != mode) throw Error(ErrorCode::ModeMismatch, "equation mode differs from system mode");
  }
}

std::vector<Scalar> PolySystem::constant_terms() const {
  std::vector<Scalar> out;
  out.reserve(k);
  for (const auto& f : equations) out.push_back(f.constant_term());
  return out;
}

Matrix PolySystem::linear_part() const {
  if (!is_depth_one()) throw Error(ErrorCode::Arity, "linear part requested for a depth > 1 system");
  Matrix c(k, k, mode);
  for (std::size_t p = 0; p < k; ++p) {
    for (std::size_t l = 0; l < k; ++l) c(p, l) = equations[p].coeff(Monomial::unit(k, l));
  }
  return c;
}

unsigned PolySystem::max_degree() const {
  unsigned d = 0;
  for (const auto& f : equations) d = std::max(d, f.degree());
  return d;
}

std::vector<std::string> default_names(std::size_t k) {
  if (k == 1) return {"u"};
  std::vector<std::string> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back("u" + std::to_string(i + 1));
  return out;
}

PolySystem make_system(std::vector<Poly> equations, std::size_t depth, std::vector<std::string> names) {
  PolySystem s;
  s.k = equations.size();
  s.depth = depth;
  s.mode = equations.empty() ? Mode::Exact : equations.front().mode();
  s.equations = std::move(equations);
  s.names = names.empty() ? default_names(s.k) : std::move(names);
  s.validate();
  return s;
}

bool has_zero_constant_terms(const PolySystem& s, double tol) {
  for (const auto& c : s.constant_terms()) {
    if (s.mode == Mode::Exact ? !c.is_zero() : c.abs() > tol) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Coefficient arrays

namespace {

std::vector<std::size_t> index_tuple(const Monomial& m) {
  std::vector<std::size_t> out;
  for (std::size_t v = 0; v < m.size(); ++v) out.insert(out.end(), m.exponents[v], v);
  return out;
}

Monomial tuple_monomial(std::size_t k, const std::vector<std::size_t>& tuple) {
  Monomial m = Monomial::constant(k);
  for (auto v : tuple) m.exponents.at(v) += 1;
  return m;
}

mpz_class factorial(unsigned n) {
  mpz_class f;
  mpz_fac_ui(f.get_mpz_t(), n);
  return f;
}

}  // namespace

CoeffArrays coeff_arrays(const PolySystem& s) {
  if (!s.is_depth_one()) throw Error(ErrorCode::Arity, "coefficient arrays need a depth-one system");
  CoeffArrays out;
  out.constant = s.constant_terms();
  out.linear = s.linear_part();
  for (std::size_t p = 0; p < s.k; ++p) {
    for (const auto& [m, c] : s.equations[p].terms()) {
      unsigned d = m.degree();
      if (d < 2) continue;
      auto& slot = out.higher[d][index_tuple(m)];
      if (slot.empty()) slot.assign(s.k, Scalar::zero(s.mode));
      slot[p] = c;
    }
  }
  return out;
}

PolySystem from_coeff_arrays(const CoeffArrays& arrays, Mode mode, std::vector<std::string> names) {
  const std::size_t k = arrays.constant.size();
  std::vector<Poly> eqs(k, Poly(k, mode));
  for (std::size_t p = 0; p < k; ++p) {
    eqs[p].add_term(Monomial::constant(k), arrays.constant[p]);
    for (std::size_t l = 0; l < k; ++l) eqs[p].add_term(Monomial::unit(k, l), arrays.linear(p, l));
  }
  for (const auto& [degree, entries] : arrays.higher) {
    for (const auto& [tuple, column] : entries) {
      if (!std::is_sorted(tuple.begin(), tuple.end())) {
        throw Error(ErrorCode::InvalidArgument, "coefficient index tuples must be non-decreasing");
      }
      for (std::size_t p = 0; p < k; ++p) eqs[p].add_term(tuple_monomial(k, tuple), column[p]);
    }
  }
  return make_system(std::move(eqs), 1, std::move(names));
}

Scalar coeff_entry(const CoeffArrays& arrays, std::size_t equation, const std::vector<std::size_t>& indices) {
  const Mode mode = arrays.linear.mode();
  if (indices.empty()) return arrays.constant.at(equation);
  if (indices.size() == 1) return arrays.linear(equation, indices[0]);
  if (!std::is_sorted(indices.begin(), indices.end())) return Scalar::zero(mode);
  auto deg = arrays.higher.find(static_cast<unsigned>(indices.size()));
  if (deg == arrays.higher.end()) return Scalar::zero(mode);
  auto it = deg->second.find(indices);
  return it == deg->second.end() ? Scalar::zero(mode) : it->second.at(equation);
}

Scalar symmetrized_entry(const CoeffArrays& arrays, std::size_t equation, const std::vector<std::size_t>& indices) {
  auto sorted = indices;
  std::sort(sorted.begin(), sorted.end());
  Scalar c = coeff_entry(arrays, equation, sorted);
  if (c.is_zero() || indices.size() < 2) return c;
  // Exactly one of the j!/prod(mult!) distinct orderings carries the
  // coefficient; averaging over all j! permutations gives c * prod(mult!)/j!.
  mpz_class numer = 1;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    numer *= factorial(static_cast<unsigned>(j - i));
    i = j;
  }
  mpq_class ratio(numer, factorial(static_cast<unsigned>(sorted.size())));
  ratio.canonicalize();
  return c * Scalar::from_rational(ratio, c.mode());
}

// ---------------------------------------------------------------------------
// TransformParams

TransformParams::TransformParams(Matrix a, std::vector<Scalar> b, double float_det_tol)
    : a_(std::move(a)), b_(std::move(b)) {
  if (!a_.is_square() || a_.rows() != b_.size()) {
    throw Error(ErrorCode::Arity, "transform matrix and shift vector dimensions differ");
  }
  for (const auto& v : b_) {
    if (v.mode() != a_.mode()) throw Error(ErrorCode::ModeMismatch, "transform entries of mixed mode");
  }
  Scalar det = determinant(a_);
  if (a_.mode() == Mode::Exact ? det.is_zero()
                               : det.abs() <= float_det_tol * std::pow(std::max(1.0, a_.max_abs()),
                                                                       static_cast<double>(a_.rows()))) {
    throw Error(ErrorCode::SingularTransform, "transform matrix A is singular");
  }
  a_inv_ = carleman::inverse(a_);
}

TransformParams TransformParams::identity(std::size_t k, Mode mode) {
  return TransformParams(Matrix::identity(k, mode), std::vector<Scalar>(k, Scalar::zero(mode)));
}

TransformParams TransformParams::shift(std::vector<Scalar> b) {
  if (b.empty()) throw Error(ErrorCode::Arity, "empty shift vector");
  Mode mode = b.front().mode();
  std::size_t k = b.size();
  return TransformParams(Matrix::identity(k, mode), std::move(b));
}

TransformParams TransformParams::linear(Matrix a) {
  std::vector<Scalar> zero(a.rows(), Scalar::zero(a.mode()));
  return TransformParams(std::move(a), std::move(zero));
}

bool TransformParams::is_identity() const {
  return a_ == Matrix::identity(a_.rows(), a_.mode()) && has_zero_shift();
}

bool TransformParams::has_zero_shift(double tol) const {
  return std::all_of(b_.begin(), b_.end(), [&](const Scalar& v) {
    return v.is_exact() || tol == 0.0 ? v.is_zero() : v.abs() <= tol;
  });
}

TransformParams TransformParams::then(const TransformParams& next) const {
  // z'' = A2 (A1 (z - B1) - B2) = A2 A1 (z - (B1 + A1^{-1} B2))
  auto shifted = a_inv_ * next.b_;
  std::vector<Scalar> b(b_.size(), Scalar::zero(mode()));
  for (std::size_t i = 0; i < b.size(); ++i) b[i] = b_[i] + shifted[i];
  return TransformParams(next.a_ * a_, std::move(b));
}

TransformParams TransformParams::inverse() const {
  // z = A^{-1} z' + B = A^{-1} (z' - (-A B))
  auto ab = a_ * b_;
  for (auto& v : ab) v = -v;
  return TransformParams(a_inv_, std::move(ab));
}

std::vector<Scalar> TransformParams::to_transformed(const std::vector<Scalar>& z) const {
  if (z.size() != b_.size()) throw Error(ErrorCode::Arity, "point dimension differs from transform");
  std::vector<Scalar> d(z.size(), Scalar::zero(mode()));
  for (std::size_t i = 0; i < z.size(); ++i) d[i] = z[i] - b_[i];
  return a_ * d;
}

std::vector<Scalar> TransformParams::to_original(const std::vector<Scalar>& z_prime) const {
  auto z = a_inv_ * z_prime;
  for (std::size_t i = 0; i < z.size(); ++i) z[i] += b_[i];
  return z;
}

// ---------------------------------------------------------------------------
// Depth reduction

PolySystem reduce_depth(const PolySystem& s) {
  s.validate();
  if (s.depth == 1) return s;
  const std::size_t k = s.k;
  const std::size_t total = s.var_count();
  std::vector<Poly> eqs = s.equations;  // already over the flattened variables
  std::vector<std::string> names = s.names.empty() ? default_names(k) : s.names;
  for (std::size_t j = 1; j < s.depth; ++j) {
    for (std::size_t l = 0; l < k; ++l) {
      // new variable j*k + l at step i equals old variable l at step i - j,
      // i.e. variable (j-1)*k + l at step i - 1
      eqs.push_back(Poly::variable(total, (j - 1) * k + l, s.mode));
      names.push_back(names[l] + "_lag" + std::to_string(j));
    }
  }
  return make_system(std::move(eqs), 1, std::move(names));
}

// ---------------------------------------------------------------------------
// Fixed points

namespace {

double vector_norm(const std::vector<Scalar>& v) {
  double acc = 0.0;
  for (const auto& x : v) acc += std::norm(x.to_complex());
  return std::sqrt(acc);
}

double distance(const std::vector<Scalar>& a, const std::vector<Scalar>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::norm(a[i].to_complex() - b[i].to_complex());
  return std::sqrt(acc);
}

std::vector<Scalar> residual(const PolySystem& s, const std::vector<Scalar>& b) {
  std::vector<Scalar> g;
  g.reserve(s.k);
  for (std::size_t p = 0; p < s.k; ++p) g.push_back(poly_eval(s.equations[p], b) - b[p]);
  return g;
}

bool is_fixed_point(const PolySystem& s, const std::vector<Scalar>& b, double tol) {
  if (b.size() != s.k) return false;
  auto g = residual(s, b);
  if (s.mode == Mode::Exact) {
    return std::all_of(g.begin(), g.end(), [](const Scalar& v) { return v.is_zero(); });
  }
  return vector_norm(g) <= tol * std::max(1.0, vector_norm(b));
}

int leading_sign(const std::vector<Scalar>& v) {
  for (const auto& x : v) {
    if (x.is_exact()) {
      if (int sg = sgn(x.rational()); sg != 0) return sg;
    } else {
      auto c = x.to_complex();
      if (c.real() != 0.0) return c.real() > 0 ? 1 : -1;
      if (c.imag() != 0.0) return c.imag() > 0 ? 1 : -1;
    }
  }
  return 0;
}

// Damped Newton on G(B) = F(B) - B, complex arithmetic.
std::optional<std::vector<Scalar>> newton_fixed_point(const PolySystem& s, std::vector<Scalar> x,
                                                      const FixedPointOptions& opts) {
  const std::size_t k = s.k;
  std::vector<std::vector<Poly>> jacobian(k);
  for (std::size_t p = 0; p < k; ++p) {
    for (std::size_t v = 0; v < k; ++v) jacobian[p].push_back(poly_derivative(s.equations[p], v));
  }
  auto g = residual(s, x);
  for (unsigned step = 0; step < opts.max_newton_steps; ++step) {
    double gnorm = vector_norm(g);
    if (gnorm <= opts.tolerance) return x;
    Matrix j(k, k, Mode::Float);
    for (std::size_t p = 0; p < k; ++p) {
      for (std::size_t v = 0; v < k; ++v) {
        j(p, v) = poly_eval(jacobian[p][v], x);
        if (p == v) j(p, v) -= Scalar::one(Mode::Float);
      }
    }
    std::vector<Scalar> delta;
    try {
      delta = inverse(j) * g;
    } catch (const Error&) {
      return std::nullopt;
    }
    double damping = 1.0;
    bool improved = false;
    for (int half = 0; half < 30; ++half) {
      std::vector<Scalar> trial = x;
      for (std::size_t i = 0; i < k; ++i) trial[i] -= delta[i] * Scalar(Scalar::Complex(damping, 0.0));
      auto gt = residual(s, trial);
      if (vector_norm(gt) < gnorm) {
        x = std::move(trial);
        g = std::move(gt);
        improved = true;
        break;
      }
      damping *= 0.5;
    }
    if (!improved) break;
  }
  if (vector_norm(g) <= opts.tolerance) return x;
  return std::nullopt;
}

}  // namespace

bool shift_policy_less(const std::vector<Scalar>& a, const std::vector<Scalar>& b) {
  double na = vector_norm(a), nb = vector_norm(b);
  if (na != nb) return na < nb;
  int sa = leading_sign(a), sb = leading_sign(b);
  if (sa != sb) return sa > sb;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
    if (a[i] == b[i]) continue;
    if (a[i].is_exact() && b[i].is_exact()) return a[i].rational() < b[i].rational();
    auto ca = a[i].to_complex(), cb = b[i].to_complex();
    if (ca.real() != cb.real()) return ca.real() < cb.real();
    return ca.imag() < cb.imag();
  }
  return false;
}

std::vector<std::vector<Scalar>> fixed_points(const PolySystem& s, const FixedPointOptions& opts) {
  s.validate();
  if (!s.is_depth_one()) throw Error(ErrorCode::Arity, "fixed points need a depth-one system", "shift");
  std::vector<std::vector<Scalar>> found;
  auto add_unique = [&](std::vector<Scalar> b) {
    for (const auto& f : found) {
      if (s.mode == Mode::Exact ? f == b : distance(f, b) <= opts.dedupe_distance) return;
    }
    found.push_back(std::move(b));
  };

  if (s.k == 1) {
    Poly g = poly_sub(s.equations[0], Poly::variable(1, 0, s.mode));
    if (g.is_zero()) {
      // F is the identity; every point is fixed, report the origin
      add_unique({Scalar::zero(s.mode)});
    } else if (g.degree() == 0) {
      // no fixed point at all
    } else {
      for (auto& r : roots_univariate(g, s.mode)) add_unique({r});
    }
  } else if (s.mode == Mode::Exact) {
    if (has_zero_constant_terms(s)) add_unique(std::vector<Scalar>(s.k, Scalar::zero(s.mode)));
  } else {
    std::vector<std::vector<Scalar>> seeds = opts.seeds;
    if (seeds.empty()) {
      seeds.emplace_back(s.k, Scalar::zero(Mode::Float));
      std::mt19937_64 rng(opts.rng_seed);
      std::uniform_real_distribution<double> dist(-1.0, 1.0);
      for (unsigned i = 0; i < opts.random_seeds; ++i) {
        std::vector<Scalar> seed;
        for (std::size_t v = 0; v < s.k; ++v) seed.emplace_back(Scalar::Complex(dist(rng), 0.0));
        seeds.push_back(std::move(seed));
      }
    }
    for (const auto& seed : seeds) {
      if (auto root = newton_fixed_point(s, seed, opts)) add_unique(std::move(*root));
    }
  }
  for (const auto& c : opts.candidates) {
    if (is_fixed_point(s, c, opts.tolerance)) add_unique(c);
  }
  std::sort(found.begin(), found.end(), shift_policy_less);
  return found;
}

// ---------------------------------------------------------------------------
// Affine transforms

PolySystem apply_affine(const PolySystem& s, const TransformParams& t) {
  s.validate();
  if (!s.is_depth_one()) throw Error(ErrorCode::Arity, "affine transforms need a depth-one system");
  if (t.dimension() != s.k) throw Error(ErrorCode::Arity, "transform dimension differs from variable count");
  if (t.mode() != s.mode) throw Error(ErrorCode::ModeMismatch, "transform mode differs from system mode");
  const std::size_t k = s.k;
  // G_j(z') = F_j(A^{-1} z' + B) - B_j, then F'_p = sum_j A[p][j] G_j
  std::vector<Poly> g;
  g.reserve(k);
  for (std::size_t j = 0; j < k; ++j) {
    Poly sub = poly_substitute_affine(s.equations[j], t.a_inv(), t.b());
    sub.add_term(Monomial::constant(k), -t.b()[j]);
    g.push_back(std::move(sub));
  }
  std::vector<Poly> eqs;
  eqs.reserve(k);
  for (std::size_t p = 0; p < k; ++p) {
    Poly acc(k, s.mode);
    for (std::size_t j = 0; j < k; ++j) {
      const Scalar& coef = t.a()(p, j);
      if (coef.is_zero()) continue;
      for (const auto& [m, c] : g[j].terms()) acc.add_term(m, coef * c);
    }
    eqs.push_back(std::move(acc));
  }
  return make_system(std::move(eqs), 1, s.names);
}

PolySystem clean_float_system(const PolySystem& s, double tol) {
  if (s.mode == Mode::Exact) return s;
  PolySystem out = s;
  const std::size_t k = s.k;
  for (std::size_t p = 0; p < k; ++p) {
    Poly cleaned(s.var_count(), s.mode);
    for (const auto& [m, c] : s.equations[p].terms()) {
      bool must_vanish = m.is_constant();
      if (m.degree() == 1 && s.is_depth_one()) {
        auto var = static_cast<std::size_t>(
            std::find(m.exponents.begin(), m.exponents.end(), 1U) - m.exponents.begin());
        must_vanish = var < p;
      }
      if (must_vanish && c.abs() <= tol) continue;
      cleaned.add_term(m, c);
    }
    out.equations[p] = std::move(cleaned);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Admissibility

std::vector<Scalar> linear_eigenvalues(const PolySystem& s, bool& complete) {
  Matrix c = s.linear_part();
  complete = true;
  std::vector<Scalar> eig;
  if (c.is_upper_triangular()) {
    eig = c.diagonal();
  } else if (s.mode == Mode::Exact) {
    auto charpoly = univariate_from_coefficients(characteristic_polynomial(c));
    for (auto& [root, mult] : rational_roots_with_multiplicity(charpoly)) eig.insert(eig.end(), mult, root);
    complete = eig.size() == s.k;
  } else {
    eig = roots_univariate(univariate_from_coefficients(characteristic_polynomial(c)), Mode::Float);
  }
  std::sort(eig.begin(), eig.end(), scalar_less);
  return eig;
}

namespace {

// Best rational approximation p/q with q <= max_den within tol, if any.
bool looks_rational(double x, double tol, long max_den = 1000) {
  if (!std::isfinite(x)) return false;
  double h0 = 0, h1 = 1, k0 = 1, k1 = 0, y = x;
  for (int step = 0; step < 64; ++step) {
    double a = std::floor(y);
    double h2 = a * h1 + h0, k2 = a * k1 + k0;
    if (k2 > static_cast<double>(max_den)) return false;
    if (std::abs(x - h2 / k2) <= tol * std::max(1.0, std::abs(x))) return true;
    h0 = h1; h1 = h2; k0 = k1; k1 = k2;
    double frac = y - a;
    if (frac == 0.0) return true;
    y = 1.0 / frac;
  }
  return false;
}

}  // namespace

AdmissibilityReport check_shift_admissible(const PolySystem& s, unsigned max_power,
                                           const AdmissibilityOptions& opts) {
  s.validate();
  if (!s.is_depth_one()) throw Error(ErrorCode::Arity, "admissibility needs a depth-one system", "admissibility");
  if (!has_zero_constant_terms(s, opts.zero_tolerance)) {
    throw Error(ErrorCode::NotShifted, "system not shifted: constant terms are non-zero", "admissibility");
  }
  AdmissibilityReport report;
  report.eigenvalues = linear_eigenvalues(s, report.eigenvalues_complete);
  if (!report.eigenvalues_complete) {
    report.passed = false;
    report.reason = "linear part has eigenvalues that are not rational; exact mode cannot check them";
    return report;
  }

  // products prod lambda_p^{a_p} over all exponent vectors of degree <= max_power
  const Mode mode = s.mode;
  std::vector<std::pair<Scalar, Monomial>> products;
  // degree 0 is left out: with zero constant terms the constant monomial
  // spans its own invariant block, so its eigenvalue 1 may repeat harmlessly
  for (const auto& m : monomials_up_to(s.k, max_power)) {
    if (m.is_constant()) continue;
    Scalar v = Scalar::one(mode);
    for (std::size_t p = 0; p < s.k; ++p) v *= report.eigenvalues[p].pow(m.exponents[p]);
    products.emplace_back(std::move(v), m);
  }
  report.passed = true;
  if (mode == Mode::Exact) {
    std::map<mpq_class, const Monomial*> seen;
    for (const auto& [v, m] : products) {
      auto [it, inserted] = seen.try_emplace(v.rational(), &m);
      if (!inserted) {
        report.passed = false;
        report.collision = std::make_pair(*it->second, m);
        report.collision_value = v;
        break;
      }
    }
  } else {
    for (std::size_t i = 0; i < products.size() && report.passed; ++i) {
      for (std::size_t j = i + 1; j < products.size(); ++j) {
        if (approx_equal(products[i].first, products[j].first, opts.distinct_tolerance)) {
          report.passed = false;
          report.collision = std::make_pair(products[i].second, products[j].second);
          report.collision_value = products[i].first;
          break;
        }
      }
    }
  }
  if (!report.passed) {
    report.reason = "eigenvalue " + report.collision_value->str() +
                    " repeated among products of linear eigenvalues up to degree " + std::to_string(max_power);
  }

  if (s.k == 1) {
    const Scalar& lambda = report.eigenvalues[0];
    bool unity = false;
    for (unsigned q = 1; q <= opts.root_of_unity_bound && !unity; ++q) {
      Scalar pw = lambda.pow(q);
      unity = mode == Mode::Exact ? pw.is_one() : std::abs(pw.to_complex() - 1.0) <= 1e-12;
    }
    report.root_of_unity = unity;
  }
  if (s.k == 2) {
    auto l0 = report.eigenvalues[0].to_complex();
    auto l1 = report.eigenvalues[1].to_complex();
    double r0 = std::abs(l0), r1 = std::abs(l1);
    if (r0 == 0.0 || r1 == 0.0 || r0 == 1.0) {
      report.heuristic_note = "heuristic: log ratio undefined for these moduli";
    } else {
      double ratio = std::log(r1) / std::log(r0);
      if (!looks_rational(ratio, 1e-10)) {
        report.two_variable_condition = true;
      } else {
        double denom = std::arg(l1) - std::arg(l0) * ratio;
        report.two_variable_condition =
            std::abs(denom) > 1e-12 && !looks_rational(std::numbers::pi / denom, 1e-10);
      }
      report.heuristic_note = "heuristic: rationality judged by continued fractions (denominators <= 1000)";
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Triangularization

namespace {

// Exact: eigenvector basis for distinct rational eigenvalues.
std::optional<Matrix> exact_eigenvector_basis(const Matrix& c, const std::vector<Scalar>& eig) {
  const std::size_t k = c.rows();
  for (std::size_t i = 1; i < eig.size(); ++i) {
    if (eig[i] == eig[i - 1]) return std::nullopt;
  }
  Matrix v(k, k, Mode::Exact);
  for (std::size_t col = 0; col < k; ++col) {
    Matrix shifted = c;
    for (std::size_t i = 0; i < k; ++i) shifted(i, i) -= eig[col];
    auto vec = null_vector(shifted);
    if (vec.empty()) return std::nullopt;
    for (std::size_t r = 0; r < k; ++r) v(r, col) = vec[r];
  }
  return v;
}

// Exact deflation for rational (possibly repeated) eigenvalues. Returns Q with
// Q^{-1} C Q upper triangular.
Matrix exact_deflation(const Matrix& c, const std::vector<Scalar>& eig) {
  const std::size_t k = c.rows();
  Matrix q_total = Matrix::identity(k, Mode::Exact);
  Matrix m = c;
  for (std::size_t t = 0; t + 1 < k; ++t) {
    const std::size_t size = k - t;
    Matrix block(size, size, Mode::Exact);
    for (std::size_t r = 0; r < size; ++r)
      for (std::size_t cc = 0; cc < size; ++cc) block(r, cc) = m(t + r, t + cc);
    bool done = false;
    for (const auto& lambda : eig) {
      Matrix shifted = block;
      for (std::size_t i = 0; i < size; ++i) shifted(i, i) -= lambda;
      auto v = null_vector(shifted);
      if (v.empty()) continue;
      std::size_t pivot = 0;
      while (v[pivot].is_zero()) ++pivot;
      // columns: v, then unit vectors skipping the pivot position
      Matrix q = Matrix::identity(k, Mode::Exact);
      std::size_t col = t + 1;
      for (std::size_t r = 0; r < size; ++r) q(t + r, t) = v[r];
      for (std::size_t e = 0; e < size; ++e) {
        if (e == pivot) continue;
        for (std::size_t r = 0; r < size; ++r) q(t + r, col) = Scalar::from_int(r == e ? 1 : 0, Mode::Exact);
        ++col;
      }
      m = inverse(q) * m * q;
      q_total = q_total * q;
      done = true;
      break;
    }
    if (!done) throw Error(ErrorCode::TriangularizationUnavailable, "no rational eigenvector found", "triangularize");
  }
  return q_total;
}

using Complex = std::complex<double>;

// Float: unitary Q with Q^H C Q upper triangular, via Householder deflation.
Matrix float_schur(const Matrix& c) {
  const std::size_t k = c.rows();
  Matrix q_total = Matrix::identity(k, Mode::Float);
  Matrix m = c;
  const double scale = std::max(1.0, c.max_abs());
  for (std::size_t t = 0; t + 1 < k; ++t) {
    const std::size_t size = k - t;
    Matrix block(size, size, Mode::Float);
    for (std::size_t r = 0; r < size; ++r)
      for (std::size_t cc = 0; cc < size; ++cc) block(r, cc) = m(t + r, t + cc);
    auto eig = roots_univariate(univariate_from_coefficients(characteristic_polynomial(block)), Mode::Float);
    std::sort(eig.begin(), eig.end(), scalar_less);
    Complex lambda = eig.front().to_complex();
    if (std::abs(lambda.imag()) <= 1e-12 * std::max(1.0, std::abs(lambda))) lambda = Complex(lambda.real(), 0.0);

    // inverse iteration for the eigenvector
    Matrix shifted = block;
    // a real perturbation keeps real eigenvectors real
    const Complex perturbed =
        lambda + (lambda.imag() == 0.0 ? Complex(1e-10 * scale, 0.0) : Complex(1e-10 * scale, 1e-10 * scale));
    for (std::size_t i = 0; i < size; ++i) shifted(i, i) -= Scalar(perturbed);
    std::vector<Scalar> v;
    for (std::size_t i = 0; i < size; ++i) v.emplace_back(Complex(1.0 + 0.1 * static_cast<double>(i), 0.0));
    Matrix solver;
    bool singular = false;
    try {
      solver = inverse(shifted);
    } catch (const Error&) {
      singular = true;
    }
    if (singular) {
      Matrix exact_shift = block;
      for (std::size_t i = 0; i < size; ++i) exact_shift(i, i) -= Scalar(lambda);
      v = null_vector(exact_shift, 1e-8);
      if (v.empty()) throw Error(ErrorCode::TriangularizationUnavailable, "eigenvector iteration failed", "triangularize");
    } else {
      for (int it = 0; it < 4; ++it) {
        v = solver * v;
        double norm = 0.0;
        for (const auto& x : v) norm += std::norm(x.to_complex());
        Scalar inv(Complex(1.0 / std::sqrt(norm), 0.0));
        for (auto& x : v) x *= inv;
      }
    }

    // Householder H = I - 2 w w^H / (w^H w) with H v = alpha e1
    std::vector<Complex> vc(size);
    double norm = 0.0;
    for (std::size_t i = 0; i < size; ++i) {
      vc[i] = v[i].to_complex();
      norm += std::norm(vc[i]);
    }
    norm = std::sqrt(norm);
    Complex phase = std::abs(vc[0]) > 0.0 ? vc[0] / std::abs(vc[0]) : Complex(1.0, 0.0);
    Complex alpha = -phase * norm;
    std::vector<Complex> w = vc;
    w[0] -= alpha;
    double wnorm = 0.0;
    for (const auto& x : w) wnorm += std::norm(x);
    Matrix h = Matrix::identity(k, Mode::Float);
    if (wnorm > 0.0) {
      for (std::size_t r = 0; r < size; ++r) {
        for (std::size_t cc = 0; cc < size; ++cc) {
          h(t + r, t + cc) -= Scalar(2.0 * w[r] * std::conj(w[cc]) / wnorm);
        }
      }
    }
    m = h * m * h;
    q_total = q_total * h;
  }
  return q_total;
}

}  // namespace

std::pair<PolySystem, TransformParams> triangularize_linear(const PolySystem& s) {
  s.validate();
  if (!s.is_depth_one()) throw Error(ErrorCode::Arity, "triangularization needs a depth-one system", "triangularize");
  if (!has_zero_constant_terms(s)) {
    throw Error(ErrorCode::NotShifted, "system not shifted: constant terms are non-zero", "triangularize");
  }
  Matrix c = s.linear_part();
  if (c.is_upper_triangular()) return {s, TransformParams::identity(s.k, s.mode)};

  Matrix basis;  // columns span the new coordinates; A = basis^{-1}
  if (s.mode == Mode::Exact) {
    bool complete = false;
    auto eig = linear_eigenvalues(s, complete);
    if (!complete) {
      throw Error(ErrorCode::TriangularizationUnavailable,
                  "exact triangularization unavailable (irrational eigenvalues); supply A or use float mode",
                  "triangularize");
    }
    if (auto v = exact_eigenvector_basis(c, eig)) {
      basis = std::move(*v);
    } else {
      basis = exact_deflation(c, eig);
    }
    TransformParams t(inverse(basis), std::vector<Scalar>(s.k, Scalar::zero(s.mode)));
    return {apply_affine(s, t), t};
  }

  Matrix q = float_schur(c);
  TransformParams t(q.adjoint(), std::vector<Scalar>(s.k, Scalar::zero(s.mode)));
  PolySystem out = apply_affine(s, t);
  Matrix transformed = out.linear_part();
  if (transformed.max_below_diagonal() > 1e-10 * std::max(1.0, c.max_abs())) {
    throw Error(ErrorCode::TriangularizationUnavailable, "float triangularization did not converge", "triangularize");
  }
  return {clean_float_system(out, 1e-10 * std::max(1.0, c.max_abs())), t};
}

}  // namespace carleman
