#include "carleman/roots.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace carleman {

namespace {

using Complex = std::complex<double>;

std::vector<Scalar> coefficients_of(const Poly& p) {
  if (p.var_count() != 1) throw Error(ErrorCode::Arity, "root finding needs a univariate polynomial");
  if (p.is_zero()) throw Error(ErrorCode::ZeroPolynomial, "the zero polynomial has no finite root set");
  std::vector<Scalar> coeffs(p.degree() + 1, Scalar::zero(p.mode()));
  for (const auto& [m, c] : p.terms()) coeffs[m.exponents[0]] = c;
  return coeffs;
}

// Integer coefficients proportional to the rational ones.
std::vector<mpz_class> integer_coefficients(const std::vector<Scalar>& coeffs) {
  mpz_class lcm = 1;
  for (const auto& c : coeffs) mpz_lcm(lcm.get_mpz_t(), lcm.get_mpz_t(), c.rational().get_den_mpz_t());
  std::vector<mpz_class> out;
  out.reserve(coeffs.size());
  for (const auto& c : coeffs) {
    mpq_class scaled = c.rational() * lcm;
    out.push_back(scaled.get_num());
  }
  return out;
}

constexpr unsigned long kTrialDivisionLimit = 1000000;

// Positive divisors of |n| (n != 0), or nullopt when n could not be factored
// by bounded trial division.
std::optional<std::vector<mpz_class>> divisors(const mpz_class& n) {
  mpz_class rest = abs(n);
  std::vector<std::pair<mpz_class, unsigned>> factors;
  for (unsigned long d = 2; d <= kTrialDivisionLimit && rest > 1; ++d) {
    if (mpz_divisible_ui_p(rest.get_mpz_t(), d) == 0) continue;
    unsigned mult = 0;
    while (mpz_divisible_ui_p(rest.get_mpz_t(), d) != 0) {
      rest /= d;
      ++mult;
    }
    factors.emplace_back(mpz_class(d), mult);
    if (mpz_class(d) * d > rest) break;
  }
  if (rest > 1) {
    if (rest > mpz_class(kTrialDivisionLimit) * kTrialDivisionLimit &&
        mpz_probab_prime_p(rest.get_mpz_t(), 30) == 0) {
      return std::nullopt;
    }
    factors.emplace_back(rest, 1);
  }
  std::vector<mpz_class> out{1};
  for (const auto& [prime, mult] : factors) {
    const std::size_t base = out.size();
    mpz_class pw = 1;
    for (unsigned e = 1; e <= mult; ++e) {
      pw *= prime;
      for (std::size_t i = 0; i < base; ++i) out.push_back(out[i] * pw);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

mpq_class eval_exact(const std::vector<mpz_class>& coeffs, const mpq_class& x) {
  mpq_class acc = 0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + *it;
  return acc;
}

// Synthetic division of integer-proportional coefficients by (x - r).
std::vector<mpq_class> deflate(const std::vector<mpq_class>& coeffs, const mpq_class& r) {
  std::vector<mpq_class> out(coeffs.size() - 1);
  mpq_class carry = 0;
  for (std::size_t i = coeffs.size() - 1; i >= 1; --i) {
    carry = coeffs[i] + carry * r;
    out[i - 1] = carry;
  }
  return out;
}

Complex horner(const std::vector<Complex>& a, Complex z) {
  Complex acc = 0.0;
  for (auto it = a.rbegin(); it != a.rend(); ++it) acc = acc * z + *it;
  return acc;
}

double residual_scale(const std::vector<Complex>& a, Complex z) {
  double acc = 0.0, mag = std::abs(z);
  for (auto it = a.rbegin(); it != a.rend(); ++it) acc = acc * mag + std::abs(*it);
  return std::max(acc, 1e-300);
}

std::vector<Complex> durand_kerner(std::vector<Complex> a, const FloatRootOptions& opts) {
  const std::size_t n = a.size() - 1;
  const Complex lead = a.back();
  for (auto& c : a) c /= lead;
  if (n == 1) return {-a[0]};

  double radius = 0.0;
  for (std::size_t j = 1; j <= n; ++j) radius = std::max(radius, std::pow(std::abs(a[n - j]), 1.0 / static_cast<double>(j)));
  radius = std::max(2.0 * radius, 1e-3);

  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> jitter(-0.1, 0.1);
  std::vector<Complex> z(n);
  for (std::size_t j = 0; j < n; ++j) {
    double angle = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n) + 0.4 + jitter(rng);
    z[j] = std::polar(radius * (1.0 + jitter(rng)), angle);
  }

  for (unsigned iter = 0; iter < opts.max_iterations; ++iter) {
    double worst = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      Complex denom = 1.0;
      for (std::size_t k = 0; k < n; ++k) {
        if (k != j) denom *= (z[j] - z[k]);
      }
      if (std::abs(denom) == 0.0) denom = Complex(1e-300, 0.0);
      z[j] -= horner(a, z[j]) / denom;
    }
    for (std::size_t j = 0; j < n; ++j) worst = std::max(worst, std::abs(horner(a, z[j])) / residual_scale(a, z[j]));
    if (worst <= opts.residual_tolerance) break;
  }

  std::vector<Complex> deriv(n);
  for (std::size_t i = 1; i <= n; ++i) deriv[i - 1] = a[i] * static_cast<double>(i);
  for (auto& root : z) {
    for (unsigned s = 0; s < opts.newton_polish_steps; ++s) {
      Complex d = horner(deriv, root);
      if (std::abs(d) == 0.0) break;
      Complex next = root - horner(a, root) / d;
      if (std::abs(horner(a, next)) >= std::abs(horner(a, root))) break;
      root = next;
    }
  }
  return z;
}

}  // namespace

Poly univariate_from_coefficients(const std::vector<Scalar>& coeffs) {
  if (coeffs.empty()) throw Error(ErrorCode::Arity, "no coefficients");
  Poly p(1, coeffs.front().mode());
  for (std::size_t i = 0; i < coeffs.size(); ++i) p.add_term(Monomial({static_cast<unsigned>(i)}), coeffs[i]);
  return p;
}

std::vector<std::pair<Scalar, unsigned>> rational_roots_with_multiplicity(const Poly& p) {
  auto coeffs = coefficients_of(p);
  if (p.mode() != Mode::Exact) throw Error(ErrorCode::ModeMismatch, "rational roots need an exact polynomial");
  auto ints = integer_coefficients(coeffs);

  std::vector<std::pair<Scalar, unsigned>> found;
  unsigned zero_mult = 0;
  while (ints.size() > 1 && ints.front() == 0) {
    ints.erase(ints.begin());
    ++zero_mult;
  }
  if (zero_mult > 0) found.emplace_back(Scalar(mpq_class(0)), zero_mult);
  if (ints.size() <= 1) return found;

  std::vector<mpq_class> candidates;
  auto num_divs = divisors(ints.front());
  auto den_divs = divisors(ints.back());
  if (num_divs && den_divs) {
    for (const auto& q : *den_divs) {
      for (const auto& num : *num_divs) {
        mpq_class c(num, q);
        c.canonicalize();
        candidates.push_back(c);
        candidates.push_back(-c);
      }
    }
  } else {
    // Too large to factor: propose continued-fraction approximations of the
    // real float roots and keep the ones that verify exactly.
    std::vector<Complex> fc;
    for (const auto& c : ints) fc.emplace_back(c.get_d(), 0.0);
    for (auto z : durand_kerner(fc, FloatRootOptions{})) {
      if (std::abs(z.imag()) > 1e-6 * std::max(1.0, std::abs(z))) continue;
      double x = z.real();
      mpz_class h0 = 0, h1 = 1, k0 = 1, k1 = 0;
      for (int step = 0; step < 40; ++step) {
        double a = std::floor(x);
        mpz_class ai(a);
        mpz_class h2 = ai * h1 + h0, k2 = ai * k1 + k0;
        mpq_class conv(h2, k2);
        conv.canonicalize();
        candidates.push_back(conv);
        h0 = h1; h1 = h2; k0 = k1; k1 = k2;
        double frac = x - a;
        if (frac < 1e-12) break;
        x = 1.0 / frac;
        if (!std::isfinite(x) || std::abs(x) > 1e15) break;
      }
    }
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  std::vector<mpq_class> work(ints.begin(), ints.end());
  for (const auto& c : candidates) {
    if (eval_exact(ints, c) != 0) continue;
    unsigned mult = 0;
    while (work.size() > 1) {
      mpq_class v = 0;
      for (auto it = work.rbegin(); it != work.rend(); ++it) v = v * c + *it;
      if (v != 0) break;
      work = deflate(work, c);
      ++mult;
    }
    found.emplace_back(Scalar(c), mult);
  }
  std::sort(found.begin(), found.end(),
            [](const auto& a, const auto& b) { return a.first.rational() < b.first.rational(); });
  return found;
}

std::vector<Scalar> roots_univariate(const Poly& p, Mode mode, const FloatRootOptions& opts) {
  auto coeffs = coefficients_of(p);
  if (coeffs.size() < 2) return {};
  if (mode == Mode::Exact) {
    std::vector<Scalar> out;
    for (auto& [r, mult] : rational_roots_with_multiplicity(p)) out.push_back(r);
    return out;
  }
  std::vector<Complex> a;
  a.reserve(coeffs.size());
  for (const auto& c : coeffs) a.push_back(c.to_complex());
  std::vector<Scalar> out;
  for (auto z : durand_kerner(a, opts)) out.emplace_back(z);
  std::sort(out.begin(), out.end(), scalar_less);
  return out;
}

}  // namespace carleman
