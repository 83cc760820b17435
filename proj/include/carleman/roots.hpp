#pragma once

#include <vector>

#include "carleman/poly.hpp"

namespace carleman {

struct FloatRootOptions {
  unsigned max_iterations = 500;
  double residual_tolerance = 1e-12;
  unsigned newton_polish_steps = 4;
  unsigned long seed = 0x5eed;
};

/// Roots of a univariate polynomial.
///
/// Exact mode returns the distinct rational roots, found by the rational root
/// test (divisors of the trailing and leading integer coefficients) and
/// verified by exact evaluation; an empty result is not an error. Float mode
/// returns all complex roots with multiplicity (Durand-Kerner, then Newton
/// polishing). Exact input polynomials are converted when `mode` is Float.
std::vector<Scalar> roots_univariate(const Poly& p, Mode mode, const FloatRootOptions& opts = {});

/// Rational roots of p with their multiplicities, ascending.
std::vector<std::pair<Scalar, unsigned>> rational_roots_with_multiplicity(const Poly& p);

/// Builds a univariate polynomial from coefficients, lowest degree first.
Poly univariate_from_coefficients(const std::vector<Scalar>& coeffs);

}  // namespace carleman
