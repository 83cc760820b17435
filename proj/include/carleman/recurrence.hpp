#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "carleman/matrix.hpp"
#include "carleman/poly.hpp"

namespace carleman {

/// k recurrence functions of depth n. Equation p gives u^p_i as a polynomial
/// in the n*k lagged values ordered (u^1_{i-1}, ..., u^k_{i-1}, u^1_{i-2}, ...,
/// u^k_{i-n}).
struct PolySystem {
  std::size_t k = 0;
  std::size_t depth = 1;
  Mode mode = Mode::Exact;
  std::vector<Poly> equations;
  std::vector<std::string> names;

  std::size_t var_count() const noexcept { return k * depth; }
  bool is_depth_one() const noexcept { return depth == 1; }

  /// Throws Arity when the shape invariants do not hold.
  void validate() const;

  std::vector<Scalar> constant_terms() const;
  /// C[p][l] = coefficient of z_l in F_p. Depth-one systems only.
  Matrix linear_part() const;
  unsigned max_degree() const;

  /// Structural equality on the polynomials; names are ignored.
  bool same_equations(const PolySystem& o) const {
    return k == o.k && depth == o.depth && mode == o.mode && equations == o.equations;
  }
};

PolySystem make_system(std::vector<Poly> equations, std::size_t depth,
                       std::vector<std::string> names = {});

std::vector<std::string> default_names(std::size_t k);

/// True when every constant term is zero (exactly, or within `tol` in float mode).
bool has_zero_constant_terms(const PolySystem& s, double tol = 1e-9);

/// Coefficient arrays of a depth-one system. Index tuples of degree >= 2 are
/// stored non-decreasing only.
struct CoeffArrays {
  std::vector<Scalar> constant;
  Matrix linear;
  std::map<unsigned, std::map<std::vector<std::size_t>, std::vector<Scalar>>> higher;
};

CoeffArrays coeff_arrays(const PolySystem& s);
PolySystem from_coeff_arrays(const CoeffArrays& arrays, Mode mode, std::vector<std::string> names = {});

/// Entry of a degree-j array for an arbitrary index tuple: zero unless the
/// tuple is non-decreasing.
Scalar coeff_entry(const CoeffArrays& arrays, std::size_t equation, const std::vector<std::size_t>& indices);

/// The array averaged over all permutations of its lower indices.
Scalar symmetrized_entry(const CoeffArrays& arrays, std::size_t equation, const std::vector<std::size_t>& indices);

/// Change of variables z' = A (z - B); equivalently z = A^{-1} z' + B.
class TransformParams {
 public:
  TransformParams() = default;
  TransformParams(Matrix a, std::vector<Scalar> b, double float_det_tol = 1e-12);

  static TransformParams identity(std::size_t k, Mode mode);
  static TransformParams shift(std::vector<Scalar> b);
  static TransformParams linear(Matrix a);

  const Matrix& a() const noexcept { return a_; }
  const Matrix& a_inv() const noexcept { return a_inv_; }
  const std::vector<Scalar>& b() const noexcept { return b_; }
  std::size_t dimension() const noexcept { return b_.size(); }
  Mode mode() const noexcept { return a_.mode(); }

  bool is_identity() const;
  bool has_zero_shift(double tol = 0.0) const;

  /// Apply `this` first, then `next`.
  TransformParams then(const TransformParams& next) const;
  TransformParams inverse() const;

  std::vector<Scalar> to_transformed(const std::vector<Scalar>& z) const;
  std::vector<Scalar> to_original(const std::vector<Scalar>& z_prime) const;

 private:
  Matrix a_;
  Matrix a_inv_;
  std::vector<Scalar> b_;
};

/// Flattens a depth-n system into a depth-one system over n*k variables.
/// Variable j*k + l of the result holds u^l_{i-j}.
PolySystem reduce_depth(const PolySystem& s);

struct FixedPointOptions {
  /// Extra candidates; kept when they verify as fixed points.
  std::vector<std::vector<Scalar>> candidates;
  /// Newton seeds for k > 1 in float mode. Empty: origin plus `random_seeds`
  /// points drawn from [-1, 1]^k.
  std::vector<std::vector<Scalar>> seeds;
  unsigned random_seeds = 8;
  std::uint64_t rng_seed = 0;
  unsigned max_newton_steps = 200;
  double tolerance = 1e-10;
  double dedupe_distance = 1e-8;
};

/// Solutions B of F(B) = B, ordered by the shift selection policy: smallest
/// norm first, then positive leading component, then lexicographic.
std::vector<std::vector<Scalar>> fixed_points(const PolySystem& s, const FixedPointOptions& opts = {});

bool shift_policy_less(const std::vector<Scalar>& a, const std::vector<Scalar>& b);

/// The recurrence satisfied by z' = A (z - B).
PolySystem apply_affine(const PolySystem& s, const TransformParams& t);

/// Zeroes float coefficients of magnitude <= tol that must vanish for a
/// triangular transition matrix: constant terms and the strictly lower part
/// of the linear coefficients. Exact systems are returned unchanged.
PolySystem clean_float_system(const PolySystem& s, double tol);

struct AdmissibilityOptions {
  unsigned root_of_unity_bound = 24;
  double distinct_tolerance = 1e-9;
  double zero_tolerance = 1e-9;
};

struct AdmissibilityReport {
  /// Eigenvalues of the linear part (with multiplicity, sorted).
  std::vector<Scalar> eigenvalues;
  bool eigenvalues_complete = true;
  bool passed = false;
  std::string reason;
  /// Two exponent vectors whose eigenvalue products coincide, when failing.
  std::optional<std::pair<Monomial, Monomial>> collision;
  std::optional<Scalar> collision_value;
  /// k = 1 only: the single eigenvalue is a root of unity of order <= bound.
  std::optional<bool> root_of_unity;
  /// k = 2 only: heuristic evaluation of the number-theoretic sufficient
  /// condition; never used as a gate.
  std::optional<bool> two_variable_condition;
  std::string heuristic_note;
};

/// Eigenvalues of the linear part; `complete` is false when exact mode cannot
/// represent all of them.
std::vector<Scalar> linear_eigenvalues(const PolySystem& s, bool& complete);

AdmissibilityReport check_shift_admissible(const PolySystem& s, unsigned max_power,
                                           const AdmissibilityOptions& opts = {});

/// Finds A with A C A^{-1} upper triangular (C the linear part) and applies
/// it. Requires zero constant terms.
std::pair<PolySystem, TransformParams> triangularize_linear(const PolySystem& s);

}  // namespace carleman
