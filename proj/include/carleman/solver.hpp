#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "carleman/carleman.hpp"
#include "carleman/recurrence.hpp"
#include "carleman/spectral.hpp"

namespace carleman {

/// sum_m coeff_m * base_m^i with distinct bases and no zero coefficients.
class ExpSum {
 public:
  using Term = std::pair<Scalar, Scalar>;  // (base, coeff)

  ExpSum() = default;
  /// Merges equal bases (float: within merge_tolerance relative), drops zero
  /// coefficients and sorts bases ascending.
  static ExpSum canonical(std::vector<Term> terms, double merge_tolerance = 1e-9);

  const std::vector<Term>& terms() const noexcept { return terms_; }
  bool is_zero() const noexcept { return terms_.empty(); }
  Scalar eval(unsigned i, Mode mode) const;
  /// ASCII rendering such as "-5*2^i + 6*3^i"; "0" when empty.
  std::string str() const;

  friend bool operator==(const ExpSum& a, const ExpSum& b) { return a.terms_ == b.terms_; }

 private:
  std::vector<Term> terms_;
};

using MonomialMap = std::map<Monomial, ExpSum, GradedLexLess>;

struct VariableSolution {
  std::string name;
  Scalar offset;
  MonomialMap terms;
};

/// Closed form of a depth-one (possibly reduced) system. `variables` are in
/// original coordinates: u_p(i) = offset_p + sum_m terms[m](i) * m(u(0)).
/// `transformed` holds the same series in the coordinates z' = A (z - B).
struct ClosedFormSolution {
  std::size_t k = 0;
  /// Depth and variable count of the system before depth reduction.
  std::size_t depth = 1;
  std::size_t source_k = 0;
  unsigned order = 0;
  Mode mode = Mode::Exact;
  TransformParams transform;
  std::vector<VariableSolution> variables;
  std::vector<VariableSolution> transformed;
};

enum class ShiftChoice { Auto, None, Explicit };

struct SolveOptions {
  unsigned order = 6;
  ShiftChoice shift = ShiftChoice::Auto;
  /// Explicit shift: k values (repeated for every lag) or n*k values.
  std::vector<Scalar> shift_vector;
  std::optional<Matrix> linear_transform;
  unsigned max_verify_power = 5;
  std::uint64_t seed = 0;
  /// Float-mode relative tolerance for verification.
  double tolerance = 1e-8;
  double distinct_tolerance = 1e-9;
  double zero_tolerance = 1e-9;
};

struct CandidateReport {
  std::vector<Scalar> shift;
  std::optional<AdmissibilityReport> admissibility;
  /// Set when the candidate failed before admissibility could be decided.
  std::optional<Error> error;
  bool passed() const { return !error && admissibility && admissibility->passed; }
};

struct PreparedSystem {
  PolySystem source;   // as given
  PolySystem reduced;  // depth one
  std::vector<CandidateReport> candidates;
  std::size_t chosen = 0;
  TransformParams transform;
  PolySystem transformed;  // zero constant term, triangular linear part
};

/// Stages (1)-(3): depth reduction, shift and linear transform, admissibility.
PreparedSystem prepare(const PolySystem& system, const SolveOptions& opts);

ClosedFormSolution solve(const PolySystem& system, const SolveOptions& opts);

/// Coordinates of prepared.transformed's truncated transition matrix.
CarlemanMatrix prepared_transition(const PreparedSystem& prepared, unsigned order);

/// i-fold composition of F on symbolic initial values, truncated at degree N.
std::vector<Poly> oracle_iterate_symbolic(const PolySystem& system, unsigned i, unsigned order);

/// Depth-n iteration on symbolic history. Variable j*k + l of the result
/// polynomials is u^l_{n-1-j}; returns u_{n-1+steps}.
std::vector<Poly> oracle_iterate_history(const PolySystem& system, unsigned steps, unsigned order);

struct VerificationEntry {
  unsigned step = 0;
  std::size_t variable = 0;
  Monomial monomial;
  Scalar expected;
  Scalar actual;
  double discrepancy = 0.0;
  bool pass = true;
};

struct VerificationReport {
  /// "original" or "transformed".
  std::string coordinates;
  unsigned max_power = 0;
  std::vector<bool> step_passed;
  std::vector<std::size_t> step_checked;
  std::vector<VerificationEntry> failures;
  std::size_t checked = 0;
  double max_discrepancy = 0.0;
  bool passed() const { return failures.empty(); }
};

VerificationReport verify(const ClosedFormSolution& sol, const PolySystem& system, const SolveOptions& opts);

/// z0 is the reduced state (length sol.k).
std::vector<Scalar> eval_closed_form(const ClosedFormSolution& sol, unsigned i, const std::vector<Scalar>& z0);

/// history holds u_0 .. u_{n-1} (n vectors of k values); returns u_i.
std::vector<Scalar> eval_direct(const PolySystem& system, unsigned i, const std::vector<std::vector<Scalar>>& history);

/// u_i from the closed form given the same history as eval_direct.
std::vector<Scalar> eval_closed_form_history(const ClosedFormSolution& sol, unsigned i,
                                             const std::vector<std::vector<Scalar>>& history);

}  // namespace carleman
