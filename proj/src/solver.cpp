#include "carleman/solver.hpp"

#include <algorithm>

namespace carleman {

// ---------------------------------------------------------------------------
// ExpSum

ExpSum ExpSum::canonical(std::vector<Term> terms, double merge_tolerance) {
  std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) { return scalar_less(a.first, b.first); });
  ExpSum out;
  for (auto& [base, coeff] : terms) {
    if (!out.terms_.empty()) {
      auto& last = out.terms_.back();
      bool same = base.is_exact() ? last.first == base : approx_equal(last.first, base, merge_tolerance);
      if (same) {
        last.second += coeff;
        continue;
      }
    }
    out.terms_.emplace_back(std::move(base), std::move(coeff));
  }
  std::erase_if(out.terms_, [](const Term& t) { return t.second.is_zero(); });
  return out;
}

Scalar ExpSum::eval(unsigned i, Mode mode) const {
  Scalar acc = Scalar::zero(mode);
  for (const auto& [base, coeff] : terms_) acc += coeff * base.pow(i);
  return acc;
}

namespace {

bool is_negative_real(const Scalar& s) {
  if (s.is_exact()) return sgn(s.rational()) < 0;
  auto z = s.to_complex();
  return z.imag() == 0.0 && std::signbit(z.real());
}

bool is_plain(const Scalar& s) {
  // non-negative real without a fraction bar or sign that needs grouping
  if (s.is_exact()) return sgn(s.rational()) >= 0 && s.rational().get_den() == 1;
  auto z = s.to_complex();
  return z.imag() == 0.0 && z.real() >= 0.0;
}

}  // namespace

std::string ExpSum::str() const {
  if (terms_.empty()) return "0";
  std::string out;
  for (const auto& [base, coeff] : terms_) {
    bool negative = is_negative_real(coeff);
    Scalar magnitude = negative ? -coeff : coeff;
    std::string mag = magnitude.str();
    if (!magnitude.is_exact() && magnitude.to_complex().imag() != 0.0) mag = "(" + mag + ")";
    if (out.empty()) {
      if (negative) out += "-";
    } else {
      out += negative ? " - " : " + ";
    }
    if (base.is_one()) {
      out += mag;
      continue;
    }
    if (!magnitude.is_one()) out += mag + "*";
    std::string b = base.str();
    out += is_plain(base) ? b : "(" + b + ")";
    out += "^i";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Preparation

namespace {

std::vector<Scalar> expand_shift(const PolySystem& source, const std::vector<Scalar>& shift) {
  const std::size_t total = source.var_count();
  if (shift.size() == total) return shift;
  if (shift.size() == source.k) {
    std::vector<Scalar> out;
    for (std::size_t j = 0; j < source.depth; ++j) out.insert(out.end(), shift.begin(), shift.end());
    return out;
  }
  throw Error(ErrorCode::Arity,
              "shift vector has " + std::to_string(shift.size()) + " entries, expected " + std::to_string(source.k) +
                  (total != source.k ? " or " + std::to_string(total) : std::string()),
              "shift");
}

double linear_scale(const PolySystem& s) { return std::max(1.0, s.linear_part().max_abs()); }

// Shifted and triangularized system for one candidate, plus the transform.
std::pair<PolySystem, TransformParams> transform_candidate(const PolySystem& reduced, const std::vector<Scalar>& b,
                                                           const SolveOptions& opts) {
  TransformParams shift = TransformParams::shift(b);
  PolySystem shifted = apply_affine(reduced, shift);
  if (reduced.mode == Mode::Float) shifted = clean_float_system(shifted, opts.zero_tolerance);
  if (!has_zero_constant_terms(shifted, opts.zero_tolerance)) {
    throw Error(ErrorCode::NotShifted, "shift does not remove the constant terms; it is not a fixed point", "shift");
  }
  if (opts.linear_transform) {
    if (opts.linear_transform->mode() != reduced.mode) {
      throw Error(ErrorCode::ModeMismatch, "matrix A mode differs from system mode", "triangularize");
    }
    TransformParams lin = TransformParams::linear(*opts.linear_transform);
    PolySystem out = apply_affine(shifted, lin);
    Matrix c = out.linear_part();
    if (out.mode == Mode::Exact ? !c.is_upper_triangular()
                                : c.max_below_diagonal() > 1e-10 * linear_scale(shifted)) {
      throw Error(ErrorCode::NotTriangular, "supplied A does not make the linear part upper triangular",
                  "triangularize");
    }
    if (out.mode == Mode::Float) out = clean_float_system(out, 1e-10 * linear_scale(shifted));
    return {std::move(out), shift.then(lin)};
  }
  try {
    auto [out, lin] = triangularize_linear(shifted);
    return {std::move(out), shift.then(lin)};
  } catch (const Error& e) {
    rethrow_with_stage(e, "triangularize");
  }
}

}  // namespace

PreparedSystem prepare(const PolySystem& system, const SolveOptions& opts) {
  if (opts.order == 0) throw Error(ErrorCode::InvalidArgument, "truncation order must be at least 1", "options");
  PreparedSystem prep;
  prep.source = system;
  prep.reduced = reduce_depth(system);
  const PolySystem& reduced = prep.reduced;
  const Mode mode = reduced.mode;

  std::vector<std::vector<Scalar>> candidates;
  switch (opts.shift) {
    case ShiftChoice::None:
      if (!has_zero_constant_terms(reduced, opts.zero_tolerance)) {
        throw Error(ErrorCode::NotShifted,
                    "system has non-zero constant terms and shifting is disabled; the transition matrix would not "
                    "be triangular",
                    "shift");
      }
      candidates.emplace_back(reduced.var_count(), Scalar::zero(mode));
      break;
    case ShiftChoice::Explicit: {
      auto b = expand_shift(system, opts.shift_vector);
      for (const auto& v : b) {
        if (v.mode() != mode) throw Error(ErrorCode::ModeMismatch, "shift vector mode differs from system", "shift");
      }
      candidates.push_back(std::move(b));
      break;
    }
    case ShiftChoice::Auto: {
      FixedPointOptions fp;
      fp.rng_seed = opts.seed;
      candidates = fixed_points(reduced, fp);
      if (candidates.empty()) {
        throw Error(ErrorCode::ShiftNotFound,
                    mode == Mode::Exact ? "no rational fixed point found in exact mode; supply --shift or use --mode float"
                                        : "no fixed point found; supply --shift",
                    "shift");
      }
      break;
    }
  }

  AdmissibilityOptions adm;
  adm.distinct_tolerance = opts.distinct_tolerance;
  adm.zero_tolerance = opts.zero_tolerance;
  std::optional<std::size_t> chosen;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    CandidateReport report;
    report.shift = candidates[c];
    try {
      auto [transformed, params] = transform_candidate(reduced, candidates[c], opts);
      report.admissibility = check_shift_admissible(transformed, opts.order, adm);
      if (report.admissibility->passed && !chosen) {
        chosen = c;
        prep.transform = params;
        prep.transformed = std::move(transformed);
      }
    } catch (const Error& e) {
      report.error = e;
    }
    prep.candidates.push_back(std::move(report));
  }
  if (!chosen) {
    const CandidateReport& first = prep.candidates.front();
    if (first.error) throw *first.error;
    std::string shift_text;
    for (const auto& v : first.shift) shift_text += (shift_text.empty() ? "" : ", ") + v.str();
    throw Error(ErrorCode::RepeatedEigenvalue,
                first.admissibility->reason + " at shift (" + shift_text + ")" +
                    (prep.candidates.size() > 1 ? " and no other fixed point is admissible" : "") +
                    "; the truncated transition matrix is not diagonalizable",
                "admissibility");
  }
  prep.chosen = *chosen;
  return prep;
}

CarlemanMatrix prepared_transition(const PreparedSystem& prepared, unsigned order) {
  try {
    return build_transition(prepared.transformed, build_basis(prepared.transformed.k, order));
  } catch (const Error& e) {
    rethrow_with_stage(e, "matrix");
  }
}

// ---------------------------------------------------------------------------
// Solve

namespace {

using RawTerms = std::vector<ExpSum::Term>;

MonomialMap finish(std::map<Monomial, RawTerms, GradedLexLess>& raw, double tol) {
  MonomialMap out;
  for (auto& [m, terms] : raw) {
    ExpSum e = ExpSum::canonical(std::move(terms), tol);
    if (!e.is_zero()) out.emplace(m, std::move(e));
  }
  return out;
}

}  // namespace

ClosedFormSolution solve(const PolySystem& system, const SolveOptions& opts) {
  PreparedSystem prep = prepare(system, opts);
  const PolySystem& ts = prep.transformed;
  const std::size_t k = ts.k;
  const Mode mode = ts.mode;
  const unsigned order = opts.order;

  CarlemanMatrix t = prepared_transition(prep, order);
  const std::size_t size = t.basis.size();
  // the constant monomial is its own block (zero constant terms), so only the
  // block of degrees 1..N is diagonalized; block index r is basis index r + 1
  Matrix block(size - 1, size - 1, mode);
  for (std::size_t r = 1; r < size; ++r)
    for (std::size_t c = r; c < size; ++c) block(r - 1, c - 1) = t.entries(r, c);
  SpectralDecomposition dec;
  try {
    SpectralOptions so;
    so.distinct_tolerance = opts.distinct_tolerance;
    dec = decompose(block, so);
  } catch (const Error& e) {
    rethrow_with_stage(e, "spectral");
  }

  // transformed variable s sits at basis index s + 1; row s + 1 of T^i is
  // sum_j P[s+1][j] lambda_j^i P^{-1}[j][l]
  std::vector<std::vector<ExpSum>> coeff(k, std::vector<ExpSum>(size));
  for (std::size_t s = 0; s < k; ++s) {
    for (std::size_t l = s; l + 1 < size; ++l) {
      RawTerms terms;
      for (std::size_t j = s; j <= l; ++j) {
        const Scalar& p = dec.modal(s, j);
        const Scalar& q = dec.modal_inverse(j, l);
        if (p.is_zero() || q.is_zero()) continue;
        terms.emplace_back(dec.eigenvalues[j], p * q);
      }
      coeff[s][l + 1] = ExpSum::canonical(std::move(terms), opts.distinct_tolerance);
    }
  }

  ClosedFormSolution sol;
  sol.k = k;
  sol.depth = system.depth;
  sol.source_k = system.k;
  sol.order = order;
  sol.mode = mode;
  sol.transform = prep.transform;
  const auto names = prep.reduced.names.empty() ? default_names(k) : prep.reduced.names;

  for (std::size_t s = 0; s < k; ++s) {
    VariableSolution v{names[s], Scalar::zero(mode), {}};
    for (std::size_t l = 1; l < size; ++l) {
      if (!coeff[s][l].is_zero()) v.terms.emplace(t.basis[l], coeff[s][l]);
    }
    sol.transformed.push_back(std::move(v));
  }

  const TransformParams& tp = prep.transform;
  if (tp.a() == Matrix::identity(k, mode) && tp.has_zero_shift()) {
    sol.variables = sol.transformed;
    return sol;
  }

  // basis monomials of z0' = A z0 - A B as polynomials in z0
  std::vector<Scalar> minus_ab = tp.a() * tp.b();
  for (auto& v : minus_ab) v = -v;
  std::vector<Poly> pulled(size);
  for (std::size_t l = 1; l < size; ++l) {
    pulled[l] = poly_substitute_affine(Poly::monomial(t.basis[l], Scalar::one(mode)), tp.a(), minus_ab);
  }
  for (std::size_t p = 0; p < k; ++p) {
    std::map<Monomial, RawTerms, GradedLexLess> raw;
    for (std::size_t s = 0; s < k; ++s) {
      const Scalar& ainv = tp.a_inv()(p, s);
      if (ainv.is_zero()) continue;
      for (std::size_t l = 1; l < size; ++l) {
        if (coeff[s][l].is_zero()) continue;
        for (const auto& [m, c] : pulled[l].terms()) {
          Scalar factor = ainv * c;
          auto& slot = raw[m];
          for (const auto& [base, bc] : coeff[s][l].terms()) slot.emplace_back(base, bc * factor);
        }
      }
    }
    sol.variables.push_back(VariableSolution{names[p], tp.b()[p], finish(raw, opts.distinct_tolerance)});
  }
  return sol;
}

// ---------------------------------------------------------------------------
// Oracles

namespace {

constexpr std::size_t kOracleTermLimit = 1000000;

void guard_terms(const std::vector<Poly>& polys) {
  std::size_t total = 0;
  for (const auto& p : polys) total += p.term_count();
  if (total > kOracleTermLimit) {
    throw Error(ErrorCode::SizeLimit,
                "symbolic iteration exceeded " + std::to_string(kOracleTermLimit) + " terms", "oracle");
  }
}

}  // namespace

std::vector<Poly> oracle_iterate_symbolic(const PolySystem& system, unsigned i, unsigned order) {
  system.validate();
  if (!system.is_depth_one()) throw Error(ErrorCode::Arity, "symbolic iteration needs a depth-one system", "oracle");
  const std::size_t k = system.k;
  const bool graded = has_zero_constant_terms(system, 0.0);
  const unsigned step_order = graded ? order : kNoTruncation;
  std::vector<Poly> x;
  for (std::size_t v = 0; v < k; ++v) x.push_back(Poly::variable(k, v, system.mode));
  for (unsigned step = 0; step < i; ++step) {
    std::vector<Poly> next;
    next.reserve(k);
    for (const auto& f : system.equations) next.push_back(poly_compose(f, x, step_order));
    x = std::move(next);
    guard_terms(x);
  }
  for (auto& p : x) p = poly_truncate(p, order);
  return x;
}

std::vector<Poly> oracle_iterate_history(const PolySystem& system, unsigned steps, unsigned order) {
  system.validate();
  const std::size_t k = system.k;
  const std::size_t n = system.depth;
  const std::size_t nvars = n * k;
  const bool graded = has_zero_constant_terms(system, 0.0);
  const unsigned step_order = graded ? order : kNoTruncation;
  // window[j] holds u_{t-j} for the newest step t
  std::vector<std::vector<Poly>> window(n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t l = 0; l < k; ++l) window[j].push_back(Poly::variable(nvars, j * k + l, system.mode));
  }
  for (unsigned step = 0; step < steps; ++step) {
    std::vector<Poly> subs;
    subs.reserve(nvars);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t l = 0; l < k; ++l) subs.push_back(window[j][l]);
    std::vector<Poly> next;
    for (const auto& f : system.equations) next.push_back(poly_compose(f, subs, step_order));
    guard_terms(next);
    window.insert(window.begin(), std::move(next));
    window.pop_back();
  }
  auto out = window.front();
  for (auto& p : out) p = poly_truncate(p, order);
  return out;
}

// ---------------------------------------------------------------------------
// Verification

VerificationReport verify(const ClosedFormSolution& sol, const PolySystem& system, const SolveOptions& opts) {
  PolySystem reduced = reduce_depth(system);
  if (reduced.k != sol.k) {
    throw Error(ErrorCode::Arity,
                "solution has " + std::to_string(sol.k) + " variables, system has " + std::to_string(reduced.k),
                "verify");
  }
  if (reduced.mode != sol.mode) throw Error(ErrorCode::ModeMismatch, "solution mode differs from system", "verify");

  VerificationReport report;
  report.max_power = opts.max_verify_power;
  const PolySystem* reference = &reduced;
  PolySystem shifted;
  const std::vector<VariableSolution>* series = &sol.variables;
  if (!sol.transform.has_zero_shift()) {
    // truncation happens in shifted coordinates, so compare there
    shifted = apply_affine(reduced, sol.transform);
    if (shifted.mode == Mode::Float) shifted = clean_float_system(shifted, opts.zero_tolerance);
    reference = &shifted;
    series = &sol.transformed;
    report.coordinates = "transformed";
  } else {
    report.coordinates = "original";
  }
  if (series->size() != sol.k) throw Error(ErrorCode::Arity, "solution is missing variables", "verify");

  for (unsigned i = 0; i <= opts.max_verify_power; ++i) {
    auto oracle = oracle_iterate_symbolic(*reference, i, sol.order);
    bool step_ok = true;
    std::size_t checked = 0;
    for (std::size_t p = 0; p < sol.k; ++p) {
      const auto& terms = (*series)[p].terms;
      std::map<Monomial, std::pair<Scalar, Scalar>, GradedLexLess> compare;  // expected, actual
      for (const auto& [m, c] : oracle[p].terms()) compare[m] = {c, Scalar::zero(sol.mode)};
      for (const auto& [m, e] : terms) {
        auto [it, inserted] = compare.try_emplace(m, Scalar::zero(sol.mode), Scalar::zero(sol.mode));
        it->second.second = e.eval(i, sol.mode);
      }
      for (const auto& [m, ea] : compare) {
        const auto& [expected, actual] = ea;
        ++checked;
        VerificationEntry entry{i, p, m, expected, actual, (expected - actual).abs(), true};
        if (sol.mode == Mode::Exact) {
          entry.pass = expected == actual;
        } else {
          entry.pass = entry.discrepancy <= opts.tolerance * std::max(1.0, expected.abs());
        }
        report.max_discrepancy = std::max(report.max_discrepancy, entry.discrepancy);
        if (!entry.pass) {
          step_ok = false;
          report.failures.push_back(std::move(entry));
        }
      }
    }
    report.checked += checked;
    report.step_passed.push_back(step_ok);
    report.step_checked.push_back(checked);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Evaluation

std::vector<Scalar> eval_closed_form(const ClosedFormSolution& sol, unsigned i, const std::vector<Scalar>& z0) {
  if (z0.size() != sol.k) {
    throw Error(ErrorCode::Arity,
                "initial state has " + std::to_string(z0.size()) + " values, expected " + std::to_string(sol.k),
                "eval");
  }
  std::vector<Scalar> out;
  for (const auto& v : sol.variables) {
    Scalar acc = v.offset;
    for (const auto& [m, e] : v.terms) {
      Scalar mono = Scalar::one(sol.mode);
      for (std::size_t s = 0; s < m.size(); ++s) {
        if (m.exponents[s] > 0) mono *= z0[s].pow(m.exponents[s]);
      }
      acc += e.eval(i, sol.mode) * mono;
    }
    out.push_back(std::move(acc));
  }
  return out;
}

namespace {

void check_history(std::size_t depth, std::size_t k, const std::vector<std::vector<Scalar>>& history) {
  if (history.size() != depth) {
    throw Error(ErrorCode::Arity,
                "history needs " + std::to_string(depth) + " steps, got " + std::to_string(history.size()), "eval");
  }
  for (const auto& h : history) {
    if (h.size() != k) {
      throw Error(ErrorCode::Arity, "each history step needs " + std::to_string(k) + " values", "eval");
    }
  }
}

}  // namespace

std::vector<Scalar> eval_direct(const PolySystem& system, unsigned i, const std::vector<std::vector<Scalar>>& history) {
  system.validate();
  const std::size_t n = system.depth;
  check_history(n, system.k, history);
  if (i < n) return history[i];
  // window[j] = u_{t-j}
  std::vector<std::vector<Scalar>> window(history.rbegin(), history.rend());
  for (std::size_t t = n; t <= i; ++t) {
    std::vector<Scalar> flat;
    for (const auto& w : window) flat.insert(flat.end(), w.begin(), w.end());
    std::vector<Scalar> next;
    for (const auto& f : system.equations) next.push_back(poly_eval(f, flat));
    window.insert(window.begin(), std::move(next));
    window.pop_back();
  }
  return window.front();
}

std::vector<Scalar> eval_closed_form_history(const ClosedFormSolution& sol, unsigned i,
                                             const std::vector<std::vector<Scalar>>& history) {
  const std::size_t n = sol.depth;
  const std::size_t k = sol.source_k;
  check_history(n, k, history);
  if (i + 1 < n) return history[i];
  std::vector<Scalar> state;
  for (std::size_t j = 0; j < n; ++j) state.insert(state.end(), history[n - 1 - j].begin(), history[n - 1 - j].end());
  auto full = eval_closed_form(sol, static_cast<unsigned>(i - (n - 1)), state);
  full.resize(k);
  return full;
}

}  // namespace carleman
