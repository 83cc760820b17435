#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "carleman/parser.hpp"
#include "carleman/solver.hpp"
#include "support.hpp"

using namespace carleman;
using testing_support::q;
using testing_support::qmatrix;
using testing_support::Rng;

namespace {

const char* kCoupled =
    "vars: u, v\n"
    "u[i] = 8*u[i-1] + 10*v[i-1] + u[i-1]^2 + 3*u[i-1]*v[i-1] + v[i-1]^2\n"
    "v[i] = -3*u[i-1] - 3*v[i-1] + u[i-1]^2 - u[i-1]*v[i-1] + v[i-1]^2";

ExpSum es(std::vector<std::pair<long, Scalar>> terms) {
  std::vector<ExpSum::Term> out;
  for (auto& [b, c] : terms) out.emplace_back(q(b), c);
  return ExpSum::canonical(std::move(out));
}

ExpSum lookup(const VariableSolution& v, std::vector<unsigned> e) {
  auto it = v.terms.find(Monomial(std::move(e)));
  return it == v.terms.end() ? ExpSum() : it->second;
}

// The closed form at step i as polynomials in the initial values.
std::vector<Poly> series_at(const std::vector<VariableSolution>& vars, std::size_t k, unsigned i, Mode mode) {
  std::vector<Poly> out;
  for (const auto& v : vars) {
    Poly p = Poly::constant(k, v.offset);
    for (const auto& [m, e] : v.terms) p.add_term(m, e.eval(i, mode));
    out.push_back(std::move(p));
  }
  return out;
}

SolveOptions coupled_options(unsigned order) {
  SolveOptions opts;
  opts.order = order;
  opts.linear_transform = qmatrix({{1, 2}, {-3, -5}});
  return opts;
}

Scalar logistic_f3(const Scalar& r, unsigned i) {
  Scalar ri = r.pow(i);
  Scalar num = q(2) * r * ri - q(2) * (r + q(1)) * ri * ri + q(2) * ri * ri * ri;
  Scalar den = r.pow(3) - r.pow(2) - r + q(1);
  return num / den;
}

}  // namespace

TEST_CASE("ExpSum canonical form and rendering") {
  ExpSum e = ExpSum::canonical({{q(3), q(6)}, {q(2), q(-5)}, {q(3), q(0)}, {q(4), q(1)}, {q(4), q(-1)}});
  REQUIRE(e.terms().size() == 2);
  CHECK(e.terms()[0].first == q(2));
  CHECK(e.str() == "-5*2^i + 6*3^i");
  CHECK(e.eval(0, Mode::Exact) == q(1));
  CHECK(e.eval(2, Mode::Exact) == q(34));
  CHECK(ExpSum().str() == "0");
  CHECK(ExpSum::canonical({{q(2), q(1)}, {q(2), q(-1)}}).is_zero());
}

TEST_CASE("logistic closed forms for several r") {
  for (Scalar r : {q(2), q(3), q(1, 2)}) {
    PolySystem s = parse_system("vars: u\nu[i] = " + r.str() + "*u[i-1] - " + r.str() + "*u[i-1]^2", Mode::Exact);
    SolveOptions opts;
    opts.order = 3;
    ClosedFormSolution sol = solve(s, opts);
    CAPTURE(r.str());
    REQUIRE(sol.variables.size() == 1);
    const auto& v = sol.variables[0];
    CHECK(v.offset == q(0));
    for (unsigned i = 0; i <= 8; ++i) {
      Scalar ri = r.pow(i);
      CHECK(lookup(v, {1}).eval(i, Mode::Exact) == ri);
      CHECK(lookup(v, {2}).eval(i, Mode::Exact) == (ri - ri * ri) / (r - q(1)));
      CHECK(lookup(v, {3}).eval(i, Mode::Exact) == logistic_f3(r, i));
    }
  }
}

TEST_CASE("logistic at r = 2 renders as expected") {
  PolySystem s = parse_system("vars: u\nu[i] = 2*u[i-1] - 2*u[i-1]^2", Mode::Exact);
  SolveOptions opts;
  opts.order = 3;
  auto sol = solve(s, opts);
  CHECK(lookup(sol.variables[0], {1}) == es({{2, q(1)}}));
  CHECK(lookup(sol.variables[0], {2}) == es({{2, q(1)}, {4, q(-1)}}));
  CHECK(lookup(sol.variables[0], {3}) == es({{2, q(4, 3)}, {4, q(-2)}, {8, q(2, 3)}}));
}

TEST_CASE("coupled example in transformed coordinates") {
  auto sol = solve(parse_system(kCoupled, Mode::Exact), coupled_options(2));
  REQUIRE(sol.transformed.size() == 2);
  const auto& a = sol.transformed[0];
  const auto& b = sol.transformed[1];
  CHECK(lookup(a, {1, 0}) == es({{2, q(1)}}));
  CHECK(lookup(a, {0, 1}).is_zero());
  CHECK(lookup(b, {0, 1}) == es({{3, q(1)}}));
  for (unsigned i = 0; i <= 6; ++i) {
    auto p = [&](long base) { return q(base).pow(i); };
    CHECK(lookup(a, {2, 0}).eval(i, Mode::Exact) == q(87, 2) * (p(4) - p(2)));
    CHECK(lookup(a, {1, 1}).eval(i, Mode::Exact) == q(67, 4) * (p(6) - p(2)));
    CHECK(lookup(a, {0, 2}).eval(i, Mode::Exact) == q(13, 7) * (p(9) - p(2)));
    CHECK(lookup(b, {2, 0}).eval(i, Mode::Exact) == q(-212) * (p(4) - p(3)));
    CHECK(lookup(b, {1, 1}).eval(i, Mode::Exact) == q(-164, 3) * (p(6) - p(3)));
    CHECK(lookup(b, {0, 2}).eval(i, Mode::Exact) == q(-16, 3) * (p(9) - p(3)));
  }
}

TEST_CASE("coupled example in original coordinates") {
  auto sol = solve(parse_system(kCoupled, Mode::Exact), coupled_options(2));
  const auto& u = sol.variables[0];
  const auto& v = sol.variables[1];
  CHECK(lookup(u, {1, 0}) == es({{3, q(6)}, {2, q(-5)}}));
  CHECK(lookup(u, {0, 1}) == es({{3, q(10)}, {2, q(-10)}}));
  CHECK(lookup(u, {2, 0}) == es({{9, q(87, 7)}, {6, q(-307, 4)}, {4, q(413, 2)}, {3, q(-192)}, {2, q(1395, 28)}}));
  CHECK(lookup(u, {1, 1}) == es({{9, q(290, 7)}, {6, q(-3377, 12)}, {4, q(826)}, {3, q(-2440, 3)}, {2, q(6365, 28)}}));
  CHECK(lookup(u, {0, 2}) == es({{9, q(725, 21)}, {6, q(-1535, 6)}, {4, q(826)}, {3, q(-2608, 3)}, {2, q(3705, 14)}}));
  CHECK(lookup(v, {1, 0}) == es({{3, q(-3)}, {2, q(3)}}));
  CHECK(lookup(v, {0, 1}) == es({{3, q(-5)}, {2, q(6)}}));
  CHECK(lookup(v, {2, 0}) == es({{9, q(15, 7)}, {6, q(53, 4)}, {4, q(-163, 2)}, {3, q(96)}, {2, q(-837, 28)}}));
  CHECK(lookup(v, {1, 1}) == es({{9, q(50, 7)}, {6, q(583, 12)}, {4, q(-326)}, {3, q(1220, 3)}, {2, q(-3819, 28)}}));
  CHECK(lookup(v, {0, 2}) == es({{9, q(125, 21)}, {6, q(265, 6)}, {4, q(-326)}, {3, q(1304, 3)}, {2, q(-2223, 14)}}));
}

TEST_CASE("pure linear recurrence") {
  auto sol = solve(parse_system("vars: u\nu[i] = 2*u[i-1]", Mode::Exact), SolveOptions{});
  REQUIRE(sol.variables[0].terms.size() == 1);
  CHECK(lookup(sol.variables[0], {1}) == es({{2, q(1)}}));
  for (unsigned i = 0; i < 10; ++i) CHECK(eval_closed_form(sol, i, {q(3)})[0] == q(3) * q(2).pow(i));
}

TEST_CASE("symbolic oracle") {
  PolySystem s = parse_system("vars: u\nu[i] = 2*u[i-1] - 2*u[i-1]^2", Mode::Exact);
  auto two = oracle_iterate_symbolic(s, 2, 4);
  CHECK(two[0] == testing_support::poly(1, {{{1}, q(4)}, {{2}, q(-12)}, {{3}, q(16)}, {{4}, q(-8)}}));
  CHECK(oracle_iterate_symbolic(s, 0, 4)[0] == Poly::variable(1, 0, Mode::Exact));
  CHECK(oracle_iterate_symbolic(s, 1, 4)[0] == s.equations[0]);
}

TEST_CASE("verification passes on the documented systems") {
  PolySystem logistic = parse_system("vars: u\nu[i] = 2*u[i-1] - 2*u[i-1]^2", Mode::Exact);
  SolveOptions opts;
  opts.order = 3;
  auto rep = verify(solve(logistic, opts), logistic, opts);
  CHECK(rep.passed());
  CHECK(rep.coordinates == "original");
  CHECK(rep.step_passed.size() == 6);
  CHECK(rep.checked > 0);

  PolySystem coupled = parse_system(kCoupled, Mode::Exact);
  for (unsigned n : {2U, 3U}) {
    auto o = coupled_options(n);
    CHECK(verify(solve(coupled, o), coupled, o).passed());
  }
}

TEST_CASE("verification detects a corrupted coefficient") {
  PolySystem logistic = parse_system("vars: u\nu[i] = 2*u[i-1] - 2*u[i-1]^2", Mode::Exact);
  SolveOptions opts;
  opts.order = 3;
  auto sol = solve(logistic, opts);
  sol.variables[0].terms[Monomial({2})] = es({{2, q(1)}, {4, q(-2)}});
  auto rep = verify(sol, logistic, opts);
  CHECK_FALSE(rep.passed());
  REQUIRE(!rep.failures.empty());
  CHECK(rep.failures.front().monomial == Monomial({2}));
  CHECK(rep.step_passed[0] == false);
}

TEST_CASE("identity at step zero") {
  auto check_identity = [](const ClosedFormSolution& sol) {
    for (std::size_t p = 0; p < sol.variables.size(); ++p) {
      const auto& v = sol.variables[p];
      for (const auto& [m, e] : v.terms) {
        Scalar expected = m == Monomial::unit(sol.k, p) ? q(1) : q(0);
        if (m.degree() == 0) expected = -v.offset;
        CHECK(e.eval(0, Mode::Exact) == expected);
      }
    }
  };
  check_identity(solve(parse_system(kCoupled, Mode::Exact), coupled_options(3)));
  SolveOptions opts;
  opts.order = 4;
  // shifted by the fixed point -2
  check_identity(solve(parse_system("vars: u\nu[i] = u[i-1]^3 + 2*u[i-1]^2 + u[i-1]", Mode::Exact), opts));
}

TEST_CASE("one-step consistency") {
  PolySystem s = parse_system(kCoupled, Mode::Exact);
  const unsigned order = 3;
  auto sol = solve(s, coupled_options(order));
  for (unsigned i = 0; i < 5; ++i) {
    auto now = series_at(sol.variables, 2, i, Mode::Exact);
    auto next = series_at(sol.variables, 2, i + 1, Mode::Exact);
    for (std::size_t p = 0; p < 2; ++p) CHECK(poly_compose(now[p], s.equations, order) == next[p]);
  }
}

TEST_CASE("eigenvector scaling of A does not change the solution") {
  PolySystem s = parse_system(kCoupled, Mode::Exact);
  auto base = solve(s, coupled_options(3));
  SolveOptions scaled = coupled_options(3);
  scaled.linear_transform = qmatrix({{2, 4}, {3, 5}});
  auto other = solve(s, scaled);
  SolveOptions automatic;
  automatic.order = 3;
  auto found = solve(s, automatic);
  for (std::size_t p = 0; p < 2; ++p) {
    CHECK(base.variables[p].terms == other.variables[p].terms);
    CHECK(base.variables[p].terms == found.variables[p].terms);
  }
}

TEST_CASE("oracle equivalence on random triangular systems") {
  Rng rng(2024);
  for (int trial = 0; trial < 30; ++trial) {
    std::size_t k = static_cast<std::size_t>(rng.integer(1, 3));
    PolySystem s = testing_support::random_triangular_system(rng, k, 3, 5);
    SolveOptions opts;
    opts.order = static_cast<unsigned>(rng.integer(1, k == 3 ? 3 : 4));
    opts.shift = ShiftChoice::None;
    ClosedFormSolution sol;
    try {
      sol = solve(s, opts);
    } catch (const Error& e) {
      // products of the diagonal can coincide; that is a legitimate refusal
      REQUIRE(e.code() == ErrorCode::RepeatedEigenvalue);
      continue;
    }
    for (unsigned i = 0; i <= 4; ++i) {
      auto oracle = oracle_iterate_symbolic(s, i, opts.order);
      auto series = series_at(sol.variables, k, i, Mode::Exact);
      for (std::size_t p = 0; p < k; ++p) REQUIRE(series[p] == oracle[p]);
    }
  }
}

TEST_CASE("depth-two system against the history oracle") {
  PolySystem s = parse_system("vars: u\nu[i] = 2*u[i-1] + 3*u[i-2] + u[i-1]*u[i-2]", Mode::Exact);
  SolveOptions opts;
  opts.order = 2;
  auto sol = solve(s, opts);
  CHECK(sol.depth == 2);
  CHECK(sol.k == 2);
  for (unsigned i = 0; i <= 5; ++i) {
    auto oracle = oracle_iterate_history(s, i, opts.order);
    CHECK(series_at(sol.variables, 2, i, Mode::Exact)[0] == oracle[0]);
  }
  CHECK(verify(sol, s, opts).passed());

  opts.order = 3;
  try {
    (void)solve(s, opts);
    FAIL("expected a collision at order 3");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::RepeatedEigenvalue);
  }
}

TEST_CASE("direct evaluation") {
  PolySystem logistic = parse_system("vars: u\nu[i] = 2*u[i-1] - 2*u[i-1]^2", Mode::Exact);
  CHECK(eval_direct(logistic, 1, {{q(1, 2)}})[0] == q(1, 2));
  CHECK(eval_direct(logistic, 0, {{q(1, 3)}})[0] == q(1, 3));
  PolySystem fib = parse_system("vars: u\nu[i] = u[i-1] + u[i-2]", Mode::Exact);
  CHECK(eval_direct(fib, 10, {{q(1)}, {q(1)}})[0] == q(89));
}

TEST_CASE("float closed form of the logistic map is accurate for small data") {
  PolySystem s = parse_system("vars: u\nu[i] = 2*u[i-1] - 2*u[i-1]^2", Mode::Float);
  SolveOptions opts;
  opts.order = 6;
  auto sol = solve(s, opts);
  Scalar z0 = Scalar(Scalar::Complex(1.0 / 1024.0, 0.0));
  double series = eval_closed_form(sol, 3, {z0})[0].to_complex().real();
  double direct = eval_direct(s, 3, {{z0}})[0].to_complex().real();
  CHECK(std::fabs(series - direct) <= std::ldexp(1.0, -60));
  CHECK(eval_closed_form(sol, 0, {z0})[0] == z0);
}

TEST_CASE("Fibonacci in float mode matches Binet") {
  PolySystem fib = parse_system("vars: u\nu[i] = u[i-1] + u[i-2]", Mode::Float);
  SolveOptions opts;
  opts.order = 4;
  auto sol = solve(fib, opts);
  const double phi = (1 + std::sqrt(5.0)) / 2, psi = (1 - std::sqrt(5.0)) / 2;
  for (unsigned i = 0; i <= 20; ++i) {
    double binet = (std::pow(phi, i) - std::pow(psi, i)) / std::sqrt(5.0);
    auto u = eval_closed_form_history(sol, i, {{testing_support::f(0)}, {testing_support::f(1)}});
    CHECK(std::abs(u[0].to_complex() - binet) <= 1e-9 * std::max(1.0, std::fabs(binet)));
  }
}

TEST_CASE("solver errors carry stages") {
  PolySystem cubic = parse_system("vars: u\nu[i] = u[i-1]^3 + 2*u[i-1]^2 + u[i-1]", Mode::Exact);
  SolveOptions none;
  none.shift = ShiftChoice::None;
  try {
    (void)solve(cubic, none);
    FAIL("expected RepeatedEigenvalue");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::RepeatedEigenvalue);
    CHECK(!e.stage().empty());
  }
  SolveOptions explicit_shift;
  explicit_shift.shift = ShiftChoice::Explicit;
  explicit_shift.shift_vector = {q(-2)};
  CHECK_NOTHROW(solve(cubic, explicit_shift));
  explicit_shift.shift_vector = {q(1)};
  CHECK_THROWS_AS(solve(cubic, explicit_shift), Error);

  PolySystem offset = parse_system("vars: u\nu[i] = u[i-1]^2 + 2", Mode::Exact);
  try {
    (void)solve(offset, SolveOptions{});
    FAIL("expected ShiftNotFound");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ShiftNotFound);
  }
  CHECK_THROWS_AS(solve(offset, none), Error);
}
