#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "carleman/parser.hpp"
#include "carleman/recurrence.hpp"
#include "support.hpp"

using namespace carleman;
using testing_support::f;
using testing_support::poly;
using testing_support::q;
using testing_support::qmatrix;
using testing_support::Rng;

namespace {

std::vector<Scalar> step(const PolySystem& s, const std::vector<Scalar>& state) {
  std::vector<Scalar> out;
  for (const auto& eq : s.equations) out.push_back(poly_eval(eq, state));
  return out;
}

// Iterates a depth-n system directly on its history window and returns u_0..u_{steps-1}
// (each a k-vector), starting from u_{-n}..u_{-1} given newest first.
std::vector<std::vector<Scalar>> run_history(const PolySystem& s, std::vector<Scalar> window, int steps) {
  std::vector<std::vector<Scalar>> seq;
  for (int i = 0; i < steps; ++i) {
    auto next = step(s, window);
    seq.push_back(next);
    std::vector<Scalar> shifted(next);
    shifted.insert(shifted.end(), window.begin(), window.end() - static_cast<long>(s.k));
    window = std::move(shifted);
  }
  return seq;
}

Matrix random_invertible(Rng& rng, std::size_t k) {
  while (true) {
    Matrix a(k, k, Mode::Exact);
    for (std::size_t r = 0; r < k; ++r)
      for (std::size_t c = 0; c < k; ++c) a(r, c) = rng.rational(4);
    if (!determinant(a).is_zero()) return a;
  }
}

PolySystem random_depth_one(Rng& rng, std::size_t k, bool constant_terms) {
  std::vector<Poly> eqs;
  for (std::size_t p = 0; p < k; ++p) {
    eqs.push_back(rng.polynomial(k, 3, static_cast<std::size_t>(rng.integer(1, 6)), 5, constant_terms ? 0 : 1));
  }
  return make_system(std::move(eqs), 1);
}

const char* kCoupled =
    "vars: u, v\n"
    "u[i] = 8*u[i-1] + 10*v[i-1] + u[i-1]^2 + 3*u[i-1]*v[i-1] + v[i-1]^2\n"
    "v[i] = -3*u[i-1] - 3*v[i-1] + u[i-1]^2 - u[i-1]*v[i-1] + v[i-1]^2";

}  // namespace

TEST_CASE("depth reduction of a depth-one system is the identity") {
  PolySystem s = parse_system("vars: u\nu[i] = 2*u[i-1] - 2*u[i-1]^2", Mode::Exact);
  CHECK(reduce_depth(s).same_equations(s));
}

TEST_CASE("Fibonacci reduces to the companion system") {
  PolySystem s = parse_system("vars: u\nu[i] = u[i-1] + u[i-2]", Mode::Exact);
  PolySystem r = reduce_depth(s);
  REQUIRE(r.k == 2);
  CHECK(r.depth == 1);
  CHECK(r.equations[0] == poly(2, {{{1, 0}, q(1)}, {{0, 1}, q(1)}}));
  CHECK(r.equations[1] == poly(2, {{{1, 0}, q(1)}}));

  auto direct = run_history(s, {q(1), q(1)}, 10);
  std::vector<Scalar> state{q(1), q(1)};
  for (int i = 0; i < 10; ++i) {
    state = step(r, state);
    CHECK(state[0] == direct[static_cast<std::size_t>(i)][0]);
  }
}

TEST_CASE("the nonlinear depth-two example reduces as documented") {
  PolySystem s = parse_system("vars: u\nu[i] = 2*u[i-1] + 3*u[i-2] + u[i-1]*u[i-2]", Mode::Exact);
  PolySystem r = reduce_depth(s);
  CHECK(r.equations[0] == poly(2, {{{1, 0}, q(2)}, {{0, 1}, q(3)}, {{1, 1}, q(1)}}));
  CHECK(r.equations[1] == poly(2, {{{1, 0}, q(1)}}));
  auto direct = run_history(s, {q(1), q(0)}, 10);
  std::vector<Scalar> state{q(1), q(0)};
  for (int i = 0; i < 10; ++i) {
    state = step(r, state);
    CHECK(state[0] == direct[static_cast<std::size_t>(i)][0]);
  }
}

TEST_CASE("depth reduction preserves trajectories of random systems") {
  Rng rng(7);
  for (int trial = 0; trial < 60; ++trial) {
    std::size_t k = static_cast<std::size_t>(rng.integer(1, 2));
    std::size_t n = static_cast<std::size_t>(rng.integer(1, 3));
    std::vector<Poly> eqs;
    // keep the degree low so ten steps stay cheap
    for (std::size_t p = 0; p < k; ++p) eqs.push_back(rng.polynomial(k * n, 2, 4, 3));
    PolySystem s = make_system(std::move(eqs), n);
    PolySystem r = reduce_depth(s);
    REQUIRE(r.k == k * n);
    std::vector<Scalar> window;
    for (std::size_t v = 0; v < k * n; ++v) window.push_back(rng.rational(2));
    auto direct = run_history(s, window, 10);
    std::vector<Scalar> state = window;
    for (int i = 0; i < 10; ++i) {
      state = step(r, state);
      for (std::size_t l = 0; l < k; ++l) REQUIRE(state[l] == direct[static_cast<std::size_t>(i)][l]);
    }
  }
}

TEST_CASE("univariate fixed points") {
  PolySystem cubic = parse_system("vars: u\nu[i] = u[i-1]^3 + 2*u[i-1]^2 + u[i-1]", Mode::Exact);
  auto fp = fixed_points(cubic);
  REQUIRE(fp.size() == 2);
  CHECK(fp[0][0] == q(0));
  CHECK(fp[1][0] == q(-2));

  PolySystem logistic = parse_system("vars: u\nu[i] = 2*u[i-1] - 2*u[i-1]^2", Mode::Exact);
  fp = fixed_points(logistic);
  REQUIRE(fp.size() == 2);
  CHECK(fp[0][0] == q(0));
  CHECK(fp[1][0] == q(1, 2));
}

TEST_CASE("multivariate exact fixed points") {
  PolySystem coupled = parse_system(kCoupled, Mode::Exact);
  auto fp = fixed_points(coupled);
  REQUIRE(!fp.empty());
  CHECK(fp[0] == std::vector<Scalar>{q(0), q(0)});

  PolySystem offset = parse_system("vars: a, b\na[i] = a[i-1]^2 + b[i-1] - 1\nb[i] = a[i-1]*b[i-1]", Mode::Exact);
  CHECK(fixed_points(offset).empty());
  FixedPointOptions opts;
  opts.candidates = {{q(1), q(1)}, {q(1), q(0)}, {q(2), q(2)}};
  fp = fixed_points(offset, opts);
  // only (1, 1) satisfies both equations
  REQUIRE(fp.size() == 1);
  CHECK(fp[0] == std::vector<Scalar>{q(1), q(1)});
}

TEST_CASE("float Newton fixed points satisfy F(B) = B") {
  PolySystem s = parse_system("vars: a, b\na[i] = 1/2*a[i-1] + 1/10 + 1/4*b[i-1]^2\nb[i] = a[i-1]^2 - 1/3*b[i-1] + 1/5",
                              Mode::Float);
  auto fp = fixed_points(s);
  REQUIRE(!fp.empty());
  for (const auto& b : fp) {
    auto img = step(s, b);
    for (std::size_t p = 0; p < 2; ++p) CHECK(std::abs(img[p].to_complex() - b[p].to_complex()) <= 1e-9);
  }
  for (std::size_t i = 1; i < fp.size(); ++i) CHECK_FALSE(shift_policy_less(fp[i], fp[i - 1]));
}

TEST_CASE("shifting the cubic example") {
  PolySystem cubic = parse_system("vars: u\nu[i] = u[i-1]^3 + 2*u[i-1]^2 + u[i-1]", Mode::Exact);
  PolySystem shifted = apply_affine(cubic, TransformParams::shift({q(-2)}));
  CHECK(shifted.equations[0] == poly(1, {{{3}, q(1)}, {{2}, q(-4)}, {{1}, q(5)}}));
  CHECK(pretty_print_equations(shifted) == "u[i] = u[i-1]^3 - 4*u[i-1]^2 + 5*u[i-1]\n");
}

TEST_CASE("linear transform of the coupled example") {
  PolySystem s = parse_system(kCoupled, Mode::Exact);
  PolySystem t = apply_affine(s, TransformParams::linear(qmatrix({{1, 2}, {-3, -5}})));
  CoeffArrays arr = coeff_arrays(t);
  CHECK(arr.constant == std::vector<Scalar>{q(0), q(0)});
  CHECK(arr.linear == qmatrix({{2, 0}, {0, 3}}));
  auto c2 = [&](std::size_t p, std::size_t l1, std::size_t l2) { return coeff_entry(arr, p, {l1, l2}); };
  CHECK(c2(0, 0, 0) == q(87));
  CHECK(c2(0, 0, 1) == q(67));
  CHECK(c2(0, 1, 0) == q(0));
  CHECK(c2(0, 1, 1) == q(13));
  CHECK(c2(1, 0, 0) == q(-212));
  CHECK(c2(1, 0, 1) == q(-164));
  CHECK(c2(1, 1, 0) == q(0));
  CHECK(c2(1, 1, 1) == q(-32));
  CHECK(symmetrized_entry(arr, 0, {0, 1}) == q(67, 2));
  CHECK(symmetrized_entry(arr, 0, {1, 0}) == q(67, 2));
  CHECK(from_coeff_arrays(arr, Mode::Exact).same_equations(t));
}

TEST_CASE("identity transform leaves the system unchanged") {
  PolySystem s = parse_system(kCoupled, Mode::Exact);
  CHECK(apply_affine(s, TransformParams::identity(2, Mode::Exact)).same_equations(s));
}

TEST_CASE("singular transforms are rejected") {
  CHECK_THROWS_AS(TransformParams(qmatrix({{1, 2}, {2, 4}}), {q(0), q(0)}), Error);
  try {
    TransformParams(qmatrix({{1, 2}, {2, 4}}), {q(0), q(0)});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SingularTransform);
  }
}

TEST_CASE("transform parameters compose and invert") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    std::size_t k = static_cast<std::size_t>(rng.integer(1, 3));
    std::vector<Scalar> b1, b2, z;
    for (std::size_t i = 0; i < k; ++i) {
      b1.push_back(rng.rational(3));
      b2.push_back(rng.rational(3));
      z.push_back(rng.rational(5));
    }
    TransformParams t1(random_invertible(rng, k), b1);
    TransformParams t2(random_invertible(rng, k), b2);
    CHECK(t1.then(t2).to_transformed(z) == t2.to_transformed(t1.to_transformed(z)));
    CHECK(t1.inverse().to_transformed(t1.to_transformed(z)) == z);
    CHECK(t1.to_original(t1.to_transformed(z)) == z);
  }
}

TEST_CASE("apply_affine is invertible and conjugates the dynamics") {
  Rng rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    std::size_t k = static_cast<std::size_t>(rng.integer(1, 3));
    PolySystem s = random_depth_one(rng, k, true);
    std::vector<Scalar> b;
    for (std::size_t i = 0; i < k; ++i) b.push_back(rng.rational(3));
    TransformParams t(random_invertible(rng, k), b);
    PolySystem forward = apply_affine(s, t);
    CHECK(apply_affine(forward, t.inverse()).same_equations(s));

    std::vector<Scalar> z;
    for (std::size_t i = 0; i < k; ++i) z.push_back(rng.rational(4));
    CHECK(step(forward, t.to_transformed(z)) == t.to_transformed(step(s, z)));
  }
}

TEST_CASE("shifting by a fixed point removes the constant terms") {
  PolySystem logistic = parse_system("vars: u\nu[i] = 2*u[i-1] - 2*u[i-1]^2", Mode::Exact);
  PolySystem s = apply_affine(logistic, TransformParams::shift({q(1, 2)}));
  CHECK(has_zero_constant_terms(s));
  CHECK(s.equations[0] == poly(1, {{{2}, q(-2)}}));

  PolySystem offset = parse_system("vars: a, b\na[i] = a[i-1]^2 + b[i-1] - 1\nb[i] = a[i-1]*b[i-1]", Mode::Exact);
  CHECK(has_zero_constant_terms(apply_affine(offset, TransformParams::shift({q(1), q(1)}))));

  PolySystem fl = parse_system("vars: a, b\na[i] = 1/2*a[i-1] + 1/10 + 1/4*b[i-1]^2\nb[i] = a[i-1]^2 - 1/3*b[i-1] + 1/5",
                               Mode::Float);
  auto fp = fixed_points(fl);
  REQUIRE(!fp.empty());
  PolySystem shifted = apply_affine(fl, TransformParams::shift(fp[0]));
  for (const auto& c : shifted.constant_terms()) CHECK(c.abs() <= 1e-9);
}

TEST_CASE("coefficient arrays round trip") {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    PolySystem s = random_depth_one(rng, static_cast<std::size_t>(rng.integer(1, 3)), true);
    CoeffArrays arr = coeff_arrays(s);
    CHECK(from_coeff_arrays(arr, Mode::Exact).same_equations(s));
    for (const auto& [deg, entries] : arr.higher) {
      for (const auto& [idx, vals] : entries) CHECK(std::is_sorted(idx.begin(), idx.end()));
    }
  }
}

TEST_CASE("admissibility examples") {
  PolySystem logistic = parse_system("vars: u\nu[i] = 2*u[i-1] - 2*u[i-1]^2", Mode::Exact);
  auto rep = check_shift_admissible(logistic, 6);
  CHECK(rep.passed);
  CHECK(rep.eigenvalues == std::vector<Scalar>{q(2)});
  CHECK(rep.root_of_unity == false);

  auto coupled = apply_affine(parse_system(kCoupled, Mode::Exact), TransformParams::linear(qmatrix({{1, 2}, {-3, -5}})));
  rep = check_shift_admissible(coupled, 2);
  CHECK(rep.passed);
  CHECK(rep.eigenvalues == std::vector<Scalar>{q(2), q(3)});
  REQUIRE(rep.two_variable_condition.has_value());

  PolySystem cubic = parse_system("vars: u\nu[i] = u[i-1]^3 + 2*u[i-1]^2 + u[i-1]", Mode::Exact);
  rep = check_shift_admissible(cubic, 3);
  CHECK_FALSE(rep.passed);
  CHECK(rep.root_of_unity == true);
  REQUIRE(rep.collision.has_value());
  CHECK(rep.collision->first.degree() != rep.collision->second.degree());

  rep = check_shift_admissible(apply_affine(cubic, TransformParams::shift({q(-2)})), 3);
  CHECK(rep.passed);
  CHECK(rep.eigenvalues == std::vector<Scalar>{q(5)});

  PolySystem flip = parse_system("vars: u\nu[i] = -u[i-1] + u[i-1]^2", Mode::Exact);
  rep = check_shift_admissible(flip, 3);
  CHECK_FALSE(rep.passed);
  CHECK(rep.root_of_unity == true);

  CHECK_THROWS_AS(check_shift_admissible(parse_system("vars: u\nu[i] = u[i-1] + 1", Mode::Exact), 3), Error);
}

TEST_CASE("triangularize_linear on the coupled linear part") {
  PolySystem s = parse_system(kCoupled, Mode::Exact);
  auto [t, params] = triangularize_linear(s);
  Matrix c = t.linear_part();
  CHECK(c.is_upper_triangular());
  auto d = c.diagonal();
  std::sort(d.begin(), d.end(), scalar_less);
  CHECK(d == std::vector<Scalar>{q(2), q(3)});
  CHECK(apply_affine(s, params).same_equations(t));
}

TEST_CASE("triangularize_linear keeps triangular and handles swaps") {
  PolySystem diag = parse_system("vars: a, b\na[i] = 2*a[i-1] + b[i-1]^2\nb[i] = 3*b[i-1]", Mode::Exact);
  auto [same, id] = triangularize_linear(diag);
  CHECK(id.is_identity());
  CHECK(same.same_equations(diag));

  PolySystem swap = parse_system("vars: a, b\na[i] = b[i-1]\nb[i] = a[i-1]", Mode::Exact);
  auto [t, params] = triangularize_linear(swap);
  CHECK(t.linear_part().is_upper_triangular());
  auto d = t.linear_part().diagonal();
  std::sort(d.begin(), d.end(), scalar_less);
  CHECK(d == std::vector<Scalar>{q(-1), q(1)});
}

TEST_CASE("exact triangularization needs rational eigenvalues") {
  PolySystem fib = reduce_depth(parse_system("vars: u\nu[i] = u[i-1] + u[i-2]", Mode::Exact));
  try {
    (void)triangularize_linear(fib);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TriangularizationUnavailable);
  }
}

TEST_CASE("float triangularization of random linear parts") {
  Rng rng(17);
  for (int trial = 0; trial < 40; ++trial) {
    std::size_t k = static_cast<std::size_t>(rng.integer(2, 3));
    std::vector<Poly> eqs;
    for (std::size_t p = 0; p < k; ++p) {
      Poly e(k, Mode::Float);
      for (std::size_t l = 0; l < k; ++l) e.add_term(Monomial::unit(k, l), f(rng.real(-2, 2)));
      if (rng.coin()) e.add_term(rng.monomial(k, 3, 2), f(rng.real(-1, 1)));
      eqs.push_back(std::move(e));
    }
    PolySystem s = make_system(std::move(eqs), 1);
    auto [t, params] = triangularize_linear(s);
    Matrix c = t.linear_part();
    CHECK(c.max_below_diagonal() <= 1e-10 * std::max(1.0, s.linear_part().max_abs()));
    Matrix back = params.a() * s.linear_part() * params.a_inv();
    CHECK(approx_equal(back, c, 1e-9));
  }
}
