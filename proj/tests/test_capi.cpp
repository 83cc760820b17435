#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "carleman.h"

namespace {

const char* kCoupled =
    "vars: u, v\n"
    "u[i] = 8*u[i-1] + 10*v[i-1] + u[i-1]^2 + 3*u[i-1]*v[i-1] + v[i-1]^2\n"
    "v[i] = -3*u[i-1] - 3*v[i-1] + u[i-1]^2 - u[i-1]*v[i-1] + v[i-1]^2";

std::string take(char* s) {
  std::string out = s ? s : "";
  crl_string_free(s);
  return out;
}

struct System {
  crl_system* p = nullptr;
  ~System() { crl_system_free(p); }
};
struct Options {
  crl_options* p = nullptr;
  ~Options() { crl_options_free(p); }
};
struct Solution {
  crl_solution* p = nullptr;
  ~Solution() { crl_solution_free(p); }
};

}  // namespace

TEST_CASE("parse, render and inspect") {
  System s;
  REQUIRE(crl_system_parse(kCoupled, "exact", &s.p) == CRL_OK);
  CHECK(crl_system_variable_count(s.p) == 2);
  CHECK(crl_system_depth(s.p) == 1);
  char* text = nullptr;
  REQUIRE(crl_system_render(s.p, &text) == CRL_OK);
  CHECK(take(text).find("vars: u, v") == 0);
  CHECK(std::string(crl_version()).size() > 0);
}

TEST_CASE("parse errors") {
  System s;
  CHECK(crl_system_parse("vars: u\nu[i] = u[i-1]/2", "exact", &s.p) == CRL_PARSE_ERROR);
  CHECK(s.p == nullptr);
  CHECK(std::string(crl_last_error()).find("2:") != std::string::npos);
  CHECK(std::string(crl_last_error_stage()) == "parse");
  CHECK(crl_system_parse("vars: u\nu[i] = u[i-1]", "bogus", &s.p) == CRL_USAGE_ERROR);
  CHECK(crl_system_parse(nullptr, "exact", &s.p) == CRL_USAGE_ERROR);
}

TEST_CASE("solve and render") {
  System s;
  Options o;
  Solution sol;
  REQUIRE(crl_system_parse(kCoupled, "exact", &s.p) == CRL_OK);
  REQUIRE(crl_options_new(&o.p) == CRL_OK);
  CHECK(crl_options_set_order(o.p, 2) == CRL_OK);
  CHECK(crl_options_set_matrix_a(o.p, "[[1,2],[-3,-5]]") == CRL_OK);
  REQUIRE(crl_solve(s.p, o.p, &sol.p) == CRL_OK);
  char* out = nullptr;
  REQUIRE(crl_solution_render(sol.p, "text", &out) == CRL_OK);
  CHECK(take(out).find("-5*2^i + 6*3^i") != std::string::npos);
  REQUIRE(crl_solution_render(sol.p, "json", &out) == CRL_OK);
  std::string json = take(out);
  CHECK(json.find("\"1395/28\"") != std::string::npos);

  Solution again;
  REQUIRE(crl_solution_from_json(json.c_str(), &again.p) == CRL_OK);
  REQUIRE(crl_solution_render(again.p, "json", &out) == CRL_OK);
  CHECK(take(out) == json);

  REQUIRE(crl_verify_report(s.p, again.p, o.p, "text", &out) == CRL_OK);
  CHECK(take(out).find("PASS") != std::string::npos);
  REQUIRE(crl_matrix_report(s.p, o.p, "json", &out) == CRL_OK);
  CHECK(take(out).find("\"-212\"") != std::string::npos);
  REQUIRE(crl_eval_report(s.p, sol.p, 0, "1/10, 1/5", "text", &out) == CRL_OK);
  CHECK(take(out).find("1/10") != std::string::npos);
}

TEST_CASE("solver and verification failures") {
  System s;
  Options o;
  Solution sol;
  REQUIRE(crl_system_parse("vars: u\nu[i] = u[i-1]^3 + 2*u[i-1]^2 + u[i-1]", "exact", &s.p) == CRL_OK);
  REQUIRE(crl_options_new(&o.p) == CRL_OK);
  CHECK(crl_options_set_shift(o.p, "none") == CRL_OK);
  CHECK(crl_solve(s.p, o.p, &sol.p) == CRL_SOLVER_ERROR);
  CHECK(sol.p == nullptr);
  CHECK(std::string(crl_last_error_stage()) == "admissibility");
  CHECK(crl_options_set_shift(o.p, "-2") == CRL_OK);
  CHECK(crl_options_set_order(o.p, 3) == CRL_OK);
  REQUIRE(crl_solve(s.p, o.p, &sol.p) == CRL_OK);
  char* out = nullptr;
  REQUIRE(crl_transform_report(s.p, o.p, "text", &out) == CRL_OK);
  CHECK(take(out).find("5*u[i-1]") != std::string::npos);

  CHECK(crl_options_set_shift(o.p, "1/0") != CRL_OK);
  CHECK(crl_options_set_matrix_a(o.p, "[[1,") == CRL_USAGE_ERROR);
  CHECK(crl_options_set_order(o.p, 0) == CRL_USAGE_ERROR);

  // a solution for a different system fails verification but still yields a report
  System other;
  Solution wrong;
  REQUIRE(crl_system_parse("vars: u\nu[i] = 2*u[i-1] - 2*u[i-1]^2", "exact", &other.p) == CRL_OK);
  CHECK(crl_options_set_shift(o.p, "auto") == CRL_OK);
  REQUIRE(crl_solve(other.p, o.p, &wrong.p) == CRL_OK);
  out = nullptr;
  CHECK(crl_verify_report(s.p, wrong.p, o.p, "text", &out) != CRL_OK);
}
