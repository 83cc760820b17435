#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "carleman/carleman.hpp"
#include "carleman/solver.hpp"

namespace carleman {

enum class Format { Text, Json };
Format parse_format(std::string_view text);

/// JSON value text for a scalar: exact as "p/q" string, float as [re, im].
std::string scalar_to_json(const Scalar& s);
/// Accepts "p/q" strings, JSON numbers and [re, im] pairs.
Scalar scalar_from_json(std::string_view json, Mode mode);
Matrix matrix_from_json(std::string_view json, Mode mode);
/// Comma-separated scalars such as "1/2, -3".
std::vector<Scalar> parse_scalar_list(std::string_view text, Mode mode);

std::string solution_to_json(const ClosedFormSolution& sol);
ClosedFormSolution solution_from_json(std::string_view json);

std::string render_solution(const ClosedFormSolution& sol, Format format);
std::string render_matrix(const CarlemanMatrix& m, Format format);
std::string render_verification(const VerificationReport& report, unsigned order, Format format);
std::string render_eval(unsigned step, const std::vector<std::string>& names, const std::vector<Scalar>& direct,
                        const std::vector<Scalar>& closed, Format format);
std::string render_transform(const PreparedSystem& prepared, Format format);

/// "u1[0]^2*u2[0]"; "1" for the constant monomial.
std::string initial_monomial_text(const Monomial& m, const std::vector<std::string>& names);

}  // namespace carleman
