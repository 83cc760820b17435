#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "carleman/error.hpp"
#include "carleman/recurrence.hpp"

namespace carleman {

struct ExprNode {
  enum class Kind { Number, Variable, Add, Sub, Mul, Pow, Neg };

  Kind kind = Kind::Number;
  SourceSpan span;
  std::string literal;       // Number: "3", "1/3", "0.25"
  std::size_t variable = 0;  // Variable: declaration index
  std::size_t lag = 0;       // Variable: j in var[i-j]
  unsigned exponent = 0;     // Pow
  std::vector<std::unique_ptr<ExprNode>> children;
};

struct Equation {
  std::size_t variable = 0;
  SourceSpan span;
  std::unique_ptr<ExprNode> rhs;
};

struct RecurrenceAst {
  std::vector<std::string> variables;
  std::vector<SourceSpan> variable_spans;
  /// Ordered by declaration, one per variable.
  std::vector<Equation> equations;
  /// Largest lag referenced, at least 1.
  std::size_t depth = 1;
};

/// Parses the `.rec` recurrence format. Every error carries a SourceSpan.
RecurrenceAst parse(std::string_view text);

/// Expands each right-hand side into a polynomial over the n*k lagged values.
PolySystem lower(const RecurrenceAst& ast, Mode mode);

/// parse + lower.
PolySystem parse_system(std::string_view text, Mode mode);

/// Canonical `.rec` text; parse_system(pretty_print(s)) reproduces s.
std::string pretty_print(const PolySystem& system);

/// Only the equation lines, without the header.
std::string pretty_print_equations(const PolySystem& system);

}  // namespace carleman
