#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace carleman {

/// Byte range plus 1-based line/column of its start.
struct SourceSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::size_t line = 1;
  std::size_t column = 1;
};

enum class ErrorCode {
  // input / parse family
  Syntax,
  UndeclaredVariable,
  InvalidLag,
  NonIntegerExponent,
  DuplicateEquation,
  MissingEquation,
  NonPolynomial,
  // arithmetic / structural
  Arity,
  ModeMismatch,
  DivisionByZero,
  ZeroPolynomial,
  NonFinite,
  SizeLimit,
  InvalidArgument,
  // solver stages
  ShiftNotFound,
  NotShifted,
  SingularTransform,
  TriangularizationUnavailable,
  NotTriangular,
  RepeatedEigenvalue,
};

/// Coarse grouping used to map errors onto process exit codes.
enum class ErrorFamily { Parse, Solver, Usage };

ErrorFamily family_of(ErrorCode code);
const char* code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message, std::string stage = {},
        std::optional<SourceSpan> span = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  const std::string& stage() const noexcept { return stage_; }
  const std::optional<SourceSpan>& span() const noexcept { return span_; }
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string stage_;
  std::optional<SourceSpan> span_;
  std::string message_;
};

/// Re-throws `e` with `stage` attached unless it already names one.
[[noreturn]] void rethrow_with_stage(const Error& e, const std::string& stage);

}  // namespace carleman
