#include "carleman/error.hpp"

namespace carleman {

namespace {

std::string compose(const std::string& stage, const std::string& message,
                    const std::optional<SourceSpan>& span) {
  std::string out;
  if (span) {
    out += std::to_string(span->line) + ":" + std::to_string(span->column) + ": ";
  }
  if (!stage.empty()) out += stage + ": ";
  out += message;
  return out;
}

}  // namespace

ErrorFamily family_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::Syntax:
    case ErrorCode::UndeclaredVariable:
    case ErrorCode::InvalidLag:
    case ErrorCode::NonIntegerExponent:
    case ErrorCode::DuplicateEquation:
    case ErrorCode::MissingEquation:
    case ErrorCode::NonPolynomial:
      return ErrorFamily::Parse;
    case ErrorCode::InvalidArgument:
      return ErrorFamily::Usage;
    default:
      return ErrorFamily::Solver;
  }
}

const char* code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::Syntax: return "syntax";
    case ErrorCode::UndeclaredVariable: return "undeclared-variable";
    case ErrorCode::InvalidLag: return "invalid-lag";
    case ErrorCode::NonIntegerExponent: return "non-integer-exponent";
    case ErrorCode::DuplicateEquation: return "duplicate-equation";
    case ErrorCode::MissingEquation: return "missing-equation";
    case ErrorCode::NonPolynomial: return "non-polynomial";
    case ErrorCode::Arity: return "arity";
    case ErrorCode::ModeMismatch: return "mode-mismatch";
    case ErrorCode::DivisionByZero: return "division-by-zero";
    case ErrorCode::ZeroPolynomial: return "zero-polynomial";
    case ErrorCode::NonFinite: return "non-finite";
    case ErrorCode::SizeLimit: return "size-limit";
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::ShiftNotFound: return "shift-not-found";
    case ErrorCode::NotShifted: return "not-shifted";
    case ErrorCode::SingularTransform: return "singular-transform";
    case ErrorCode::TriangularizationUnavailable: return "triangularization-unavailable";
    case ErrorCode::NotTriangular: return "not-triangular";
    case ErrorCode::RepeatedEigenvalue: return "repeated-eigenvalue";
  }
  return "unknown";
}

Error::Error(ErrorCode code, std::string message, std::string stage,
             std::optional<SourceSpan> span)
    : std::runtime_error(compose(stage, message, span)),
      code_(code),
      stage_(std::move(stage)),
      span_(span),
      message_(std::move(message)) {}

void rethrow_with_stage(const Error& e, const std::string& stage) {
  if (!e.stage().empty()) throw e;
  throw Error(e.code(), e.message(), stage, e.span());
}

}  // namespace carleman
