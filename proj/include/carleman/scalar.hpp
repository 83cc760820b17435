#pragma once

#include <gmpxx.h>

#include <complex>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>

#include "carleman/error.hpp"

namespace carleman {

/// Arithmetic mode of a whole pipeline run. Values of different modes never
/// meet in one operation.
enum class Mode { Exact, Float };

const char* mode_name(Mode mode);
Mode parse_mode(std::string_view text);

/// Either an exact rational (GMP) or a complex double.
class Scalar {
 public:
  using Rational = mpq_class;
  using Complex = std::complex<double>;

  Scalar() : value_(Rational(0)) {}
  explicit Scalar(Mode mode);
  Scalar(Rational q);
  Scalar(Complex c);

  static Scalar from_int(long v, Mode mode);
  static Scalar from_rational(const Rational& q, Mode mode);
  static Scalar zero(Mode mode) { return Scalar(mode); }
  static Scalar one(Mode mode) { return from_int(1, mode); }

  /// Accepts "p", "p/q", and decimals "[-]d.ddd". Float mode also accepts
  /// anything strtod accepts for a real number.
  static Scalar parse(std::string_view text, Mode mode);

  Mode mode() const noexcept {
    return std::holds_alternative<Rational>(value_) ? Mode::Exact : Mode::Float;
  }
  bool is_exact() const noexcept { return mode() == Mode::Exact; }
  bool is_zero() const;
  bool is_one() const;

  const Rational& rational() const;
  Complex to_complex() const;
  double abs() const;
  bool is_finite() const;

  Scalar operator-() const;
  Scalar& operator+=(const Scalar& o);
  Scalar& operator-=(const Scalar& o);
  Scalar& operator*=(const Scalar& o);
  Scalar& operator/=(const Scalar& o);

  friend Scalar operator+(Scalar a, const Scalar& b) { return a += b; }
  friend Scalar operator-(Scalar a, const Scalar& b) { return a -= b; }
  friend Scalar operator*(Scalar a, const Scalar& b) { return a *= b; }
  friend Scalar operator/(Scalar a, const Scalar& b) { return a /= b; }

  /// Bit-exact equality; values of different modes compare unequal.
  friend bool operator==(const Scalar& a, const Scalar& b);
  friend bool operator!=(const Scalar& a, const Scalar& b) { return !(a == b); }

  Scalar pow(std::uint64_t e) const;
  Scalar reciprocal() const;

  /// Exact: "p" or "p/q". Float: shortest round-trip real, or "re+imi".
  std::string str() const;

 private:
  void require_same_mode(const Scalar& o) const;
  std::variant<Rational, Complex> value_;
};

/// Total order for exact scalars (numeric); for float scalars orders by
/// magnitude, then phase, then real part.
bool scalar_less(const Scalar& a, const Scalar& b);

/// |a - b| <= tol * max(1, |a|, |b|).
bool approx_equal(const Scalar& a, const Scalar& b, double tol);

std::string format_double(double v);

}  // namespace carleman
