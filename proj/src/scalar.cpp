#include "carleman/scalar.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>

namespace carleman {

const char* mode_name(Mode mode) { return mode == Mode::Exact ? "exact" : "float"; }

Mode parse_mode(std::string_view text) {
  if (text == "exact") return Mode::Exact;
  if (text == "float") return Mode::Float;
  throw Error(ErrorCode::InvalidArgument,
              "unknown mode '" + std::string(text) + "' (expected exact|float)");
}

Scalar::Scalar(Mode mode) {
  if (mode == Mode::Exact) {
    value_ = Rational(0);
  } else {
    value_ = Complex(0.0, 0.0);
  }
}

Scalar::Scalar(Rational q) : value_(std::move(q)) {
  std::get<Rational>(value_).canonicalize();
}

Scalar::Scalar(Complex c) : value_(c) {}

Scalar Scalar::from_int(long v, Mode mode) {
  if (mode == Mode::Exact) return Scalar(Rational(v));
  return Scalar(Complex(static_cast<double>(v), 0.0));
}

Scalar Scalar::from_rational(const Rational& q, Mode mode) {
  if (mode == Mode::Exact) return Scalar(q);
  // mpq_get_d truncates; go through the decimal string for correct rounding
  // when the value has a short exact expansion, else divide doubles.
  if (q.get_den() == 1 && mpz_sizeinbase(q.get_num_mpz_t(), 2) <= 53) {
    return Scalar(Complex(q.get_num().get_d(), 0.0));
  }
  if (mpz_sizeinbase(q.get_num_mpz_t(), 2) <= 53 &&
      mpz_sizeinbase(q.get_den_mpz_t(), 2) <= 53) {
    return Scalar(Complex(q.get_num().get_d() / q.get_den().get_d(), 0.0));
  }
  return Scalar(Complex(q.get_d(), 0.0));
}

namespace {

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

Scalar::Rational parse_rational(std::string_view text) {
  std::string_view body = text;
  bool negative = false;
  if (!body.empty() && (body.front() == '-' || body.front() == '+')) {
    negative = body.front() == '-';
    body.remove_prefix(1);
  }
  Scalar::Rational q;
  if (auto slash = body.find('/'); slash != std::string_view::npos) {
    auto num = body.substr(0, slash);
    auto den = body.substr(slash + 1);
    if (!all_digits(num) || !all_digits(den)) {
      throw Error(ErrorCode::InvalidArgument, "malformed rational '" + std::string(text) + "'");
    }
    mpz_class d{std::string(den)};
    if (d == 0) throw Error(ErrorCode::DivisionByZero, "zero denominator in '" + std::string(text) + "'");
    q = Scalar::Rational(mpz_class(std::string(num)), d);
  } else if (auto dot = body.find('.'); dot != std::string_view::npos) {
    auto whole = body.substr(0, dot);
    auto frac = body.substr(dot + 1);
    if ((!whole.empty() && !all_digits(whole)) || !all_digits(frac)) {
      throw Error(ErrorCode::InvalidArgument, "malformed decimal '" + std::string(text) + "'");
    }
    mpz_class scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, frac.size());
    mpz_class digits(std::string(whole.empty() ? "0" : whole) + std::string(frac));
    q = Scalar::Rational(digits, scale);
  } else {
    if (!all_digits(body)) {
      throw Error(ErrorCode::InvalidArgument, "malformed number '" + std::string(text) + "'");
    }
    q = Scalar::Rational(mpz_class(std::string(body)));
  }
  q.canonicalize();
  return negative ? Scalar::Rational(-q) : q;
}

}  // namespace

Scalar Scalar::parse(std::string_view text, Mode mode) {
  if (mode == Mode::Exact) return Scalar(parse_rational(text));
  if (text.find('/') != std::string_view::npos) {
    auto q = parse_rational(text);
    return from_rational(q, Mode::Float);
  }
  std::string owned(text);
  char* end = nullptr;
  double v = std::strtod(owned.c_str(), &end);
  if (owned.empty() || end != owned.c_str() + owned.size() || !std::isfinite(v)) {
    throw Error(ErrorCode::InvalidArgument, "malformed number '" + owned + "'");
  }
  return Scalar(Complex(v, 0.0));
}

void Scalar::require_same_mode(const Scalar& o) const {
  if (mode() != o.mode()) {
    throw Error(ErrorCode::ModeMismatch, "exact and float scalars mixed in one operation");
  }
}

bool Scalar::is_zero() const {
  if (auto* q = std::get_if<Rational>(&value_)) return sgn(*q) == 0;
  return std::get<Complex>(value_) == Complex(0.0, 0.0);
}

bool Scalar::is_one() const {
  if (auto* q = std::get_if<Rational>(&value_)) return *q == 1;
  return std::get<Complex>(value_) == Complex(1.0, 0.0);
}

const Scalar::Rational& Scalar::rational() const {
  if (auto* q = std::get_if<Rational>(&value_)) return *q;
  throw Error(ErrorCode::ModeMismatch, "rational value requested from a float scalar");
}

Scalar::Complex Scalar::to_complex() const {
  if (auto* q = std::get_if<Rational>(&value_)) return {q->get_d(), 0.0};
  return std::get<Complex>(value_);
}

double Scalar::abs() const {
  if (auto* q = std::get_if<Rational>(&value_)) return std::fabs(q->get_d());
  return std::abs(std::get<Complex>(value_));
}

bool Scalar::is_finite() const {
  if (is_exact()) return true;
  auto c = std::get<Complex>(value_);
  return std::isfinite(c.real()) && std::isfinite(c.imag());
}

Scalar Scalar::operator-() const {
  if (auto* q = std::get_if<Rational>(&value_)) return Scalar(Rational(-*q));
  return Scalar(-std::get<Complex>(value_));
}

Scalar& Scalar::operator+=(const Scalar& o) {
  require_same_mode(o);
  if (auto* q = std::get_if<Rational>(&value_)) {
    *q += std::get<Rational>(o.value_);
  } else {
    std::get<Complex>(value_) += std::get<Complex>(o.value_);
  }
  return *this;
}

Scalar& Scalar::operator-=(const Scalar& o) {
  require_same_mode(o);
  if (auto* q = std::get_if<Rational>(&value_)) {
    *q -= std::get<Rational>(o.value_);
  } else {
    std::get<Complex>(value_) -= std::get<Complex>(o.value_);
  }
  return *this;
}

Scalar& Scalar::operator*=(const Scalar& o) {
  require_same_mode(o);
  if (auto* q = std::get_if<Rational>(&value_)) {
    *q *= std::get<Rational>(o.value_);
  } else {
    std::get<Complex>(value_) *= std::get<Complex>(o.value_);
  }
  return *this;
}

Scalar& Scalar::operator/=(const Scalar& o) {
  require_same_mode(o);
  if (o.is_zero()) throw Error(ErrorCode::DivisionByZero, "division by zero");
  if (auto* q = std::get_if<Rational>(&value_)) {
    *q /= std::get<Rational>(o.value_);
  } else {
    std::get<Complex>(value_) /= std::get<Complex>(o.value_);
  }
  return *this;
}

bool operator==(const Scalar& a, const Scalar& b) {
  if (a.mode() != b.mode()) return false;
  if (a.is_exact()) return std::get<Scalar::Rational>(a.value_) == std::get<Scalar::Rational>(b.value_);
  return std::get<Scalar::Complex>(a.value_) == std::get<Scalar::Complex>(b.value_);
}

Scalar Scalar::pow(std::uint64_t e) const {
  if (auto* q = std::get_if<Rational>(&value_)) {
    Rational r;
    mpz_pow_ui(r.get_num_mpz_t(), q->get_num_mpz_t(), e);
    mpz_pow_ui(r.get_den_mpz_t(), q->get_den_mpz_t(), e);
    return Scalar(r);
  }
  Complex base = std::get<Complex>(value_);
  Complex acc(1.0, 0.0);
  while (e > 0) {
    if (e & 1U) acc *= base;
    base *= base;
    e >>= 1U;
  }
  return Scalar(acc);
}

Scalar Scalar::reciprocal() const { return Scalar::one(mode()) / *this; }

std::string format_double(double v) {
  if (v == 0.0) return "0";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) return std::to_string(v);
  return std::string(buf, ptr);
}

std::string Scalar::str() const {
  if (auto* q = std::get_if<Rational>(&value_)) return q->get_str();
  auto c = std::get<Complex>(value_);
  if (c.imag() == 0.0) return format_double(c.real());
  std::string im = format_double(c.imag());
  if (c.real() == 0.0) return im + "i";
  return format_double(c.real()) + (c.imag() < 0 ? "" : "+") + im + "i";
}

bool scalar_less(const Scalar& a, const Scalar& b) {
  if (a.is_exact() && b.is_exact()) return a.rational() < b.rational();
  auto ca = a.to_complex();
  auto cb = b.to_complex();
  double ma = std::abs(ca), mb = std::abs(cb);
  if (ma != mb) return ma < mb;
  double pa = std::arg(ca), pb = std::arg(cb);
  if (pa != pb) return pa < pb;
  return ca.real() < cb.real();
}

bool approx_equal(const Scalar& a, const Scalar& b, double tol) {
  if (a.is_exact() && b.is_exact()) return a == b;
  auto ca = a.to_complex();
  auto cb = b.to_complex();
  double scale = std::max({1.0, std::abs(ca), std::abs(cb)});
  return std::abs(ca - cb) <= tol * scale;
}

}  // namespace carleman
