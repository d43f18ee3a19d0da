#pragma once

// Exact univariate algebra over Q: rationals, polynomials and reduced
// rational functions with monic denominators.

#include <gmpxx.h>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "klab/errors.hpp"

namespace klab {

using Rational = mpq_class;

// Accepts "p/q", integers and decimals with optional exponent ("-1.25e-3").
// Decimals are converted exactly.
Rational parse_rational(std::string_view text);
std::string to_string(const Rational& q);
double to_double(const Rational& q);

Rational binom(unsigned n, unsigned k);

class Poly {
 public:
  Poly() = default;
  explicit Poly(std::vector<Rational> coeffs);
  Poly(std::initializer_list<Rational> coeffs);

  static Poly constant(const Rational& c);
  static Poly monomial(const Rational& c, int degree);
  static Poly x();

  int degree() const { return static_cast<int>(c_.size()) - 1; }
  bool is_zero() const { return c_.empty(); }
  const std::vector<Rational>& coeffs() const { return c_; }
  Rational coeff(int i) const;
  const Rational& lead() const { return c_.back(); }

  Rational eval(const Rational& x) const;
  double eval(double x) const;
  Poly derivative() const;
  Poly monic() const;
  Poly pow(unsigned e) const;

  Poly operator-() const;
  Poly& operator+=(const Poly& o);
  Poly& operator-=(const Poly& o);
  Poly& operator*=(const Rational& s);

  friend Poly operator+(Poly a, const Poly& b) { return a += b; }
  friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
  friend Poly operator*(const Poly& a, const Poly& b);
  friend Poly operator*(Poly a, const Rational& s) { return a *= s; }
  friend Poly operator*(const Rational& s, Poly a) { return a *= s; }
  friend bool operator==(const Poly& a, const Poly& b) { return a.c_ == b.c_; }

  // a = q*b + r with deg r < deg b. b must be nonzero.
  static void divmod(const Poly& a, const Poly& b, Poly& q, Poly& r);
  // Monic gcd; gcd(0, 0) = 0.
  static Poly gcd(Poly a, Poly b);

  std::string str(char var = 't') const;

 private:
  void trim();
  std::vector<Rational> c_;
};

class RatFunc {
 public:
  RatFunc() : den_(Poly::constant(1)) {}
  RatFunc(const Rational& c);  // NOLINT(implicit)
  RatFunc(long c) : RatFunc(Rational(c)) {}  // NOLINT(implicit)
  RatFunc(int c) : RatFunc(Rational(c)) {}   // NOLINT(implicit)
  explicit RatFunc(Poly num);
  RatFunc(Poly num, Poly den);

  static RatFunc var();

  const Poly& num() const { return num_; }
  const Poly& den() const { return den_; }
  bool is_zero() const { return num_.is_zero(); }
  bool is_constant() const { return num_.degree() <= 0 && den_.degree() == 0; }
  std::optional<Rational> constant_value() const;

  Rational eval(const Rational& x) const;
  double eval(double x) const;
  RatFunc derivative() const;
  RatFunc compose(const RatFunc& g) const;
  RatFunc pow(int e) const;

  RatFunc operator-() const;
  friend RatFunc operator+(const RatFunc& a, const RatFunc& b);
  friend RatFunc operator-(const RatFunc& a, const RatFunc& b);
  friend RatFunc operator*(const RatFunc& a, const RatFunc& b);
  friend RatFunc operator/(const RatFunc& a, const RatFunc& b);
  RatFunc& operator+=(const RatFunc& o) { return *this = *this + o; }
  RatFunc& operator-=(const RatFunc& o) { return *this = *this - o; }
  RatFunc& operator*=(const RatFunc& o) { return *this = *this * o; }
  friend bool operator==(const RatFunc& a, const RatFunc& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }

  // Largest |coefficient| of the numerator, as a double. Zero iff the function is zero.
  double magnitude() const;
  std::string str(char var = 't') const;

 private:
  struct Raw {};
  RatFunc(Poly num, Poly den, Raw) : num_(std::move(num)), den_(std::move(den)) {}
  void normalize();
  Poly num_;
  Poly den_;
};

// Binary64 snapshot of a RatFunc for fast repeated evaluation.
struct RatFuncD {
  std::vector<double> num;
  std::vector<double> den;
  RatFuncD() : den{1.0} {}
  explicit RatFuncD(const RatFunc& f);
  double operator()(double x) const;
};

enum class ArithOp { Add, Sub, Mul, Div };

RatFunc rf_arith(const RatFunc& lhs, const RatFunc& rhs, ArithOp op);
inline RatFunc rf_diff(const RatFunc& f) { return f.derivative(); }
inline Rational rf_eval(const RatFunc& f, const Rational& x) { return f.eval(x); }
inline RatFunc rf_compose(const RatFunc& f, const RatFunc& g) { return f.compose(g); }

}  // namespace klab
