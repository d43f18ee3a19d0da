#include "klab/exactalg.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

namespace klab {

const char* error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::DivisionByZeroFunction: return "DivisionByZeroFunction";
    case ErrorCode::PoleEvaluation: return "PoleEvaluation";
    case ErrorCode::ConstantPoleComposition: return "ConstantPoleComposition";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::InvalidDimension: return "InvalidDimension";
    case ErrorCode::DegenerateParameters: return "DegenerateParameters";
    case ErrorCode::ZeroC: return "ZeroC";
    case ErrorCode::ZeroSigma: return "ZeroSigma";
    case ErrorCode::SingularityEncountered: return "SingularityEncountered";
    case ErrorCode::DomainViolation: return "DomainViolation";
    case ErrorCode::IllConditionedMetric: return "IllConditionedMetric";
    case ErrorCode::ZeroGradient: return "ZeroGradient";
    case ErrorCode::ZeroPotential: return "ZeroPotential";
    case ErrorCode::NonpositiveKappa: return "NonpositiveKappa";
    case ErrorCode::NonpositiveQ: return "NonpositiveQ";
    case ErrorCode::OutOfInterval: return "OutOfInterval";
    case ErrorCode::ParameterDomain: return "ParameterDomain";
    case ErrorCode::ConfigParse: return "ConfigParse";
    case ErrorCode::IoFailure: return "IoFailure";
  }
  return "UnknownError";
}

// ---- Rational helpers ----

Rational parse_rational(std::string_view text) {
  std::string s(text);
  s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char ch) { return std::isspace(ch); }),
          s.end());
  auto fail = [&]() -> Rational {
    throw Error(ErrorCode::ConfigParse, "not a rational number: '" + std::string(text) + "'");
  };
  if (s.empty()) return fail();

  if (auto slash = s.find('/'); slash != std::string::npos) {
    Rational p = parse_rational(s.substr(0, slash));
    Rational q = parse_rational(s.substr(slash + 1));
    if (q == 0) return fail();
    Rational r = p / q;
    r.canonicalize();
    return r;
  }

  size_t i = 0;
  bool neg = false;
  if (s[i] == '+' || s[i] == '-') {
    neg = s[i] == '-';
    ++i;
  }
  std::string digits;
  long frac_digits = 0;
  bool seen_dot = false;
  for (; i < s.size() && (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '.'); ++i) {
    if (s[i] == '.') {
      if (seen_dot) return fail();
      seen_dot = true;
    } else {
      digits += s[i];
      if (seen_dot) ++frac_digits;
    }
  }
  if (digits.empty()) return fail();
  long exponent = 0;
  if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
    std::string ex = s.substr(i + 1);
    if (ex.empty()) return fail();
    size_t used = 0;
    try {
      exponent = std::stol(ex, &used);
    } catch (...) {
      return fail();
    }
    if (used != ex.size() || std::labs(exponent) > 4000) return fail();
    i = s.size();
  }
  if (i != s.size()) return fail();

  mpz_class mant(digits, 10);
  long shift = exponent - frac_digits;
  mpz_class ten_pow;
  mpz_ui_pow_ui(ten_pow.get_mpz_t(), 10, static_cast<unsigned long>(std::labs(shift)));
  Rational r = shift >= 0 ? Rational(mant * ten_pow) : Rational(mant, ten_pow);
  r.canonicalize();
  return neg ? Rational(-r) : r;
}

std::string to_string(const Rational& q) { return q.get_str(); }

// mpq get_d truncates; pick the nearest binary64 among the truncation and its neighbours.
double to_double(const Rational& q) {
  const double x = q.get_d();
  if (!std::isfinite(x)) return x;
  double best = x;
  Rational err = abs(Rational(x) - q);
  for (double y : {std::nextafter(x, -HUGE_VAL), std::nextafter(x, HUGE_VAL)}) {
    if (!std::isfinite(y)) continue;
    Rational e = abs(Rational(y) - q);
    if (e < err) err = e, best = y;
  }
  return best;
}

Rational binom(unsigned n, unsigned k) {
  if (k > n) {
    throw Error(ErrorCode::IndexOutOfRange,
                "binom(" + std::to_string(n) + ", " + std::to_string(k) + ")");
  }
  mpz_class r;
  mpz_bin_uiui(r.get_mpz_t(), n, k);
  return Rational(r);
}

// ---- Poly ----

Poly::Poly(std::vector<Rational> coeffs) : c_(std::move(coeffs)) { trim(); }

Poly::Poly(std::initializer_list<Rational> coeffs) : c_(coeffs) { trim(); }

void Poly::trim() {
  while (!c_.empty() && c_.back() == 0) c_.pop_back();
}

Poly Poly::constant(const Rational& c) { return Poly(std::vector<Rational>{c}); }

Poly Poly::monomial(const Rational& c, int degree) {
  std::vector<Rational> v(static_cast<size_t>(degree) + 1);
  v.back() = c;
  return Poly(std::move(v));
}

Poly Poly::x() { return monomial(1, 1); }

Rational Poly::coeff(int i) const {
  if (i < 0 || i > degree()) return 0;
  return c_[static_cast<size_t>(i)];
}

Rational Poly::eval(const Rational& x) const {
  Rational acc = 0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + *it;
  return acc;
}

double Poly::eval(double x) const {
  double acc = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + it->get_d();
  return acc;
}

Poly Poly::derivative() const {
  if (c_.size() <= 1) return {};
  std::vector<Rational> d(c_.size() - 1);
  for (size_t i = 1; i < c_.size(); ++i) d[i - 1] = c_[i] * static_cast<long>(i);
  return Poly(std::move(d));
}

Poly Poly::monic() const {
  if (is_zero()) return {};
  Poly r = *this;
  Rational inv = 1 / lead();
  for (auto& c : r.c_) c *= inv;
  return r;
}

Poly Poly::pow(unsigned e) const {
  Poly result = constant(1);
  Poly base = *this;
  while (e) {
    if (e & 1u) result = result * base;
    e >>= 1;
    if (e) base = base * base;
  }
  return result;
}

Poly Poly::operator-() const {
  Poly r = *this;
  for (auto& c : r.c_) c = -c;
  return r;
}

Poly& Poly::operator+=(const Poly& o) {
  if (o.c_.size() > c_.size()) c_.resize(o.c_.size());
  for (size_t i = 0; i < o.c_.size(); ++i) c_[i] += o.c_[i];
  trim();
  return *this;
}

Poly& Poly::operator-=(const Poly& o) {
  if (o.c_.size() > c_.size()) c_.resize(o.c_.size());
  for (size_t i = 0; i < o.c_.size(); ++i) c_[i] -= o.c_[i];
  trim();
  return *this;
}

Poly& Poly::operator*=(const Rational& s) {
  if (s == 0) {
    c_.clear();
    return *this;
  }
  for (auto& c : c_) c *= s;
  return *this;
}

Poly operator*(const Poly& a, const Poly& b) {
  if (a.is_zero() || b.is_zero()) return {};
  std::vector<Rational> r(a.c_.size() + b.c_.size() - 1);
  for (size_t i = 0; i < a.c_.size(); ++i) {
    if (a.c_[i] == 0) continue;
    for (size_t j = 0; j < b.c_.size(); ++j) r[i + j] += a.c_[i] * b.c_[j];
  }
  return Poly(std::move(r));
}

void Poly::divmod(const Poly& a, const Poly& b, Poly& q, Poly& r) {
  if (b.is_zero()) throw Error(ErrorCode::DivisionByZeroFunction, "polynomial division by zero");
  r = a;
  if (a.degree() < b.degree()) {
    q = Poly();
    return;
  }
  const int db = b.degree();
  std::vector<Rational> qc(static_cast<size_t>(a.degree() - db) + 1);
  Rational inv_lead = 1 / b.lead();
  std::vector<Rational>& rc = r.c_;
  for (int k = a.degree(); k >= db; --k) {
    const Rational& top = rc[static_cast<size_t>(k)];
    if (top == 0) continue;
    Rational f = top * inv_lead;
    qc[static_cast<size_t>(k - db)] = f;
    for (int j = 0; j <= db; ++j) rc[static_cast<size_t>(k - db + j)] -= f * b.c_[static_cast<size_t>(j)];
  }
  r.trim();
  q = Poly(std::move(qc));
}

Poly Poly::gcd(Poly a, Poly b) {
  if (a.degree() < b.degree()) std::swap(a, b);
  a = a.monic();
  b = b.monic();
  Poly q, r;
  while (!b.is_zero()) {
    divmod(a, b, q, r);
    a = std::move(b);
    b = r.monic();
  }
  return a;
}

std::string Poly::str(char var) const {
  if (is_zero()) return "0";
  std::ostringstream os;
  bool first = true;
  for (int i = degree(); i >= 0; --i) {
    const Rational& c = c_[static_cast<size_t>(i)];
    if (c == 0) continue;
    Rational mag = abs(c);
    if (!first) os << (c < 0 ? " - " : " + ");
    else if (c < 0) os << "-";
    first = false;
    bool unit = (mag == 1) && i > 0;
    if (!unit) {
      if (mag.get_den() != 1 && i > 0) os << "(" << mag.get_str() << ")";
      else os << mag.get_str();
    }
    if (i > 0) {
      if (!unit) os << "*";
      os << var;
      if (i > 1) os << "^" << i;
    }
  }
  return os.str();
}

// ---- RatFunc ----

RatFunc::RatFunc(const Rational& c) : num_(Poly::constant(c)), den_(Poly::constant(1)) {}

RatFunc::RatFunc(Poly num) : num_(std::move(num)), den_(Poly::constant(1)) {}

RatFunc::RatFunc(Poly num, Poly den) : num_(std::move(num)), den_(std::move(den)) {
  if (den_.is_zero()) throw Error(ErrorCode::DivisionByZeroFunction, "zero denominator");
  normalize();
}

RatFunc RatFunc::var() { return RatFunc(Poly::x()); }

void RatFunc::normalize() {
  if (num_.is_zero()) {
    den_ = Poly::constant(1);
    return;
  }
  if (den_.degree() > 0) {
    Poly g = Poly::gcd(num_, den_);
    if (g.degree() > 0) {
      Poly q, r;
      Poly::divmod(num_, g, q, r);
      num_ = std::move(q);
      Poly::divmod(den_, g, q, r);
      den_ = std::move(q);
    }
  }
  if (den_.lead() != 1) {
    Rational inv = 1 / den_.lead();
    num_ *= inv;
    den_ *= inv;
  }
}

std::optional<Rational> RatFunc::constant_value() const {
  if (!is_constant()) return std::nullopt;
  return num_.is_zero() ? Rational(0) : num_.coeff(0);
}

Rational RatFunc::eval(const Rational& x) const {
  Rational d = den_.eval(x);
  if (d == 0) throw Error(ErrorCode::PoleEvaluation, "pole at " + x.get_str());
  Rational r = num_.eval(x) / d;
  return r;
}

double RatFunc::eval(double x) const { return num_.eval(x) / den_.eval(x); }

RatFunc RatFunc::derivative() const {
  if (den_.degree() == 0) return RatFunc(num_.derivative(), den_, Raw{});
  Poly n = num_.derivative() * den_ - num_ * den_.derivative();
  return RatFunc(std::move(n), den_ * den_);
}

RatFunc RatFunc::compose(const RatFunc& g) const {
  // f(p/q) = [sum n_i p^i q^(k-i)] / [sum d_i p^i q^(k-i)], k = max(deg n, deg d).
  const int k = std::max(num_.degree(), den_.degree());
  const Poly& p = g.num();
  const Poly& q = g.den();
  std::vector<Poly> ppow(static_cast<size_t>(k) + 1), qpow(static_cast<size_t>(k) + 1);
  ppow[0] = Poly::constant(1);
  qpow[0] = Poly::constant(1);
  for (int i = 1; i <= k; ++i) {
    ppow[static_cast<size_t>(i)] = ppow[static_cast<size_t>(i - 1)] * p;
    qpow[static_cast<size_t>(i)] = qpow[static_cast<size_t>(i - 1)] * q;
  }
  auto homog = [&](const Poly& f) {
    Poly acc;
    for (int i = 0; i <= f.degree(); ++i) {
      const Rational& c = f.coeffs()[static_cast<size_t>(i)];
      if (c == 0) continue;
      acc += c * (ppow[static_cast<size_t>(i)] * qpow[static_cast<size_t>(k - i)]);
    }
    return acc;
  };
  Poly n = homog(num_);
  Poly d = homog(den_);
  if (d.is_zero()) {
    throw Error(ErrorCode::ConstantPoleComposition, "inner function is a constant pole");
  }
  return RatFunc(std::move(n), std::move(d));
}

RatFunc RatFunc::pow(int e) const {
  if (e < 0) return RatFunc(1) / pow(-e);
  return RatFunc(num_.pow(static_cast<unsigned>(e)), den_.pow(static_cast<unsigned>(e)), Raw{});
}

RatFunc RatFunc::operator-() const { return RatFunc(-num_, den_, Raw{}); }

RatFunc operator+(const RatFunc& a, const RatFunc& b) {
  if (a.den_ == b.den_) return RatFunc(a.num_ + b.num_, a.den_);
  return RatFunc(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
}

RatFunc operator-(const RatFunc& a, const RatFunc& b) {
  if (a.den_ == b.den_) return RatFunc(a.num_ - b.num_, a.den_);
  return RatFunc(a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_);
}

RatFunc operator*(const RatFunc& a, const RatFunc& b) {
  if (a.den_.degree() == 0 && b.den_.degree() == 0) {
    return RatFunc(a.num_ * b.num_, Poly::constant(1), RatFunc::Raw{});
  }
  // Cross-cancel before multiplying to keep degrees small.
  Poly g1 = Poly::gcd(a.num_, b.den_);
  Poly g2 = Poly::gcd(b.num_, a.den_);
  Poly q, r, an = a.num_, bd = b.den_, bn = b.num_, ad = a.den_;
  if (g1.degree() > 0) {
    Poly::divmod(an, g1, q, r); an = q;
    Poly::divmod(bd, g1, q, r); bd = q;
  }
  if (g2.degree() > 0) {
    Poly::divmod(bn, g2, q, r); bn = q;
    Poly::divmod(ad, g2, q, r); ad = q;
  }
  return RatFunc(an * bn, ad * bd);
}

RatFunc operator/(const RatFunc& a, const RatFunc& b) {
  if (b.is_zero()) throw Error(ErrorCode::DivisionByZeroFunction, "division by the zero function");
  return a * RatFunc(b.den_, b.num_);
}

double RatFunc::magnitude() const {
  double m = 0.0;
  for (const auto& c : num_.coeffs()) m = std::max(m, std::fabs(c.get_d()));
  if (!num_.is_zero() && m == 0.0) m = 1e-300;
  return m;
}

std::string RatFunc::str(char var) const {
  if (den_.degree() == 0) return num_.str(var);
  return "(" + num_.str(var) + ")/(" + den_.str(var) + ")";
}

RatFuncD::RatFuncD(const RatFunc& f) {
  num.clear();
  den.clear();
  for (const auto& c : f.num().coeffs()) num.push_back(c.get_d());
  for (const auto& c : f.den().coeffs()) den.push_back(c.get_d());
}

double RatFuncD::operator()(double x) const {
  double n = 0.0, d = 0.0;
  for (auto it = num.rbegin(); it != num.rend(); ++it) n = n * x + *it;
  for (auto it = den.rbegin(); it != den.rend(); ++it) d = d * x + *it;
  return n / d;
}

RatFunc rf_arith(const RatFunc& lhs, const RatFunc& rhs, ArithOp op) {
  switch (op) {
    case ArithOp::Add: return lhs + rhs;
    case ArithOp::Sub: return lhs - rhs;
    case ArithOp::Mul: return lhs * rhs;
    case ArithOp::Div: return lhs / rhs;
  }
  return {};
}

}  // namespace klab
