#include "doctest.h"
#include "klab/exactalg.hpp"

using namespace klab;

namespace {

RatFunc t() { return RatFunc::var(); }
Rational q(const char* s) { return parse_rational(s); }

}  // namespace

TEST_SUITE("exactalg") {
  TEST_CASE("sum of simple fractions normalizes") {
    RatFunc f = RatFunc(1) / (t() - RatFunc(1)) + RatFunc(1) / (t() + RatFunc(1));
    CHECK(f == RatFunc(2) * t() / (t() * t() - RatFunc(1)));
    CHECK(f.num() == Poly{0, 2});
    CHECK(f.den() == Poly{-1, 0, 1});
  }

  TEST_CASE("multiplicative identity and gcd cancellation") {
    RatFunc f = (t() * t() * t() - RatFunc(2)) / (t() + RatFunc(q("3/7")));
    CHECK(f * RatFunc(1) == f);
    RatFunc g = (t() * t() - RatFunc(1)) / (t() - RatFunc(1));
    CHECK(g == t() + RatFunc(1));
    CHECK(g.den() == Poly{1});
  }

  TEST_CASE("division by the zero function raises") {
    CHECK_THROWS_AS(t() / RatFunc(0), Error);
    try {
      (void)(t() / RatFunc(0));
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::DivisionByZeroFunction);
    }
  }

  TEST_CASE("derivative rules") {
    for (int m = 1; m <= 6; ++m) CHECK(t().pow(m).derivative() == RatFunc(m) * t().pow(m - 1));
    CHECK(RatFunc(q("5/3")).derivative().is_zero());
    CHECK((RatFunc(1) / t()).derivative() == RatFunc(-1) / (t() * t()));
  }

  TEST_CASE("exact evaluation") {
    RatFunc f = (t() - RatFunc(2)) * t() / (t() - RatFunc(1));
    CHECK(f.eval(Rational(2)) == 0);
    CHECK((t() * t()).eval(q("3/2")) == q("9/4"));
    try {
      (void)(RatFunc(1) / (t() - RatFunc(1))).eval(Rational(1));
      FAIL("expected a pole");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::PoleEvaluation);
    }
  }

  TEST_CASE("composition") {
    RatFunc g = (RatFunc(2) - t()) / t();
    CHECK((t() * t()).compose(g) == (RatFunc(2) - t()) * (RatFunc(2) - t()) / (t() * t()));
    RatFunc f = (t().pow(3) + RatFunc(q("1/2"))) / (t() - RatFunc(4));
    CHECK(f.compose(t()) == f);
  }

  TEST_CASE("binomials") {
    CHECK(binom(4, 2) == 6);
    for (unsigned n = 0; n < 10; ++n) CHECK(binom(n, 0) == 1);
    CHECK(binom(5, 5) == 1);
  }

  TEST_CASE("rational parsing is exact") {
    CHECK(q("3/6") == Rational(1, 2));
    CHECK(q("-0.25") == Rational(-1, 4));
    CHECK(q("1.5e-2") == Rational(3, 200));
    CHECK(q(" +7 ") == 7);
    CHECK_THROWS_AS(q("1/0"), Error);
    CHECK_THROWS_AS(q("abc"), Error);
    CHECK_THROWS_AS(q(""), Error);
  }

  TEST_CASE("polynomial gcd and division") {
    Poly a = Poly{-1, 0, 1} * Poly{2, 1};  // (t^2-1)(t+2)
    Poly b = Poly{1, 1} * Poly{-3, 1};     // (t+1)(t-3)
    CHECK(Poly::gcd(a, b) == Poly{1, 1});
    Poly quo, rem;
    Poly::divmod(a, b, quo, rem);
    CHECK(quo * b + rem == a);
    CHECK(rem.degree() < b.degree());
  }
}
