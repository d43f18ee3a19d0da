#include "doctest.h"
#include "klab/specfun.hpp"

using namespace klab;

namespace {

RatFunc t() { return RatFunc::var(); }

bool all_pass(const VerificationReport& r) { return r.overall() && !r.entries.empty(); }

}  // namespace

TEST_SUITE("specfun") {
  TEST_CASE("closed forms for small m") {
    CHECK(build_F(1) == (t() - RatFunc(2)) * t() / (t() - RatFunc(1)));
    CHECK(build_F(2) == (t() - RatFunc(2)) * t().pow(3) / (t() - RatFunc(1)).pow(2));
    CHECK(build_E(1) == Poly{-1, 1});
    CHECK(build_Xi(1) == (t() - RatFunc(1)) + RatFunc(1) / (t() - RatFunc(1)));
    CHECK(build_P(1) == Poly{1, 0, 1});
    CHECK(build_P(2) == Poly{1, 0, 2, 0, Rational(-1, 3)});
  }

  TEST_CASE("structural invariants") {
    for (unsigned m = 1; m <= 8; ++m) {
      const SpecialFunctionSet s = build_special_functions(m);
      CAPTURE(m);
      CHECK(s.E.degree() == static_cast<int>(m));
      CHECK(s.E.eval(Rational(1)) == 0);
      CHECK(s.F.num().eval(Rational(2)) == 0);
      CHECK(s.F.num().eval(Rational(0)) == 0);
      CHECK(s.P.coeff(0) == 1);
      for (int i = 1; i <= s.P.degree(); i += 2) CHECK(s.P.coeff(i) == 0);
      CHECK(s.E0 == s.E.eval(Rational(0)));
    }
  }

  TEST_CASE("identity suites pass") {
    for (unsigned m = 2; m <= 8; ++m) {
      CAPTURE(m);
      CHECK(all_pass(verify_su_identities(m)));
      CHECK(all_pass(verify_bb_identities(m)));
    }
    CHECK(all_pass(verify_bb_identities(5u)));
  }

  TEST_CASE("m = 1 marks the recursions not applicable") {
    const VerificationReport r = verify_su_identities(1u);
    CHECK(r.overall());
    for (const char* tag : {"su.rec_F", "su.rec_E", "su.rec_E0", "su.E_over_F_shift"}) {
      const ReportEntry* e = r.find(tag);
      REQUIRE(e != nullptr);
      CHECK(e->note.rfind("n/a", 0) == 0);
    }
    for (const char* tag : {"su.F_first_order", "su.E_first_order", "su.second_order_E", "su.second_order_F"}) {
      REQUIRE(r.find(tag) != nullptr);
      CHECK(r.find(tag)->pass);
    }
  }

  TEST_CASE("perturbed E fails its first-order equation") {
    SpecialFunctionSet s = build_special_functions(3);
    const SpecialFunctionSet prev = build_special_functions(2);
    std::vector<Rational> c = s.E.coeffs();
    c.back() += 1;
    s.E = Poly(c);
    const VerificationReport r = verify_su_identities(s, &prev);
    REQUIRE(r.find("su.E_first_order") != nullptr);
    CHECK_FALSE(r.find("su.E_first_order")->pass);
    CHECK_FALSE(r.overall());
  }

  TEST_CASE("P with constant term 2 fails only the normalization") {
    SpecialFunctionSet s = build_special_functions(3);
    s.P = s.P + Poly{1};
    const VerificationReport r = verify_bb_identities(s);
    CHECK(r.find("bb.P_second_derivative")->pass);
    CHECK_FALSE(r.find("bb.P_even_normalized")->pass);
  }
}
