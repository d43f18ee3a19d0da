#include "doctest.h"
#include "klab/septuple.hpp"
#include "klab/specfun.hpp"

using namespace klab;

namespace {

RatFunc t() { return RatFunc::var(); }
Rational q(const char* s) { return parse_rational(s); }

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::IoFailure;
}

}  // namespace

TEST_SUITE("septuple") {
  TEST_CASE("case i closed forms") {
    SeptupleFns s = build_case_i(2, 0, 0, -6);
    CHECK(s.grad_sq == RatFunc(1));
    for (const RatFunc* f : {&s.laplacian, &s.scal, &s.hess_h, &s.hess_v, &s.ric_h, &s.ric_v}) CHECK(f->is_zero());

    s = build_case_i(2, 1, 0, -6);
    CHECK(s.grad_sq == RatFunc(1) - t() * t());
    CHECK(s.laplacian == RatFunc(-2) * t());
    CHECK(s.hess_v == -t());
    CHECK(s.ric_h == RatFunc(-1));
    CHECK(s.ric_v == RatFunc(1));
    CHECK(s.scal.is_zero());
    CHECK(code_of([] { build_case_i(2, 0, 0, 0); }) == ErrorCode::DegenerateParameters);
  }

  TEST_CASE("case ii closed forms") {
    SeptupleFns s = build_case_ii(2, 0, 0, -3);
    CHECK(s.grad_sq == RatFunc(1));
    CHECK(s.hess_h == RatFunc(1) / (RatFunc(2) * t()));
    CHECK(s.grad_sq == RatFunc(2) * t() * s.hess_h);
    s = build_case_ii(2, 2, 0, 0);
    CHECK(s.hess_h == RatFunc(Rational(1, 2)));
    CHECK(s.grad_sq == t());
    CHECK(code_of([] { build_case_ii(2, 0, 0, 0); }) == ErrorCode::DegenerateParameters);
  }

  TEST_CASE("case iii closed forms") {
    SeptupleFns s = build_case_iii(2, 2, 0, 0, 1);
    CHECK(s.grad_sq == RatFunc(2) * (t() - RatFunc(1)));
    CHECK(s.hess_h == RatFunc(1));
    s = build_case_iii(2, 0, 1, 0, 1);
    CHECK(s.grad_sq == (t() - RatFunc(1)).pow(2) * (t() + RatFunc(1)));
    CHECK(code_of([] { build_case_iii(2, 0, 0, 0, 1); }) == ErrorCode::DegenerateParameters);
  }

  TEST_CASE("reconstruction from sigma") {
    SeptupleFns s = reconstruct_from_sigma(RatFunc(1), 1, 2);
    CHECK(s.grad_sq == RatFunc(2) * (t() - RatFunc(1)));
    CHECK(s.hess_v == RatFunc(1));
    CHECK(s.laplacian == RatFunc(4));
    CHECK(s.ric_v.is_zero());
    CHECK(s.ric_h.is_zero());
    CHECK(s.scal.is_zero());
    CHECK(reconstruct_from_sigma(RatFunc(build_E(2)), 1, 2) == build_case_iii(2, 0, 2, 0, 1));
    CHECK(code_of([] { reconstruct_from_sigma(RatFunc(0), 1, 2); }) == ErrorCode::ZeroSigma);
  }

  TEST_CASE("families solve the system; perturbations do not") {
    for (unsigned m = 2; m <= 4; ++m) {
      CAPTURE(m);
      CHECK(check_system(build_case_i(m, 1, q("1/3"), -5)).overall());
      CHECK(check_system(build_case_ii(m, 2, -1, q("7/2"))).overall());
      CHECK(check_system(build_case_iii(m, q("-1"), q("1/2"), 1, q("3/2"))).overall());
    }
    SeptupleFns s = build_case_i(2, 1, 0, -6);
    s.ric_v = s.ric_v + RatFunc(1);
    VerificationReport r = check_system(s);
    CHECK_FALSE(r.find("system.dY")->pass);

    VerificationReport flat = check_system(reconstruct_from_sigma(RatFunc(1), 1, 2));
    CHECK(flat.overall());
    CHECK(flat.find("system.gap")->pass);
  }

  TEST_CASE("bijection between septuples and sigma") {
    for (const SeptupleFns& s : {build_case_ii(3, 2, -1, q("7/2")), build_case_iii(3, q("-1"), q("1/2"), 1, q("3/2"))}) {
      IntegralValues iv = integrals(s, 1);
      REQUIRE(iv.c_const.has_value());
      const RatFunc sigma = s.grad_sq / (RatFunc(2) * (t() - RatFunc(*iv.c_const)));
      if (*iv.c_const != 0) CHECK(reconstruct_from_sigma(sigma, *iv.c_const, 3) == s);
    }
  }

  TEST_CASE("conserved integrals") {
    IntegralValues iv = integrals(reconstruct_from_sigma(RatFunc(1), 1, 2), 1);
    REQUIRE(iv.c_const);
    CHECK(*iv.c_const == 1);
    CHECK(*iv.kappa == 4);
    CHECK(*iv.eta == 12);
    CHECK(expected_eta(CaseParams::case_iii(2, 2, 0, 0, 1)) == 12);

    const CaseParams pi = CaseParams::case_i(2, 1, 0, -6);
    IntegralValues ii = integrals(build_family(pi), 0);
    CHECK(*ii.y_mark == 0);
    CHECK(*ii.s_mark == 0);
    CHECK(*ii.eta == -6);
    CHECK(check_integrals(build_family(pi), pi, 0).overall());

    const CaseParams e = CaseParams::case_iii(2, 0, 1, 0, 1);
    CHECK(*integrals(build_family(e), 1).eta == -6);
    CHECK(check_integrals(build_family(e), e, 1).overall());
  }

  TEST_CASE("trichotomy") {
    CHECK(classify(build_case_i(2, 1, 0, -6)) == CaseTag::I);
    CHECK(classify(build_case_ii(2, 2, 0, 0)) == CaseTag::II);
    CHECK(classify(build_case_iii(2, 2, 0, 0, 1)) == CaseTag::III);
  }

  TEST_CASE("third-order equation") {
    for (unsigned m = 2; m <= 6; ++m) {
      CAPTURE(m);
      for (const char* c : {"1", "-2/3"}) {
        const Rational cc = q(c);
        const RatFunc tc = t() / RatFunc(cc);
        CHECK(check_third_order(RatFunc(1), cc, m).overall());
        CHECK(*third_order_constant(RatFunc(1), cc, m) == Rational(m));
        CHECK(check_third_order(RatFunc(build_E(m)).compose(tc), cc, m).overall());
        CHECK(*third_order_constant(RatFunc(build_E(m)).compose(tc), cc, m) == 0);
        CHECK(check_third_order(build_F(m).compose(tc), cc, m).overall());
        CHECK(*third_order_constant(build_F(m).compose(tc), cc, m) == 0);
      }
    }
    // tau^2 lies in span{1, E}, so it solves the equation for m = 2; tau^3 does not.
    CHECK(check_third_order(t() * t(), 1, 2).overall());
    CHECK_FALSE(check_third_order(t().pow(3), 1, 2).find("third_order.ode")->pass);
  }

  TEST_CASE("RK4 reproduces the closed forms") {
    const CaseParams p = CaseParams::case_i(2, 1, 0, -6);
    const SeptupleFns s = build_family(p);
    Trajectory tr = ode_integrate(2, septuple_values(s, 0.5), 0.5, 0.9, 1e-3);
    const SeptupleState end = septuple_values(s, 0.9);
    for (size_t i = 0; i < 7; ++i) CHECK(tr.samples.back().y[i] == doctest::Approx(end[i]).epsilon(1e-7));

    OdeCrossCheckResult r = ode_cross_check(p, 0.5, 0.9, 1e-3);
    CHECK(r.deviation <= 1e-7);
    CHECK(r.drift <= 1e-8);
    r = ode_cross_check(CaseParams::case_iii(2, 0, 1, 0, 1), 3.0, 4.0, 1e-3);
    CHECK(r.deviation <= 1e-7);
    CHECK(r.drift <= 1e-8);
    CHECK(r.order_ratio >= 12.0);
    CHECK(r.order_ratio <= 20.0);
  }

  TEST_CASE("RK4 edge cases") {
    const SeptupleFns s = reconstruct_from_sigma(RatFunc(1), 1, 2);
    CHECK(code_of([&] { ode_integrate(2, septuple_values(s, 2.0), 2.0, 3.0, 1e-3); }) ==
          ErrorCode::SingularityEncountered);
    const SeptupleState init = septuple_values(build_case_i(2, 1, 0, -6), 0.5);
    Trajectory tr = ode_integrate(2, init, 0.5, 0.5, 1e-3);
    REQUIRE(tr.samples.size() == 1);
    CHECK(tr.samples[0].y == init);
  }
}
