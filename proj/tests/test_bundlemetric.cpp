#include <cmath>
#include <random>

#include "doctest.h"
#include "klab/bundlemetric.hpp"

using namespace klab;

namespace {

Point pt(std::initializer_list<double> xs) {
  Point p(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) p[i++] = x;
  return p;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::IoFailure;
}

ConstructionData case_iii_plus() {
  return make_construction(CaseParams::case_iii(2, 2, 0, 0, 1), 1, -2.0);
}

}  // namespace

TEST_SUITE("bundlemetric") {
  TEST_CASE("constant-curvature bases") {
    const BaseGeometry flat = base_constant_curvature(0.0);
    CHECK(flat.in_domain(pt({1e3, -1e3})));
    CHECK((flat.metric(pt({3.0, 4.0})) - 4.0 * Mat::Identity(2, 2)).norm() < 1e-14);

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-0.6, 0.6);
    const BaseGeometry hyp = base_constant_curvature(-1.0);
    CHECK(hyp.in_domain(pt({0.5, 0.5})));
    CHECK_FALSE(hyp.in_domain(pt({1.1, 0.0})));
    for (int i = 0; i < 8; ++i) {
      const Point p = pt({u(rng), u(rng)});
      CHECK(std::abs(riemann(hyp.chart(), p, 1e-4).scal + 2.0) <= 1e-6);
      CHECK(std::abs(riemann(base_constant_curvature(1.0).chart(), p, 1e-4).scal - 2.0) <= 1e-6);
    }
  }

  TEST_CASE("Fubini-Study base") {
    const BaseGeometry fs6 = base_fubini_study(6.0, 2);
    const Point y = pt({0.3, -0.1, 0.2, 0.4});
    const CurvatureBundle b = riemann(fs6.chart(), y, 1e-4);
    CHECK((b.ricci - 6.0 * fs6.metric(y)).cwiseAbs().maxCoeff() <= 1e-5);
    const BaseGeometry fs3 = base_fubini_study(3.0, 2);
    CHECK((fs3.metric(y) - 2.0 * fs6.metric(y)).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK(code_of([] { base_fubini_study(-1.0, 2); }) == ErrorCode::NonpositiveKappa);
  }

  TEST_CASE("connection forms") {
    const ConnectionData flat = connection_form(base_constant_curvature(1.0), 0, 1.0);
    const Point y = pt({0.3, -0.7});
    CHECK(flat.gamma(y).norm() == 0.0);
    CHECK(flat.weight(y) == 1.0);

    const ConnectionData c = connection_form(base_constant_curvature(1.0), 1, -2.0);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 10; ++i) {
      const auto [curv, weight] = connection_residuals(c, pt({u(rng), u(rng)}));
      CHECK(curv <= 1e-10);
      CHECK(weight <= 1e-10);
    }

    // Flat base h = 4|dy|^2: the curvature identity fixes the weight to exp(4 eps a |y|^2).
    const ConnectionData c0 = connection_form(base_constant_curvature(0.0), 1, 1.0);
    CHECK(c0.weight(y) == doctest::Approx(std::exp(4.0 * y.squaredNorm())).epsilon(1e-14));
    CHECK(connection_residuals(c0, y).first <= 1e-10);
  }

  TEST_CASE("tau and log r") {
    // Q = 1 and a = 1: log r = tau up to the gauge.
    auto tr = tau_r_transform(CaseParams::case_i(2, 0, 0, -6), 1.0, {0.2, 1.7});
    CHECK(tr->logr_of_tau(1.3) - tr->logr_of_tau(0.4) == doctest::Approx(0.9).epsilon(1e-13));
    CHECK(std::abs(tr->logr_of_tau(0.95)) < 1e-14);

    auto t3 = tau_r_transform(CaseParams::case_iii(2, -1, Rational(1, 2), 1, 1), 1.0, {0.3, 0.7});
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      const double tau = 0.3 + 0.4 * k / 99.0;
      worst = std::max(worst, std::abs(t3->tau_of_logr(t3->logr_of_tau(tau)) - tau));
    }
    CHECK(worst <= 1e-12);
    CHECK(code_of([] { tau_r_transform(CaseParams::case_i(2, 1, 0, -6), 1.0, {0.5, 1.5}); }) ==
          ErrorCode::NonpositiveQ);
  }

  TEST_CASE("assembled metrics") {
    const ConstructionData d1 = make_construction(CaseParams::case_i(2, 1, 0, -6), 0, 1.0);
    const AssembledChart a1 = assemble_chart(d1);
    std::mt19937_64 rng(11);
    for (int i = 0; i < 20; ++i) {
      const Mat g = a1.chart.metric_at(sample_point(d1, rng));
      CHECK(g.block(0, 2, 2, 2).cwiseAbs().maxCoeff() == 0.0);
    }

    const ConstructionData d3 = case_iii_plus();
    const AssembledChart a3 = assemble_chart(d3);
    for (int i = 0; i < 100; ++i) {
      const Point p = sample_point(d3, rng);
      const Mat g = a3.chart.metric_at(p);
      CHECK((g - g.transpose()).cwiseAbs().maxCoeff() == 0.0);
      CHECK(Eigen::LLT<Mat>(g).info() == Eigen::Success);
      const double tau = a3.chart.potential_at(p);
      const Vec v = a3.frame.v(p), u = a3.frame.u(p);
      CHECK(std::abs(v.dot(g * v) - d3.Q(tau)) <= 1e-8 * std::max(1.0, d3.Q(tau)));
      CHECK(std::abs(u.dot(g * u) - d3.Q(tau)) <= 1e-8 * std::max(1.0, d3.Q(tau)));
    }
  }

  TEST_CASE("case rules for the base Einstein constant") {
    CHECK(case_iii_plus().kappa == doctest::Approx(4.0));
    CHECK(make_construction(CaseParams::case_i(2, 1, 0, -6), 0, 1.0).kappa == doctest::Approx(-1.0));
    CHECK(make_construction(CaseParams::case_ii(2, 2, 1, -1), 1, 1.0).kappa == doctest::Approx(2.0));
    CHECK(code_of([] { make_construction(CaseParams::case_ii(2, 2, 1, -1), 0, 1.0); }) ==
          ErrorCode::ParameterDomain);
    CHECK(code_of([] { make_construction(CaseParams::case_ii(2, 2, 1, -1), 1, 0.0); }) ==
          ErrorCode::DegenerateParameters);
  }

  TEST_CASE("certification of an honest configuration") {
    CertifyOptions opt;
    opt.points = 4;
    const VerificationReport r = certify_construction(case_iii_plus(), opt);
    CHECK(r.overall());
    CHECK(r.find("einstein.trace_free")->residual <= 1e-5);
    CHECK(r.find("einstein.scal")->residual <= 1e-4);
  }

  TEST_CASE("negative controls") {
    CertifyOptions opt;
    opt.points = 4;
    ConstructionOptions k;
    k.kappa_offset = 1.0;
    VerificationReport r = certify_construction(
        make_construction(CaseParams::case_iii(2, 2, 0, 0, 1), 1, -2.0, k), opt);
    CHECK(r.find("einstein.trace_free")->residual > 1e-2);
    CHECK_FALSE(r.overall());
  }

  TEST_CASE("flipping eps in the structure check only") {
    const ConstructionData d = case_iii_plus();
    AssembledChart a = assemble_chart(d);
    std::mt19937_64 rng(2);
    const Point p = sample_point(d, rng);
    const FdOptions fo;
    const PointAnalysis pa = analyze_point(a.chart, p, fo);
    CHECK(check_structure_equations(pa, a.frame, a.chart, fo).overall());
    a.frame.eps = -a.frame.eps;
    CHECK_FALSE(check_structure_equations(pa, a.frame, a.chart, fo).overall());
  }

  TEST_CASE("case i structure has no vertical part") {
    const ConstructionData d = make_construction(CaseParams::case_i(2, 1, 0, -6), 0, 1.0);
    const AssembledChart a = assemble_chart(d);
    std::mt19937_64 rng(4);
    const Point p = sample_point(d, rng);
    const FdOptions fo;
    const VerificationReport r = check_structure_equations(analyze_point(a.chart, p, fo), a.frame, a.chart, fo);
    CHECK(r.overall());
    CHECK(r.find("struct.ww")->pass);
  }

  TEST_CASE("product example") {
    const VerificationReport r = check_product_example(1.0, 1.0, 5, 1);
    CHECK(r.overall());
    CHECK(code_of([] { product_example_chart(3, 1.0, 1.0); }) == ErrorCode::InvalidDimension);
  }

  TEST_CASE("Berard Bergery family") {
    for (unsigned m = 2; m <= 6; ++m) {
      CAPTURE(m);
      const BBConstruction bb = bb_construction(m, Rational(1, 2), bb_default_eta(m));
      CHECK(bb.report.overall());
      CHECK(bb.a == doctest::Approx(-0.5 * m));
      CHECK(expected_kappa(bb.params, 1) == Rational(2 * m));
    }
    const BBConstruction bb = bb_construction(2, Rational(1, 2), bb_default_eta(2));
    CertifyOptions opt;
    opt.points = 4;
    const VerificationReport r = certify_construction(make_construction(bb.params, 1, bb.a), opt);
    CHECK(r.find("einstein.trace_free")->residual <= 1e-5);
    CHECK(r.overall());
  }
}
