#include <random>

#include "doctest.h"
#include "klab/bundlemetric.hpp"
#include "klab/geometry.hpp"

using namespace klab;

namespace {

ChartMetric flat_chart(int n, std::function<double(const Point&)> tau = nullptr) {
  ChartMetric c;
  c.n = n;
  c.metric_at = [n](const Point&) { return Mat::Identity(n, n); };
  c.complex_structure_at = [n](const Point&) { return standard_complex_structure(n); };
  c.potential_at = std::move(tau);
  c.domain_probe = [](const Point&) { return true; };
  return c;
}

Point pt(std::initializer_list<double> xs) {
  Point p(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) p[i++] = x;
  return p;
}

bool passes(const VerificationReport& r, const char* tag) {
  const ReportEntry* e = r.find(tag);
  REQUIRE_MESSAGE(e != nullptr, tag);
  return e->pass;
}

}  // namespace

TEST_SUITE("geometry") {
  TEST_CASE("flat chart has no curvature") {
    const ChartMetric c = flat_chart(4);
    const Point p = pt({0.3, -0.2, 1.1, 0.7});
    CHECK(christoffels(c, p, 1e-4).max_abs() == 0.0);
    const CurvatureBundle b = riemann(c, p, 1e-4);
    for (double x : b.riemann.d) CHECK(x == 0.0);
    CHECK(b.scal == 0.0);
  }

  TEST_CASE("round sphere") {
    const ChartMetric s = base_constant_curvature(1.0).chart();
    CHECK(christoffels(s, pt({0.0, 0.0}), 1e-4).max_abs() < 1e-12);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (int i = 0; i < 10; ++i) {
      const Point p = pt({u(rng), u(rng)});
      // Closed-form chart: a wider step keeps rounding noise out of the second derivatives.
      CHECK(std::abs(riemann(s, p, 1e-3).scal - 2.0) <= 1e-6);
    }
  }

  TEST_CASE("outside the domain raises") {
    ChartMetric c = base_constant_curvature(-1.0).chart();
    try {
      christoffels(c, pt({2.0, 0.0}), 1e-4);
      FAIL("expected DomainViolation");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::DomainViolation);
    }
  }

  TEST_CASE("product of surfaces has block curvature") {
    const ChartMetric c = product_example_chart(2, 1.0, 1.0);
    const Point p = pt({0.2, -0.4, 0.1, 0.3});
    const CurvatureBundle b = riemann(c, p, 1e-4);
    auto block = [](int i) { return i < 2 ? 0 : 1; };
    double mixed = 0.0;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        for (int k = 0; k < 4; ++k)
          for (int l = 0; l < 4; ++l) {
            const bool same = block(i) == block(j) && block(j) == block(k) && block(k) == block(l);
            if (!same) mixed = std::max(mixed, std::abs(b.riemann(i, j, k, l)));
          }
    CHECK(mixed <= 1e-8);
  }

  TEST_CASE("Hessian of the flat quadratic") {
    const ChartMetric c = flat_chart(4, [](const Point& x) { return 0.5 * x.squaredNorm(); });
    const Point p = pt({0.3, -0.2, 1.1, 0.7});
    const HessianResult h = hessian_potential(c, p, 1e-3);
    CHECK((h.hess - Mat::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(h.Q == doctest::Approx(p.squaredNorm()).epsilon(1e-10));
    CHECK(h.Y == doctest::Approx(4.0).epsilon(1e-8));
  }

  TEST_CASE("Kaehler checks") {
    const ChartMetric c = flat_chart(4);
    const Point p = pt({0.3, -0.2, 1.1, 0.7});
    VerificationReport r = check_kahler(c, p, 1e-4);
    CHECK(r.overall());
    for (const auto& e : r.entries) CHECK(e.residual <= 1e-12);

    ChartMetric bad = c;
    bad.complex_structure_at = [](const Point&) {
      Mat J = standard_complex_structure(4);
      J.block(0, 0, 2, 2) *= 1.01;
      return J;
    };
    r = check_kahler(bad, p, 1e-4);
    CHECK_FALSE(passes(r, "kahler.J_squared"));
  }

  TEST_CASE("Killing potential checks") {
    const Point p = pt({0.3, -0.2, 1.1, 0.7});
    VerificationReport r = check_killing(flat_chart(4, [](const Point& x) { return 0.5 * x.squaredNorm(); }), p, 1e-3);
    CHECK(r.overall());
    CHECK(r.find("killing.symmetric_part")->residual < 1e-8);
    r = check_killing(flat_chart(4, [](const Point& x) { return x[0] * x[0] * x[0]; }), p, 1e-4);
    CHECK_FALSE(passes(r, "killing.hermitian_hessian"));
  }

  TEST_CASE("linear potential on the flat chart") {
    const ChartMetric c = flat_chart(4, [](const Point& x) { return x[0]; });
    const PointAnalysis a = analyze_point(c, pt({0.3, -0.2, 1.1, 0.7}), FdOptions{});
    VerificationReport r = check_skrp_eigenstructure(a, EigenExpectation{1.0, 0.0, 0.0, 0.0, 0.0});
    CHECK(r.overall());
  }

  TEST_CASE("constant conformal factor on flat space") {
    const ChartMetric c = flat_chart(4, [](const Point&) { return 1.0; });
    const PointAnalysis a = analyze_point(c, pt({0.3, -0.2, 1.1, 0.7}), FdOptions{});
    const EinsteinResult e = conformal_einstein(a, 0.0);
    CHECK(e.trace_free == 0.0);
    CHECK(e.scal_tilde == 0.0);
  }

  TEST_CASE("Jacobian by central differences") {
    auto f = [](const Point& x) {
      Vec v(2);
      v << std::sin(x[0]) * x[1], x[0] * x[0];
      return v;
    };
    const Mat J = fd_jacobian(f, pt({0.4, 2.0}), 1e-3);
    CHECK(J(0, 0) == doctest::Approx(std::cos(0.4) * 2.0).epsilon(1e-10));
    CHECK(J(0, 1) == doctest::Approx(std::sin(0.4)).epsilon(1e-10));
    CHECK(J(1, 0) == doctest::Approx(0.8).epsilon(1e-10));
    CHECK(std::abs(J(1, 1)) < 1e-12);
  }
}
