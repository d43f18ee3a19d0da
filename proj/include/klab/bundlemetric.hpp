#pragma once

// Kaehler metrics on line bundles over Kaehler-Einstein bases, assembled in a
// holomorphic chart (base coordinates, fiber coordinate z), with the potential
// tau tied to the fiber norm r by Q dr/dtau = a r.

#include <complex>
#include <memory>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "klab/geometry.hpp"
#include "klab/septuple.hpp"

namespace klab {

using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// Base chart on C^q with Kaehler potential
//   K = coef/kp * log(1 + kp |y|^2)   (kp != 0),   K = coef |y|^2   (kp = 0),
// metric h_{jk} = d_j dbar_k K, real metric Re(h_{jk} X^j conj(Y^k)).
struct BaseGeometry {
  int complex_dim = 1;
  double kappa = 0.0;  // Ric_h = kappa h
  double coef = 4.0;
  double kp = 0.0;

  int real_dim() const { return 2 * complex_dim; }
  CVec complex_point(const Point& y) const;
  double potential(const Point& y) const;
  CVec d_potential(const Point& y) const;  // (d/dy_j) K
  Eigen::MatrixXcd hermitian_metric(const Point& y) const;
  Mat metric(const Point& y) const;
  Mat complex_structure() const;
  Mat kahler_form(const Point& y) const;  // omega(A, B) = h(J e_A, e_B)
  bool in_domain(const Point& y) const;
  ChartMetric chart() const;
};

// h = 4|dy|^2 / (1 + kappa |y|^2)^2, Gauss curvature kappa.
BaseGeometry base_constant_curvature(double kappa);
// Scaled Fubini-Study metric on C^q with Ric = kappa h; kappa > 0, q >= 2.
BaseGeometry base_fubini_study(double kappa, int q);

// Connection form Gamma = eps a s dK (its (1,0) part) and weight
// <w,w> = exp(eps a s K) of the trivializing section; s = scale.
struct ConnectionData {
  BaseGeometry base;
  int eps = 0;
  double a = 1.0;
  double scale = 1.0;

  CVec gamma(const Point& y) const;                 // Gamma_j, Gamma = sum Gamma_j dy_j
  Eigen::VectorXcd gamma_real(const Point& y) const;  // Gamma(d/dx^A) over real coordinates
  double weight(const Point& y) const;
};

ConnectionData connection_form(const BaseGeometry& base, int eps, double a, double scale = 1.0);
// i dGamma + 2 eps a omega_h, and d log weight - 2 Re Gamma, at y (max abs entry).
std::pair<double, double> connection_residuals(const ConnectionData& conn, const Point& y, double h = 1e-4);

// Monotone map between tau and log r = int a/Q dtau on an interval, gauged so
// that log r vanishes at the midpoint. Piecewise Chebyshev representation.
class TauLogR {
 public:
  TauLogR(const RatFuncD& Q, double a, Interval iv);
  double logr_of_tau(double tau) const;
  double tau_of_logr(long double logr) const;
  Interval interval() const { return iv_; }
  Interval logr_range() const;  // min, max of log r over the interval
  size_t pieces() const { return pieces_.size(); }

 private:
  struct Piece {
    double lo, hi;
    double L0;
    std::vector<double> b;  // antiderivative series, zero at lo
  };
  double integrand(double tau) const;
  void build(double lo, double hi, int depth);
  long double eval_piece(const Piece& p, long double tau) const;
  RatFuncD Q_;
  double a_;
  Interval iv_;
  std::vector<Piece> pieces_;
  long double gauge_ = 0.0L;
};

// Builds the transform after checking Q > 0 on the interval.
std::shared_ptr<const TauLogR> tau_r_transform(const CaseParams& params, double a, Interval iv);

struct ConstructionOptions {
  std::optional<Interval> interval;
  double kappa_offset = 0.0;  // base Einstein constant shift (negative control)
  double conn_scale = 1.0;    // connection curvature scale (negative control)
};

struct ConstructionData {
  unsigned m = 2;
  CaseParams params;
  double a = 1.0;
  int eps = 0;
  double c = 0.0;  // 0 in cases I and II
  Interval interval;
  double kappa = 0.0;       // base Einstein constant actually used
  double kappa_rule = 0.0;  // value required by the case
  double eta = 0.0;
  SeptupleFns fns;
  RatFuncD Q;
  std::shared_ptr<const TauLogR> transform;
  BaseGeometry base;
  ConnectionData conn;

  double f_of_tau(double tau) const;  // 1 or 2 eps (tau - c)
};

// Default working interval: Q > 0, tau != 0, eps (tau - c) > 0.
Interval default_interval(const CaseParams& p, int eps);
ConstructionData make_construction(const CaseParams& p, int eps, double a,
                                   const ConstructionOptions& opt = {});

struct AssembledChart {
  ChartMetric chart;
  StructureFrame frame;
};
AssembledChart assemble_chart(const ConstructionData& data);

// Seeded point with tau(p) in the central fraction of the interval.
Point sample_point(const ConstructionData& data, std::mt19937_64& rng, double central = 0.8);

struct CertifyOptions {
  size_t points = 20;
  unsigned long long seed = 1;
  double h = 1e-4;
  double relaxed_tol = 0.0;  // when > 0, floor for the pointwise geometry tolerances
  size_t ratio_points = 3;
};
VerificationReport certify_construction(const ConstructionData& data, const CertifyOptions& opt);

// Sphere of curvature K times a surface of curvature -K (m = 2), tau linear on the sphere.
ChartMetric product_example_chart(unsigned m, double K, double lin_coeff);
VerificationReport check_product_example(double K, double lin_coeff, size_t points,
                                         unsigned long long seed, double h = 1e-4, double tol = 1e-5);

struct BBConstruction {
  CaseParams params;
  double a = 0.0;
  Rational X;
  Rational eta;
  VerificationReport report;
};
// A = 1, B = 2X, C = -X, c = 1/2, eps = 1, a = -m q, kappa = 2m.
BBConstruction bb_construction(unsigned m, const Rational& q, const Rational& eta);
// Default eta with (2m - 1 - eta/m) = 1/2.
Rational bb_default_eta(unsigned m);

}  // namespace klab
