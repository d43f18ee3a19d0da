#pragma once

// Finite-difference tensor calculus on coordinate charts.
//
// Curvature sign: R(u,v)w = D_v D_u w - D_u D_v w + D_[u,v] w, stored fully
// covariant as R(i,j,k,l) = g(R(e_i,e_j)e_k, e_l). Ricci and scalar curvature
// are positive on round spheres.

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "klab/report.hpp"

namespace klab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Point = Eigen::VectorXd;

struct ChartMetric {
  int n = 0;
  std::function<Mat(const Point&)> metric_at;
  std::function<Mat(const Point&)> complex_structure_at;
  std::function<double(const Point&)> potential_at;
  std::function<bool(const Point&)> domain_probe;
};

// Standard complex structure on R^n = C^(n/2) with coordinates (x1, y1, x2, y2, ...).
Mat standard_complex_structure(int n);

struct Tensor3 {
  int n = 0;
  std::vector<double> d;
  Tensor3() = default;
  explicit Tensor3(int n_) : n(n_), d(static_cast<size_t>(n_ * n_ * n_), 0.0) {}
  double& operator()(int i, int j, int k) { return d[static_cast<size_t>((i * n + j) * n + k)]; }
  double operator()(int i, int j, int k) const { return d[static_cast<size_t>((i * n + j) * n + k)]; }
  double max_abs() const;
};

struct Tensor4 {
  int n = 0;
  std::vector<double> d;
  Tensor4() = default;
  explicit Tensor4(int n_) : n(n_), d(static_cast<size_t>(n_ * n_ * n_ * n_), 0.0) {}
  double& operator()(int i, int j, int k, int l) {
    return d[static_cast<size_t>(((i * n + j) * n + k) * n + l)];
  }
  double operator()(int i, int j, int k, int l) const {
    return d[static_cast<size_t>(((i * n + j) * n + k) * n + l)];
  }
};

struct FdOptions {
  double h = 1e-4;          // base step, scaled per coordinate by max(1, |x_i|)
  bool richardson = true;   // one extrapolation level from steps h and h/2
  double cond_max = 1e12;   // metric condition-number ceiling
};

struct CurvatureBundle {
  int n = 0;
  Tensor3 gamma;     // gamma(k, i, j) = Gamma^k_ij
  Tensor4 riemann;   // R(i, j, k, l), convention above
  Mat ricci;
  double scal = 0.0;
  double step_used = 0.0;
};

// Everything the point checks need, computed from one set of stencils.
struct PointAnalysis {
  int n = 0;
  Point p;
  Mat g, ginv, L;                // L: Cholesky factor, g = L L^T
  std::vector<Mat> dg;           // dg[k] = d_k g
  CurvatureBundle curv;
  double tau = 0.0;
  Vec dtau;                      // d_k tau
  Mat ddtau;                     // d_i d_j tau
  Mat hess;                      // (D d tau)_ij
  Vec grad;                      // g^-1 d tau
  double Q = 0.0;                // g(grad, grad)
  double Y = 0.0;                // trace_g hess
  Mat J;
  std::vector<Mat> dJ;           // dJ[k] = d_k J
  bool has_potential = false;
  bool has_J = false;
};

// Jacobian (i, k) = d_k f_i by Richardson-extrapolated central differences.
Mat fd_jacobian(const std::function<Vec(const Point&)>& f, const Point& p, double h,
                const std::function<bool(const Point&)>& domain_probe = nullptr);

PointAnalysis analyze_point(const ChartMetric& chart, const Point& p, const FdOptions& opt);

Tensor3 christoffels(const ChartMetric& chart, const Point& p, double h);
CurvatureBundle riemann(const ChartMetric& chart, const Point& p, double h);
CurvatureBundle riemann(const ChartMetric& chart, const Point& p, const FdOptions& opt);

struct HessianResult {
  Mat hess;
  Vec grad;
  double Q = 0.0;
  double Y = 0.0;
};
HessianResult hessian_potential(const ChartMetric& chart, const Point& p, double h);

// Frobenius norms in the g-orthonormal frame (g = L L^T).
double frame_norm2(const Mat& T, const Mat& L);        // covariant 2-tensor
double frame_norm_endo(const Mat& A, const Mat& L);    // (1,1)-tensor
double frame_norm3(const Tensor3& T, const Mat& L);    // covariant 3-tensor
double frame_norm4(const Tensor4& T, const Mat& L);    // covariant 4-tensor

struct GeometryTolerances {
  double kahler = 1e-6;
  double killing = 1e-6;
  double eigen = 1e-5;
  double structure = 1e-5;
  double einstein = 1e-5;
  double scal = 1e-4;
  double antisym = 1e-10;
  double pair = 1e-6;
  double trace = 1e-5;
  double bianchi = 1e-4;
  double ratio_lo = 3.5;
  double ratio_hi = 4.5;
};

VerificationReport check_kahler(const PointAnalysis& a, const GeometryTolerances& tol = {});
VerificationReport check_kahler(const ChartMetric& chart, const Point& p, double h);

VerificationReport check_killing(const PointAnalysis& a, const GeometryTolerances& tol = {});
VerificationReport check_killing(const ChartMetric& chart, const Point& p, double h);

// Expected eigenvalue data at tau(p): Q, phi, psi, lambda, mu.
struct EigenExpectation {
  double Q, phi, psi, lambda, mu;
};
struct EigenEmpirical {
  double Q, phi, psi, lambda, mu;
};
EigenEmpirical empirical_eigenvalues(const PointAnalysis& a, VerificationReport* blocks,
                                     const GeometryTolerances& tol = {});
VerificationReport check_skrp_eigenstructure(const PointAnalysis& a, const EigenExpectation& expected,
                                             const GeometryTolerances& tol = {});

// Vector fields and base data needed to test the Levi-Civita formulas of the
// bundle construction in a chart.
struct StructureFrame {
  int eps = 0;
  int base_dim = 0;  // real dimension of the base
  std::function<Vec(const Point&)> v;                    // a z
  std::function<Vec(const Point&)> u;                    // i a z
  std::function<Vec(const Point&, int)> lift;            // horizontal lift of base coordinate field
  std::function<Vec(const Point&, const Vec&)> vertical_part;
  std::function<Mat(const Point&)> base_metric;          // h at the projected point
  std::function<Mat(const Point&)> base_J;
  std::function<Tensor3(const Point&)> base_gamma;       // base Christoffels at the projected point
  std::function<std::pair<double, double>(const Point&)> psi_phi;
};

VerificationReport check_structure_equations(const PointAnalysis& a, const StructureFrame& frame,
                                             const ChartMetric& chart, const FdOptions& opt,
                                             const GeometryTolerances& tol = {});

struct EinsteinResult {
  double trace_free = 0.0;  // relative trace-free residual of the conformal Ricci tensor
  double scal_dev = 0.0;    // |s~ - 2 eta| / |2 eta| (or |s~| when eta = 0)
  double scal_tilde = 0.0;
};
EinsteinResult conformal_einstein(const PointAnalysis& a, double eta_expected);
VerificationReport conformal_einstein_residual(const PointAnalysis& a, double eta_expected,
                                               const GeometryTolerances& tol = {});
VerificationReport conformal_einstein_residual(const ChartMetric& chart, const Point& p, double h,
                                               double eta_expected);

// Riemann symmetries, complex trace of R(u,v) against the Ricci form on
// seeded random u, v, and the contracted Bianchi identity.
VerificationReport check_curvature_identities(const PointAnalysis& a, const ChartMetric& chart,
                                              const FdOptions& opt, unsigned long long seed,
                                              const GeometryTolerances& tol = {});

// Ratio of trace-free Einstein residuals at steps h and h/2 with plain
// second-order stencils.
double fd_convergence_ratio(const ChartMetric& chart, const Point& p, double h, double eta_expected);

}  // namespace klab
