#include "klab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "klab/errors.hpp"

namespace klab {

namespace {

template <class T>
struct Jet {
  T f;
  std::vector<T> d1;
  std::vector<std::vector<T>> d2;
};

Vec step_vector(const Point& p, double h) {
  Vec s(p.size());
  for (Eigen::Index i = 0; i < p.size(); ++i) s[i] = h * std::max(1.0, std::fabs(p[i]));
  return s;
}

// Central differences on one level; second derivatives optional.
template <class T, class F>
Jet<T> fd_level(const F& at, const Point& p, const T& f0, const Vec& hv, bool second) {
  const int n = static_cast<int>(p.size());
  Jet<T> j;
  j.f = f0;
  std::vector<T> fp, fm;
  fp.reserve(static_cast<size_t>(n));
  fm.reserve(static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) {
    Point x = p;
    x[k] += hv[k];
    fp.push_back(at(x));
    x[k] = p[k] - hv[k];
    fm.push_back(at(x));
    T d = (fp.back() - fm.back()) / (2.0 * hv[k]);
    j.d1.push_back(d);
  }
  if (!second) return j;
  j.d2.assign(static_cast<size_t>(n), std::vector<T>(static_cast<size_t>(n), f0));
  for (int a = 0; a < n; ++a) {
    T daa = (fp[static_cast<size_t>(a)] - 2.0 * f0 + fm[static_cast<size_t>(a)]) / (hv[a] * hv[a]);
    j.d2[static_cast<size_t>(a)][static_cast<size_t>(a)] = daa;
    for (int b = a + 1; b < n; ++b) {
      Point x = p;
      x[a] += hv[a];
      x[b] += hv[b];
      T fpp = at(x);
      x[b] = p[b] - hv[b];
      T fpm = at(x);
      x[a] = p[a] - hv[a];
      T fmm = at(x);
      x[b] = p[b] + hv[b];
      T fmp = at(x);
      T dab = (fpp - fpm - fmp + fmm) / (4.0 * hv[a] * hv[b]);
      j.d2[static_cast<size_t>(a)][static_cast<size_t>(b)] = dab;
      j.d2[static_cast<size_t>(b)][static_cast<size_t>(a)] = dab;
    }
  }
  return j;
}

template <class T, class F>
Jet<T> fd_jet(const F& f, const ChartMetric& chart, const Point& p, const T& f0, double h,
              bool richardson, bool second) {
  auto at = [&](const Point& x) -> T {
    if (chart.domain_probe && !chart.domain_probe(x)) {
      throw Error(ErrorCode::DomainViolation, "finite-difference stencil leaves the chart domain");
    }
    return f(x);
  };
  Vec hv = step_vector(p, h);
  Jet<T> coarse = fd_level<T>(at, p, f0, hv, second);
  if (!richardson) return coarse;
  Jet<T> fine = fd_level<T>(at, p, f0, Vec(0.5 * hv), second);
  for (size_t k = 0; k < coarse.d1.size(); ++k) {
    T e = (4.0 * fine.d1[k] - coarse.d1[k]) / 3.0;
    fine.d1[k] = e;
  }
  if (second) {
    for (size_t a = 0; a < fine.d2.size(); ++a)
      for (size_t b = 0; b < fine.d2.size(); ++b) {
        T e = (4.0 * fine.d2[a][b] - coarse.d2[a][b]) / 3.0;
        fine.d2[a][b] = e;
      }
  }
  return fine;
}

Mat sym(const Mat& m) { return 0.5 * (m + m.transpose()); }

double vec_norm(const Vec& x, const Mat& g) { return std::sqrt(std::max(0.0, x.dot(g * x))); }

// Covector norm in the orthonormal frame.
double covec_norm(const Vec& a, const Mat& L) {
  return L.triangularView<Eigen::Lower>().solve(a).norm();
}

}  // namespace

Mat standard_complex_structure(int n) {
  Mat J = Mat::Zero(n, n);
  for (int k = 0; k + 1 < n; k += 2) {
    J(k + 1, k) = 1.0;   // J d/dx = d/dy
    J(k, k + 1) = -1.0;  // J d/dy = -d/dx
  }
  return J;
}

double Tensor3::max_abs() const {
  double m = 0.0;
  for (double x : d) m = std::max(m, std::fabs(x));
  return m;
}

double frame_norm2(const Mat& T, const Mat& L) {
  Mat X = L.triangularView<Eigen::Lower>().solve(T);
  Mat M = L.triangularView<Eigen::Lower>().solve(X.transpose()).transpose();
  return M.norm();
}

double frame_norm_endo(const Mat& A, const Mat& L) {
  Mat X = L.transpose() * A;
  // X * L^{-T} = (L^{-1} X^T)^T
  Mat M = L.triangularView<Eigen::Lower>().solve(X.transpose()).transpose();
  return M.norm();
}

double frame_norm3(const Tensor3& T, const Mat& L) {
  const int n = T.n;
  Mat Li = L.triangularView<Eigen::Lower>().solve(Mat::Identity(n, n));
  Tensor3 a(n), b(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double s = 0.0;
        for (int q = 0; q < n; ++q) s += Li(k, q) * T(i, j, q);
        a(i, j, k) = s;
      }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double s = 0.0;
        for (int q = 0; q < n; ++q) s += Li(j, q) * a(i, q, k);
        b(i, j, k) = s;
      }
  double sum = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double s = 0.0;
        for (int q = 0; q < n; ++q) s += Li(i, q) * b(q, j, k);
        sum += s * s;
      }
  return std::sqrt(sum);
}

double frame_norm4(const Tensor4& T, const Mat& L) {
  const int n = T.n;
  Mat Li = L.triangularView<Eigen::Lower>().solve(Mat::Identity(n, n));
  Tensor4 cur = T, nxt(n);
  for (int slot = 0; slot < 4; ++slot) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) {
            int idx[4] = {i, j, k, l};
            double s = 0.0;
            for (int q = 0; q < n; ++q) {
              int src[4] = {i, j, k, l};
              src[slot] = q;
              s += Li(idx[slot], q) * cur(src[0], src[1], src[2], src[3]);
            }
            nxt(i, j, k, l) = s;
          }
    std::swap(cur, nxt);
  }
  double sum = 0.0;
  for (double x : cur.d) sum += x * x;
  return std::sqrt(sum);
}

Mat fd_jacobian(const std::function<Vec(const Point&)>& f, const Point& p, double h,
                const std::function<bool(const Point&)>& domain_probe) {
  ChartMetric probe;
  probe.n = static_cast<int>(p.size());
  probe.domain_probe = domain_probe;
  Vec f0 = f(p);
  auto j = fd_jet<Vec>(f, probe, p, f0, h, true, false);
  Mat out(f0.size(), p.size());
  for (Eigen::Index k = 0; k < p.size(); ++k) out.col(k) = j.d1[static_cast<size_t>(k)];
  return out;
}

PointAnalysis analyze_point(const ChartMetric& chart, const Point& p, const FdOptions& opt) {
  if (chart.domain_probe && !chart.domain_probe(p)) {
    throw Error(ErrorCode::DomainViolation, "point outside the chart domain");
  }
  const int n = chart.n;
  PointAnalysis a;
  a.n = n;
  a.p = p;
  a.curv.n = n;
  a.curv.step_used = opt.h;

  Mat g0 = sym(chart.metric_at(p));
  Eigen::SelfAdjointEigenSolver<Mat> es(g0, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > opt.cond_max) {
    throw Error(ErrorCode::IllConditionedMetric, "metric condition number out of range");
  }
  auto gjet = fd_jet<Mat>([&](const Point& x) { return Mat(sym(chart.metric_at(x))); }, chart, p, g0,
                          opt.h, opt.richardson, true);
  a.g = g0;
  a.L = Eigen::LLT<Mat>(g0).matrixL();
  a.ginv = sym(g0.inverse());
  a.dg.resize(static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) a.dg[static_cast<size_t>(k)] = sym(gjet.d1[static_cast<size_t>(k)]);
  const auto& dd = gjet.d2;

  // Christoffel symbols of the first and second kind.
  Tensor3 g1(n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        g1(k, i, j) = 0.5 * (a.dg[static_cast<size_t>(i)](j, k) + a.dg[static_cast<size_t>(j)](i, k) -
                             a.dg[static_cast<size_t>(k)](i, j));
  Tensor3& gam = a.curv.gamma;
  gam = Tensor3(n);
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        double s = 0.0;
        for (int k = 0; k < n; ++k) s += a.ginv(l, k) * g1(k, i, j);
        gam(l, i, j) = s;
        gam(l, j, i) = s;
      }

  auto D2 = [&](int x, int y, int i, int j) {
    return 0.5 * (dd[static_cast<size_t>(x)][static_cast<size_t>(y)](i, j) +
                  dd[static_cast<size_t>(x)][static_cast<size_t>(y)](j, i));
  };
  // S(a,b,c,d) = sum_q Gamma_{q,ab} Gamma^q_cd, symmetrized under (ab) <-> (cd) so that
  // the grouping below is exactly antisymmetric in both index pairs.
  Tensor4 S(n);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      for (int z = 0; z < n; ++z)
        for (int w = 0; w < n; ++w) {
          double s = 0.0;
          for (int q = 0; q < n; ++q) s += g1(q, x, y) * gam(q, z, w);
          S(x, y, z, w) = s;
        }
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      for (int z = 0; z < n; ++z)
        for (int w = 0; w < n; ++w) {
          if (x * n + y > z * n + w) continue;
          const double s = 0.5 * (S(x, y, z, w) + S(z, w, x, y));
          S(x, y, z, w) = s;
          S(z, w, x, y) = s;
        }
  Tensor4& R = a.curv.riemann;
  R = Tensor4(n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l)
        for (int m = 0; m < n; ++m) {
          const double x = D2(k, l, i, m) - D2(i, l, k, m);
          const double y = D2(i, m, k, l) - D2(k, m, i, l);
          R(i, k, l, m) = 0.5 * (x + y) + (S(k, l, i, m) - S(k, m, i, l));
        }
  Mat ric = Mat::Zero(n, n);
  for (int k = 0; k < n; ++k)
    for (int m = 0; m < n; ++m) {
      double s = 0.0;
      for (int i = 0; i < n; ++i)
        for (int l = 0; l < n; ++l) s += a.ginv(i, l) * R(i, k, l, m);
      ric(k, m) = s;
    }
  a.curv.ricci = sym(ric);
  a.curv.scal = (a.ginv.cwiseProduct(a.curv.ricci)).sum();

  if (chart.potential_at) {
    a.has_potential = true;
    a.tau = chart.potential_at(p);
    auto tj = fd_jet<double>(chart.potential_at, chart, p, a.tau, opt.h, opt.richardson, true);
    a.dtau = Vec(n);
    a.ddtau = Mat(n, n);
    for (int i = 0; i < n; ++i) {
      a.dtau[i] = tj.d1[static_cast<size_t>(i)];
      for (int j = 0; j < n; ++j) a.ddtau(i, j) = tj.d2[static_cast<size_t>(i)][static_cast<size_t>(j)];
    }
    a.ddtau = sym(a.ddtau);
    a.hess = a.ddtau;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int k = 0; k < n; ++k) s += gam(k, i, j) * a.dtau[k];
        a.hess(i, j) -= s;
      }
    a.hess = sym(a.hess);
    a.grad = a.ginv * a.dtau;
    a.Q = a.dtau.dot(a.grad);
    a.Y = (a.ginv.cwiseProduct(a.hess)).sum();
  }
  if (chart.complex_structure_at) {
    a.has_J = true;
    a.J = chart.complex_structure_at(p);
    auto jj = fd_jet<Mat>(chart.complex_structure_at, chart, p, a.J, opt.h, opt.richardson, false);
    a.dJ = jj.d1;
  }
  return a;
}

Tensor3 christoffels(const ChartMetric& chart, const Point& p, double h) {
  FdOptions opt;
  opt.h = h;
  ChartMetric bare = chart;
  bare.potential_at = nullptr;
  bare.complex_structure_at = nullptr;
  return analyze_point(bare, p, opt).curv.gamma;
}

CurvatureBundle riemann(const ChartMetric& chart, const Point& p, const FdOptions& opt) {
  ChartMetric bare = chart;
  bare.potential_at = nullptr;
  bare.complex_structure_at = nullptr;
  return analyze_point(bare, p, opt).curv;
}

CurvatureBundle riemann(const ChartMetric& chart, const Point& p, double h) {
  FdOptions opt;
  opt.h = h;
  return riemann(chart, p, opt);
}

HessianResult hessian_potential(const ChartMetric& chart, const Point& p, double h) {
  FdOptions opt;
  opt.h = h;
  ChartMetric bare = chart;
  bare.complex_structure_at = nullptr;
  PointAnalysis a = analyze_point(bare, p, opt);
  return {a.hess, a.grad, a.Q, a.Y};
}

// ---- Kaehler and Killing checks ----

VerificationReport check_kahler(const PointAnalysis& a, const GeometryTolerances& tol) {
  VerificationReport rep;
  const int n = a.n;
  const Mat I = Mat::Identity(n, n);
  const double sn = std::sqrt(static_cast<double>(n));
  rep.add_numeric("kahler.J_squared", "J^2 = -1", frame_norm_endo(a.J * a.J + I, a.L) / sn, tol.kahler);
  rep.add_numeric("kahler.J_orthogonal", "g(J., J.) = g",
                  frame_norm2(a.J.transpose() * a.g * a.J - a.g, a.L) / sn, tol.kahler);

  Tensor3 nabJ(n), conn(n);
  const auto& gam = a.curv.gamma;
  for (int k = 0; k < n; ++k) {
    Mat C = Mat::Zero(n, n);  // Gamma_k J - J Gamma_k
    for (int l = 0; l < n; ++l)
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int m = 0; m < n; ++m) s += gam(l, k, m) * a.J(m, j) - gam(m, k, j) * a.J(l, m);
        C(l, j) = s;
      }
    Mat full = a.g * (a.dJ[static_cast<size_t>(k)] + C);
    Mat part = a.g * C;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        nabJ(k, i, j) = full(i, j);
        conn(k, i, j) = part(i, j);
      }
  }
  rep.add_numeric("kahler.J_parallel", "D J = 0",
                  frame_norm3(nabJ, a.L) / std::max(1.0, frame_norm3(conn, a.L)), tol.kahler);

  Tensor3 domega(n), domega_ref(n);
  std::vector<Mat> dw(static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) {
    dw[static_cast<size_t>(k)] = a.dJ[static_cast<size_t>(k)].transpose() * a.g +
                                 a.J.transpose() * a.dg[static_cast<size_t>(k)];
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        domega(i, j, k) = dw[static_cast<size_t>(i)](j, k) + dw[static_cast<size_t>(j)](k, i) +
                          dw[static_cast<size_t>(k)](i, j);
        domega_ref(i, j, k) = dw[static_cast<size_t>(i)](j, k);
      }
  rep.add_numeric("kahler.d_omega", "d omega = 0, omega(u,v) = g(Ju,v)",
                  frame_norm3(domega, a.L) / std::max(1.0, frame_norm3(domega_ref, a.L)), tol.kahler);
  return rep;
}

VerificationReport check_kahler(const ChartMetric& chart, const Point& p, double h) {
  FdOptions opt;
  opt.h = h;
  ChartMetric c = chart;
  c.potential_at = nullptr;
  return check_kahler(analyze_point(c, p, opt));
}

VerificationReport check_killing(const PointAnalysis& a, const GeometryTolerances& tol) {
  VerificationReport rep;
  const int n = a.n;
  const auto& gam = a.curv.gamma;
  Vec ulow(n);
  for (int k = 0; k < n; ++k) {
    double s = 0.0;
    for (int m = 0; m < n; ++m) s += a.J(m, k) * a.dtau[m];
    ulow[k] = -s;
  }
  Mat U(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int m = 0; m < n; ++m) {
        s -= a.dJ[static_cast<size_t>(i)](m, j) * a.dtau[m];
        s -= a.J(m, j) * a.ddtau(i, m);
      }
      for (int k = 0; k < n; ++k) s -= gam(k, i, j) * ulow[k];
      U(i, j) = s;
    }
  const double un = frame_norm2(U, a.L);
  const double sn = frame_norm2(U + U.transpose(), a.L);
  rep.add_numeric("killing.symmetric_part", "sym(D u) = 0 for u = J grad tau",
                  un > 0.0 ? sn / (2.0 * un) : sn, tol.killing);
  const double bn = frame_norm2(a.hess, a.L);
  const double hn = frame_norm2(a.J.transpose() * a.hess * a.J - a.hess, a.L);
  rep.add_numeric("killing.hermitian_hessian", "Dd tau (J., J.) = Dd tau", bn > 0.0 ? hn / bn : hn,
                  tol.killing);
  return rep;
}

VerificationReport check_killing(const ChartMetric& chart, const Point& p, double h) {
  FdOptions opt;
  opt.h = h;
  return check_killing(analyze_point(chart, p, opt));
}

// ---- eigenstructure ----

namespace {

// Orthonormal frame (v/|v|, Jv/|Jv|, complement by pivoted Gram-Schmidt).
Mat adapted_frame(const PointAnalysis& a) {
  const int n = a.n;
  Mat E(n, n);
  Vec v = a.grad;
  Vec u = a.J * v;
  E.col(0) = v / vec_norm(v, a.g);
  Vec u1 = u - E.col(0) * E.col(0).dot(a.g * u);
  E.col(1) = u1 / vec_norm(u1, a.g);
  std::vector<bool> used(static_cast<size_t>(n), false);
  for (int col = 2; col < n; ++col) {
    int best = -1;
    double best_norm = -1.0;
    Vec best_vec;
    for (int i = 0; i < n; ++i) {
      if (used[static_cast<size_t>(i)]) continue;
      Vec r = Vec::Unit(n, i);
      for (int c = 0; c < col; ++c) r -= E.col(c) * E.col(c).dot(a.g * r);
      double nr = vec_norm(r, a.g);
      if (nr > best_norm) {
        best = i;
        best_norm = nr;
        best_vec = r;
      }
    }
    used[static_cast<size_t>(best)] = true;
    // One reorthogonalization pass.
    for (int c = 0; c < col; ++c) best_vec -= E.col(c) * E.col(c).dot(a.g * best_vec);
    E.col(col) = best_vec / vec_norm(best_vec, a.g);
  }
  return E;
}

struct BlockSplit {
  double v_val, h_val, residual;
};

BlockSplit split_blocks(const Mat& T, const Mat& E, int n) {
  Mat M = E.transpose() * T * E;
  BlockSplit b{};
  b.v_val = 0.5 * (M(0, 0) + M(1, 1));
  const int nh = n - 2;
  b.h_val = nh > 0 ? M.bottomRightCorner(nh, nh).trace() / nh : 0.0;
  Mat D = M;
  D(0, 0) -= b.v_val;
  D(1, 1) -= b.v_val;
  for (int i = 2; i < n; ++i) D(i, i) -= b.h_val;
  b.residual = D.norm() / std::max(1.0, M.norm());
  return b;
}

double rel_dev(double emp, double expct) { return std::fabs(emp - expct) / std::max(1.0, std::fabs(expct)); }

}  // namespace

EigenEmpirical empirical_eigenvalues(const PointAnalysis& a, VerificationReport* blocks,
                                     const GeometryTolerances& tol) {
  if (!(a.Q > 1e-12)) throw Error(ErrorCode::ZeroGradient, "|d tau|^2 below floor");
  Mat E = adapted_frame(a);
  BlockSplit bh = split_blocks(a.hess, E, a.n);
  BlockSplit br = split_blocks(a.curv.ricci, E, a.n);
  if (blocks) {
    blocks->add_numeric("eigen.hessian_blocks", "Dd tau = phi g on H, psi g on V, no cross terms",
                        bh.residual, tol.eigen);
    blocks->add_numeric("eigen.ricci_blocks", "Ric = lambda g on H, mu g on V, no cross terms",
                        br.residual, tol.eigen);
  }
  return {a.Q, bh.h_val, bh.v_val, br.h_val, br.v_val};
}

VerificationReport check_skrp_eigenstructure(const PointAnalysis& a, const EigenExpectation& ex,
                                             const GeometryTolerances& tol) {
  VerificationReport rep;
  EigenEmpirical e = empirical_eigenvalues(a, &rep, tol);
  rep.add_numeric("eigen.Q", "g(grad tau, grad tau) = Q(tau)", rel_dev(e.Q, ex.Q), tol.eigen);
  rep.add_numeric("eigen.phi", "H eigenvalue of Dd tau = phi(tau)", rel_dev(e.phi, ex.phi), tol.eigen);
  rep.add_numeric("eigen.psi", "V eigenvalue of Dd tau = psi(tau)", rel_dev(e.psi, ex.psi), tol.eigen);
  rep.add_numeric("eigen.lambda", "H eigenvalue of Ric = lambda(tau)", rel_dev(e.lambda, ex.lambda),
                  tol.eigen);
  rep.add_numeric("eigen.mu", "V eigenvalue of Ric = mu(tau)", rel_dev(e.mu, ex.mu), tol.eigen);
  return rep;
}

// ---- structure equations ----

VerificationReport check_structure_equations(const PointAnalysis& a, const StructureFrame& fr,
                                             const ChartMetric& chart, const FdOptions& opt,
                                             const GeometryTolerances& tol) {
  VerificationReport rep;
  const int n = a.n;
  const Point& p = a.p;
  const auto& gam = a.curv.gamma;
  const int nb = fr.base_dim;

  std::vector<std::function<Vec(const Point&)>> fields;
  fields.push_back(fr.v);
  fields.push_back(fr.u);
  for (int al = 0; al < nb; ++al) fields.push_back([&fr, al](const Point& x) { return fr.lift(x, al); });
  const size_t nf = fields.size();
  std::vector<Vec> val(nf);
  std::vector<std::vector<Vec>> d(nf);
  for (size_t f = 0; f < nf; ++f) {
    val[f] = fields[f](p);
    d[f] = fd_jet<Vec>(fields[f], chart, p, val[f], opt.h, opt.richardson, false).d1;
  }
  auto cov = [&](size_t x, size_t y) {
    Vec r = Vec::Zero(n);
    for (int k = 0; k < n; ++k) r += val[x][k] * d[y][static_cast<size_t>(k)];
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j) r[i] += gam(i, k, j) * val[x][k] * val[y][j];
    return r;
  };
  auto bracket = [&](size_t x, size_t y) {
    Vec r = Vec::Zero(n);
    for (int k = 0; k < n; ++k) r += val[x][k] * d[y][static_cast<size_t>(k)] - val[y][k] * d[x][static_cast<size_t>(k)];
    return r;
  };
  auto resid = [&](const Vec& lhs, const Vec& rhs) {
    double s = std::max({vec_norm(lhs, a.g), vec_norm(rhs, a.g), 1.0});
    return vec_norm(lhs - rhs, a.g) / s;
  };

  const auto [psi, phi] = fr.psi_phi(p);
  const Vec& v = val[0];
  const Vec& u = val[1];
  const double eps = fr.eps;
  const Mat h = fr.base_metric(p);
  const Mat Jb = fr.base_J(p);
  const Mat hJ = Jb.transpose() * h;  // h(J w, w')
  const Tensor3 bg = fr.base_gamma(p);

  rep.add_numeric("struct.vv", "D_v v = psi v", resid(cov(0, 0), psi * v), tol.structure);
  rep.add_numeric("struct.uu", "D_u u = -psi v", resid(cov(1, 1), -psi * v), tol.structure);
  rep.add_numeric("struct.vu", "D_v u = D_u v = psi u",
                  std::max(resid(cov(0, 1), psi * u), resid(cov(1, 0), psi * u)), tol.structure);
  double wv = 0.0, wu = 0.0, ww = 0.0, br = 0.0;
  for (int al = 0; al < nb; ++al) {
    const size_t wa = static_cast<size_t>(2 + al);
    const Vec& w = val[wa];
    wv = std::max({wv, resid(cov(wa, 0), phi * w), resid(cov(0, wa), phi * w)});
    Vec Jw = a.J * w;
    wu = std::max({wu, resid(cov(wa, 1), phi * Jw), resid(cov(1, wa), phi * Jw)});
    for (int be = 0; be < nb; ++be) {
      const size_t wb = static_cast<size_t>(2 + be);
      Vec rhs = -eps * (h(al, be) * v + hJ(al, be) * u);
      for (int ga = 0; ga < nb; ++ga) rhs += bg(ga, al, be) * val[static_cast<size_t>(2 + ga)];
      ww = std::max(ww, resid(cov(wa, wb), rhs));
      Vec brv = fr.vertical_part(p, bracket(wa, wb));
      br = std::max(br, resid(brv, -2.0 * eps * hJ(al, be) * u));
    }
  }
  rep.add_numeric("struct.wv", "D_w v = D_v w = phi w", wv, tol.structure);
  rep.add_numeric("struct.wu", "D_w u = D_u w = phi J w", wu, tol.structure);
  rep.add_numeric("struct.ww", "D_w w' = D^h_w w' - eps [h(w,w') v + h(Jw,w') u]", ww, tol.structure);
  rep.add_numeric("struct.bracket", "[w,w']^vert = -2 eps h(Jw,w') u", br, tol.structure);
  return rep;
}

// ---- conformal Einstein ----

EinsteinResult conformal_einstein(const PointAnalysis& a, double eta_expected) {
  if (!(std::fabs(a.tau) > 1e-12)) throw Error(ErrorCode::ZeroPotential, "|tau| below floor");
  const int n = a.n;
  const double t = a.tau;
  Mat rt = a.curv.ricci + (n - 2.0) / t * a.hess + (a.Y / t - (n - 1.0) * a.Q / (t * t)) * a.g;
  EinsteinResult r;
  r.scal_tilde = t * t * (a.ginv.cwiseProduct(rt)).sum();
  Mat tf = rt - (r.scal_tilde / n) * a.g / (t * t);
  const double rn = frame_norm2(rt, a.L);
  const double tn = frame_norm2(tf, a.L);
  r.trace_free = rn > 0.0 ? tn / rn : tn;
  r.scal_dev = eta_expected != 0.0 ? std::fabs(r.scal_tilde - 2.0 * eta_expected) / std::fabs(2.0 * eta_expected)
                                   : std::fabs(r.scal_tilde);
  return r;
}

VerificationReport conformal_einstein_residual(const PointAnalysis& a, double eta_expected,
                                               const GeometryTolerances& tol) {
  VerificationReport rep;
  EinsteinResult r = conformal_einstein(a, eta_expected);
  rep.add_numeric("einstein.trace_free", "Ric~ = (s~/n) g~ for g~ = g / tau^2", r.trace_free, tol.einstein);
  rep.add_numeric("einstein.scal", "s~ = 2 eta", r.scal_dev, tol.scal,
                  "s~ = " + std::to_string(r.scal_tilde));
  return rep;
}

VerificationReport conformal_einstein_residual(const ChartMetric& chart, const Point& p, double h,
                                               double eta_expected) {
  FdOptions opt;
  opt.h = h;
  ChartMetric c = chart;
  c.complex_structure_at = nullptr;
  return conformal_einstein_residual(analyze_point(c, p, opt), eta_expected);
}

// ---- curvature identities ----

VerificationReport check_curvature_identities(const PointAnalysis& a, const ChartMetric& chart,
                                              const FdOptions& opt, unsigned long long seed,
                                              const GeometryTolerances& tol) {
  VerificationReport rep;
  const int n = a.n;
  const Tensor4& R = a.curv.riemann;
  const double rn = frame_norm4(R, a.L);
  Tensor4 t1(n), t2(n), t3(n), t4(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          t1(i, j, k, l) = R(i, j, k, l) + R(j, i, k, l);
          t2(i, j, k, l) = R(i, j, k, l) + R(i, j, l, k);
          t3(i, j, k, l) = R(i, j, k, l) - R(k, l, i, j);
          t4(i, j, k, l) = R(i, j, k, l) + R(j, k, i, l) + R(k, i, j, l);
        }
  auto rel = [&](const Tensor4& t) { return rn > 0.0 ? frame_norm4(t, a.L) / rn : frame_norm4(t, a.L); };
  rep.add_numeric("curv.antisym", "R(i,j,k,l) = -R(j,i,k,l) = -R(i,j,l,k)",
                  std::max(rel(t1), rel(t2)), tol.antisym);
  rep.add_numeric("curv.pair", "R(i,j,k,l) = R(k,l,i,j)", rel(t3), tol.pair);
  rep.add_numeric("curv.bianchi1", "R(i,j,k,.) + R(j,k,i,.) + R(k,i,j,.) = 0", rel(t4), tol.pair);

  if (a.has_J) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 4; ++trial) {
      Vec u(n), w(n);
      for (int i = 0; i < n; ++i) u[i] = nd(rng);
      for (int i = 0; i < n; ++i) w[i] = nd(rng);
      u /= vec_norm(u, a.g);
      w /= vec_norm(w, a.g);
      Mat A = Mat::Zero(n, n);  // A(l,k): R(u,w) e_k, component l
      Mat low = Mat::Zero(n, n);
      for (int k = 0; k < n; ++k)
        for (int m = 0; m < n; ++m) {
          double s = 0.0;
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) s += u[i] * w[j] * R(i, j, k, m);
          low(m, k) = s;
        }
      A = a.ginv * low;
      const double re = 0.5 * A.trace();
      const double im = -0.5 * (a.J * A).trace();
      const double rho = (a.J * u).dot(a.curv.ricci * w);
      worst = std::max(worst, std::fabs(re) + std::fabs(im - rho));
    }
    rep.add_numeric("curv.complex_trace", "trace_C R(u,v) = i rho(u,v), rho(u,v) = Ric(Ju,v)", worst,
                    tol.trace);
  }

  // Contracted Bianchi identity from Ricci samples around p. A third derivative:
  // the inner step is raised to keep stencil noise below the outer truncation error.
  {
    const double H = 1e-2;
    FdOptions inner = opt;
    inner.h = std::max(opt.h, 1e-3);
    const PointAnalysis& ctr = inner.h == opt.h ? a : analyze_point(chart, a.p, inner);
    Vec hv = step_vector(a.p, H);
    std::vector<Mat> dric(static_cast<size_t>(n));
    Vec ds(n);
    ChartMetric bare = chart;
    bare.potential_at = nullptr;
    bare.complex_structure_at = nullptr;
    for (int k = 0; k < n; ++k) {
      auto sample = [&](double s) {
        Point x = a.p;
        x[k] += s;
        return analyze_point(bare, x, inner).curv;
      };
      CurvatureBundle p1 = sample(hv[k]), m1 = sample(-hv[k]);
      CurvatureBundle p2 = sample(0.5 * hv[k]), m2 = sample(-0.5 * hv[k]);
      Mat dc = (p1.ricci - m1.ricci) / (2.0 * hv[k]);
      Mat df = (p2.ricci - m2.ricci) / hv[k];
      dric[static_cast<size_t>(k)] = (4.0 * df - dc) / 3.0;
      double sc = (p1.scal - m1.scal) / (2.0 * hv[k]);
      double sf = (p2.scal - m2.scal) / hv[k];
      ds[k] = (4.0 * sf - sc) / 3.0;
    }
    const auto& gam = ctr.curv.gamma;
    const Mat& Ric = ctr.curv.ricci;
    Vec div = Vec::Zero(n);
    for (int k = 0; k < n; ++k) {
      double s = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double nab = dric[static_cast<size_t>(i)](j, k);
          for (int l = 0; l < n; ++l) nab -= gam(l, i, j) * Ric(l, k) + gam(l, i, k) * Ric(j, l);
          s += ctr.ginv(i, j) * nab;
        }
      div[k] = s;
    }
    const double res = covec_norm(2.0 * div - ds, ctr.L);
    rep.add_numeric("curv.contracted_bianchi", "2 div Ric = ds", res / (1.0 + covec_norm(ds, ctr.L)),
                    tol.bianchi);
  }
  return rep;
}

double fd_convergence_ratio(const ChartMetric& chart, const Point& p, double h, double eta_expected) {
  ChartMetric c = chart;
  c.complex_structure_at = nullptr;
  FdOptions o1;
  o1.h = h;
  o1.richardson = false;
  FdOptions o2 = o1;
  o2.h = 0.5 * h;
  const double r1 = conformal_einstein(analyze_point(c, p, o1), eta_expected).trace_free;
  const double r2 = conformal_einstein(analyze_point(c, p, o2), eta_expected).trace_free;
  return r2 > 0.0 ? r1 / r2 : HUGE_VAL;
}

}  // namespace klab
