#include "klab/bundlemetric.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "klab/errors.hpp"
#include "klab/parallel.hpp"
#include "klab/specfun.hpp"

namespace klab {

// ---- base geometries ----

CVec BaseGeometry::complex_point(const Point& y) const {
  CVec w(complex_dim);
  for (int j = 0; j < complex_dim; ++j) w[j] = cplx(y[2 * j], y[2 * j + 1]);
  return w;
}

double BaseGeometry::potential(const Point& y) const {
  const double n2 = y.squaredNorm();
  if (kp == 0.0) return coef * n2;
  return coef / kp * std::log1p(kp * n2);
}

CVec BaseGeometry::d_potential(const Point& y) const {
  const double n2 = y.squaredNorm();
  return (coef / (1.0 + kp * n2)) * complex_point(y).conjugate();
}

Eigen::MatrixXcd BaseGeometry::hermitian_metric(const Point& y) const {
  const double s = 1.0 + kp * y.squaredNorm();
  CVec w = complex_point(y);
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Identity(complex_dim, complex_dim) * cplx(s);
  h -= kp * (w.conjugate() * w.transpose());  // h(j,k) -= kp conj(y_j) y_k
  return h * (coef / (s * s));
}

Mat BaseGeometry::metric(const Point& y) const {
  Eigen::MatrixXcd h = hermitian_metric(y);
  const int n = real_dim();
  Mat g(n, n);
  for (int j = 0; j < complex_dim; ++j)
    for (int k = 0; k < complex_dim; ++k) {
      const double re = h(j, k).real(), im = h(j, k).imag();
      g(2 * j, 2 * k) = re;
      g(2 * j, 2 * k + 1) = im;
      g(2 * j + 1, 2 * k) = -im;
      g(2 * j + 1, 2 * k + 1) = re;
    }
  return 0.5 * (g + g.transpose());
}

Mat BaseGeometry::complex_structure() const { return standard_complex_structure(real_dim()); }

Mat BaseGeometry::kahler_form(const Point& y) const {
  return complex_structure().transpose() * metric(y);
}

bool BaseGeometry::in_domain(const Point& y) const {
  if (!y.allFinite()) return false;
  return 1.0 + kp * y.squaredNorm() > 1e-2;
}

ChartMetric BaseGeometry::chart() const {
  ChartMetric c;
  c.n = real_dim();
  BaseGeometry b = *this;
  c.metric_at = [b](const Point& y) { return b.metric(y); };
  const int n = c.n;
  c.complex_structure_at = [n](const Point&) { return standard_complex_structure(n); };
  c.domain_probe = [b](const Point& y) { return b.in_domain(y); };
  return c;
}

BaseGeometry base_constant_curvature(double kappa) {
  BaseGeometry b;
  b.complex_dim = 1;
  b.kappa = kappa;
  b.coef = 4.0;
  b.kp = kappa;
  return b;
}

BaseGeometry base_fubini_study(double kappa, int q) {
  if (!(kappa > 0.0)) throw Error(ErrorCode::NonpositiveKappa, "Fubini-Study base needs kappa > 0");
  if (q < 2) throw Error(ErrorCode::InvalidDimension, "Fubini-Study base needs complex dimension >= 2");
  BaseGeometry b;
  b.complex_dim = q;
  b.kappa = kappa;
  b.coef = 2.0 * (q + 1) / kappa;
  b.kp = 1.0;
  return b;
}

// ---- connection ----

CVec ConnectionData::gamma(const Point& y) const {
  return (eps * a * scale) * base.d_potential(y);
}

Eigen::VectorXcd ConnectionData::gamma_real(const Point& y) const {
  CVec g = gamma(y);
  Eigen::VectorXcd out(base.real_dim());
  for (int j = 0; j < base.complex_dim; ++j) {
    out[2 * j] = g[j];
    out[2 * j + 1] = cplx(0.0, 1.0) * g[j];
  }
  return out;
}

double ConnectionData::weight(const Point& y) const { return std::exp(eps * a * scale * base.potential(y)); }

ConnectionData connection_form(const BaseGeometry& base, int eps, double a, double scale) {
  if (a == 0.0) throw Error(ErrorCode::DegenerateParameters, "a must be nonzero");
  ConnectionData c;
  c.base = base;
  c.eps = eps;
  c.a = a;
  c.scale = scale;
  return c;
}

std::pair<double, double> connection_residuals(const ConnectionData& conn, const Point& y, double h) {
  const int n = conn.base.real_dim();
  auto probe = [&conn](const Point& x) { return conn.base.in_domain(x); };
  auto packed = [&conn, n](const Point& x) {
    Eigen::VectorXcd g = conn.gamma_real(x);
    Vec v(2 * n);
    v.head(n) = g.real();
    v.tail(n) = g.imag();
    return v;
  };
  Mat jac = fd_jacobian(packed, y, h, probe);
  const Mat omega = conn.base.kahler_form(y);
  double curv = 0.0;
  for (int A = 0; A < n; ++A)
    for (int B = 0; B < n; ++B) {
      cplx dAB(jac(B, A) - jac(A, B), jac(n + B, A) - jac(n + A, B));
      cplx res = cplx(0.0, 1.0) * dAB + 2.0 * conn.eps * conn.a * omega(A, B);
      curv = std::max(curv, std::abs(res));
    }
  auto logw = [&conn](const Point& x) {
    Vec v(1);
    v[0] = std::log(conn.weight(x));
    return v;
  };
  Mat dw = fd_jacobian(logw, y, h, probe);
  Eigen::VectorXcd g = conn.gamma_real(y);
  double wres = 0.0;
  for (int A = 0; A < n; ++A) wres = std::max(wres, std::fabs(dw(0, A) - 2.0 * g[A].real()));
  return {curv, wres};
}

// ---- tau <-> log r ----

namespace {

constexpr int kChebN = 40;

// Extended precision keeps the rounding noise of tau(log r) well below the
// finite-difference noise floor.
long double clenshaw(const std::vector<double>& c, long double x) {
  long double b1 = 0.0L, b2 = 0.0L;
  for (size_t j = c.size(); j-- > 1;) {
    long double t = 2.0L * x * b1 - b2 + c[j];
    b2 = b1;
    b1 = t;
  }
  return x * b1 - b2 + c[0];
}

bool q_positive(const RatFuncD& Q, Interval iv, int samples = 401) {
  for (int i = 0; i <= samples; ++i) {
    const double t = iv.lo + (iv.hi - iv.lo) * i / samples;
    const double q = Q(t);
    if (!std::isfinite(q) || !(q > 0.0)) return false;
  }
  return true;
}

}  // namespace

TauLogR::TauLogR(const RatFuncD& Q, double a, Interval iv) : Q_(Q), a_(a), iv_(iv) {
  build(iv.lo, iv.hi, 0);
  const double mid = 0.5 * (iv.lo + iv.hi);
  auto it = std::lower_bound(pieces_.begin(), pieces_.end(), mid, [](const Piece& p, double t) { return p.hi < t; });
  if (it == pieces_.end()) --it;
  gauge_ = eval_piece(*it, mid);
}

double TauLogR::integrand(double tau) const { return a_ / Q_(tau); }

void TauLogR::build(double lo, double hi, int depth) {
  std::vector<double> f(kChebN), c(kChebN);
  const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
  for (int k = 0; k < kChebN; ++k) f[static_cast<size_t>(k)] = integrand(mid + half * std::cos(M_PI * (k + 0.5) / kChebN));
  double cmax = 0.0;
  for (int j = 0; j < kChebN; ++j) {
    double s = 0.0;
    for (int k = 0; k < kChebN; ++k) s += f[static_cast<size_t>(k)] * std::cos(M_PI * j * (k + 0.5) / kChebN);
    c[static_cast<size_t>(j)] = 2.0 * s / kChebN;
    cmax = std::max(cmax, std::fabs(c[static_cast<size_t>(j)]));
  }
  c[0] *= 0.5;
  const double tail = std::max(std::fabs(c[kChebN - 1]), std::fabs(c[kChebN - 2]));
  if (tail > 1e-15 * cmax && depth < 40) {
    build(lo, mid, depth + 1);
    build(mid, hi, depth + 1);
    return;
  }
  Piece p;
  p.lo = lo;
  p.hi = hi;
  p.b.assign(kChebN + 1, 0.0);
  auto cc = [&](int j) { return j < kChebN ? c[static_cast<size_t>(j)] : 0.0; };
  p.b[1] = cc(0) - 0.5 * cc(2);
  for (int j = 2; j <= kChebN; ++j) p.b[static_cast<size_t>(j)] = (cc(j - 1) - cc(j + 1)) / (2.0 * j);
  for (auto& x : p.b) x *= half;
  double at_m1 = 0.0;
  for (int j = 1; j <= kChebN; ++j) at_m1 += (j % 2 ? -1.0 : 1.0) * p.b[static_cast<size_t>(j)];
  p.b[0] = -at_m1;
  p.L0 = 0.0;
  if (!pieces_.empty()) {
    const Piece& prev = pieces_.back();
    p.L0 = eval_piece(prev, prev.hi);
  }
  pieces_.push_back(std::move(p));
}

long double TauLogR::eval_piece(const Piece& p, long double tau) const {
  const long double x = (2.0L * tau - p.lo - p.hi) / (static_cast<long double>(p.hi) - p.lo);
  return p.L0 + clenshaw(p.b, x);
}

double TauLogR::logr_of_tau(double tau) const {
  const double slack = 1e-12 * (iv_.hi - iv_.lo);
  if (!(tau >= iv_.lo - slack && tau <= iv_.hi + slack)) {
    throw Error(ErrorCode::OutOfInterval, "tau outside the working interval");
  }
  auto it = std::lower_bound(pieces_.begin(), pieces_.end(), tau,
                             [](const Piece& p, double t) { return p.hi < t; });
  if (it == pieces_.end()) --it;
  return static_cast<double>(eval_piece(*it, tau) - gauge_);
}

Interval TauLogR::logr_range() const {
  const double l0 = logr_of_tau(iv_.lo), l1 = logr_of_tau(iv_.hi);
  return {std::min(l0, l1), std::max(l0, l1)};
}

double TauLogR::tau_of_logr(long double logr) const {
  const long double target = logr + gauge_;
  const bool up = a_ > 0.0;
  const long double e0 = eval_piece(pieces_.front(), iv_.lo), e1 = eval_piece(pieces_.back(), iv_.hi);
  const long double tmin = std::min(e0, e1), tmax = std::max(e0, e1);
  const long double slack = 1e-14L * std::max(1.0L, tmax - tmin);
  if (!(target >= tmin - slack && target <= tmax + slack)) {
    throw Error(ErrorCode::OutOfInterval, "log r outside the image of the working interval");
  }
  // Piece whose value range contains the target.
  size_t k = 0;
  for (; k + 1 < pieces_.size(); ++k) {
    const long double end = eval_piece(pieces_[k], pieces_[k].hi);
    if (up ? target <= end : target >= end) break;
  }
  const Piece& p = pieces_[k];
  long double tl = p.lo, tr = p.hi;
  const long double gl = eval_piece(p, tl) - target, gr = eval_piece(p, tr) - target;
  long double t = (gr != gl) ? tl + (tr - tl) * (-gl) / (gr - gl) : 0.5L * (tl + tr);
  t = std::clamp(t, tl, tr);
  for (int it = 0; it < 100; ++it) {
    const long double g = eval_piece(p, t) - target;
    if (g == 0.0L) break;
    if ((g > 0.0L) == up) tr = t;
    else tl = t;
    long double tn = t - g / integrand(static_cast<double>(t));
    if (!(tn > tl && tn < tr)) tn = 0.5L * (tl + tr);
    if (std::fabs(tn - t) <= 1e-19L * std::max(1.0L, std::fabs(t))) {
      t = tn;
      break;
    }
    t = tn;
  }
  return static_cast<double>(t);
}

std::shared_ptr<const TauLogR> tau_r_transform(const CaseParams& params, double a, Interval iv) {
  if (a == 0.0) throw Error(ErrorCode::DegenerateParameters, "a must be nonzero");
  if (!(iv.lo < iv.hi)) throw Error(ErrorCode::ParameterDomain, "empty interval");
  RatFuncD Q(build_family(params).grad_sq);
  if (!q_positive(Q, iv)) throw Error(ErrorCode::NonpositiveQ, "Q is not positive on the interval");
  return std::make_shared<const TauLogR>(Q, a, iv);
}

// ---- construction data ----

double ConstructionData::f_of_tau(double tau) const { return eps == 0 ? 1.0 : 2.0 * eps * (tau - c); }

namespace {

bool interval_ok(const RatFuncD& Q, Interval iv, int eps, double c) {
  if (iv.lo <= 0.0 && iv.hi >= 0.0) return false;
  if (eps != 0 && !(eps * (iv.lo - c) > 0.0 && eps * (iv.hi - c) > 0.0)) return false;
  return q_positive(Q, iv);
}

}  // namespace

Interval default_interval(const CaseParams& p, int eps) {
  RatFuncD Q(build_family(p).grad_sq);
  std::vector<Interval> cand;
  double c = 0.0;
  switch (p.tag) {
    case CaseTag::I:
      cand = {{0.2, 0.8}, {-0.8, -0.2}, {1.2, 1.8}, {-1.8, -1.2}, {0.05, 0.15}, {-0.15, -0.05}, {2, 3}, {-3, -2}};
      break;
    case CaseTag::II:
      cand = {{0.5, 1.5}, {0.1, 0.4}, {2, 3}, {4, 6}};
      if (eps < 0)
        for (auto& iv : cand) iv = {-iv.hi, -iv.lo};
      break;
    case CaseTag::III: {
      c = to_double(p.c);
      const bool above = eps * (c > 0 ? 1 : -1) > 0;  // t = tau / c > 1
      std::vector<Interval> ts = above ? std::vector<Interval>{{1.5, 2.5}, {3, 5}, {1.1, 1.4}, {6, 10}}
                                       : std::vector<Interval>{{0.3, 0.7}, {0.1, 0.25}, {-0.7, -0.3}, {-2, -1}};
      for (auto t : ts) {
        double a = t.lo * c, b = t.hi * c;
        cand.push_back({std::min(a, b), std::max(a, b)});
      }
      break;
    }
  }
  for (auto iv : cand)
    if (interval_ok(Q, iv, eps, c)) return iv;
  throw Error(ErrorCode::ParameterDomain, "no default interval with Q > 0 for " + p.describe());
}

ConstructionData make_construction(const CaseParams& p, int eps, double a, const ConstructionOptions& opt) {
  if (a == 0.0) throw Error(ErrorCode::DegenerateParameters, "a must be nonzero");
  if (eps < -1 || eps > 1) throw Error(ErrorCode::ParameterDomain, "eps must be -1, 0 or 1");
  if (p.tag == CaseTag::I && eps != 0) throw Error(ErrorCode::ParameterDomain, "case I requires eps = 0");
  if (p.tag != CaseTag::I && eps == 0) throw Error(ErrorCode::ParameterDomain, "cases II and III require eps = +-1");
  ConstructionData d;
  d.m = p.m;
  d.params = p;
  d.a = a;
  d.eps = eps;
  d.c = p.tag == CaseTag::III ? to_double(p.c) : 0.0;
  d.fns = build_family(p);
  d.Q = RatFuncD(d.fns.grad_sq);
  d.interval = opt.interval ? *opt.interval : default_interval(p, eps);
  if (d.interval.lo <= 0.0 && d.interval.hi >= 0.0)
    throw Error(ErrorCode::ParameterDomain, "interval contains tau = 0");
  if (eps != 0 && !(eps * (d.interval.lo - d.c) > 0.0 && eps * (d.interval.hi - d.c) > 0.0))
    throw Error(ErrorCode::ParameterDomain, "eps (tau - c) must be positive on the interval");
  d.transform = tau_r_transform(p, a, d.interval);
  d.kappa_rule = to_double(expected_kappa(p, eps));
  d.kappa = d.kappa_rule + opt.kappa_offset;
  d.eta = to_double(expected_eta(p));
  d.base = p.m == 2 ? base_constant_curvature(d.kappa) : base_fubini_study(d.kappa, static_cast<int>(p.m) - 1);
  d.conn = connection_form(d.base, eps, a, opt.conn_scale);
  return d;
}

// ---- assembled chart ----

AssembledChart assemble_chart(const ConstructionData& data) {
  auto d = std::make_shared<const ConstructionData>(data);
  const int nb = d->base.real_dim();
  const int n = nb + 2;
  const Interval lr = d->transform->logr_range();

  auto zpart = [nb](const Point& p) { return cplx(p[nb], p[nb + 1]); };
  auto logr = [d, nb, zpart](const Point& p) {
    const cplx z = zpart(p);
    return 0.5L * std::log(static_cast<long double>(z.real()) * z.real() + static_cast<long double>(z.imag()) * z.imag()) +
           0.5L * std::log(static_cast<long double>(d->conn.weight(p.head(nb))));
  };

  AssembledChart out;
  ChartMetric& ch = out.chart;
  ch.n = n;
  ch.domain_probe = [d, nb, lr, logr, zpart](const Point& p) {
    if (!p.allFinite() || !d->base.in_domain(p.head(nb))) return false;
    if (std::abs(zpart(p)) < 1e-3) return false;
    const double L = logr(p);
    return L > lr.lo && L < lr.hi;
  };
  ch.potential_at = [d, logr](const Point& p) { return d->transform->tau_of_logr(logr(p)); };
  ch.complex_structure_at = [n](const Point&) { return standard_complex_structure(n); };
  ch.metric_at = [d, nb, n, zpart](const Point& p) {
    const Point y = p.head(nb);
    const cplx z = zpart(p);
    const double w = d->conn.weight(y);
    const Eigen::VectorXcd G = d->conn.gamma_real(y);
    const double r2 = std::norm(z) * w;
    const long double r2l = (static_cast<long double>(z.real()) * z.real() + static_cast<long double>(z.imag()) * z.imag()) *
                            static_cast<long double>(w);
    const double tau = d->transform->tau_of_logr(0.5L * std::log(r2l));
    const double theta = d->Q(tau) / (d->a * d->a * r2);
    const double f = d->f_of_tau(tau);
    Eigen::VectorXcd V(n);
    for (int A = 0; A < nb; ++A) V[A] = G[A] * z;
    V[nb] = 1.0;
    V[nb + 1] = cplx(0.0, 1.0);
    Mat g(n, n);
    for (int A = 0; A < n; ++A)
      for (int B = 0; B < n; ++B) g(A, B) = theta * w * (V[A] * std::conj(V[B])).real();
    g.topLeftCorner(nb, nb) += f * d->base.metric(y);
    return Mat(0.5 * (g + g.transpose()));
  };

  StructureFrame& fr = out.frame;
  fr.eps = d->eps;
  fr.base_dim = nb;
  const double a = d->a;
  fr.v = [nb, n, a](const Point& p) {
    Vec v = Vec::Zero(n);
    v[nb] = a * p[nb];
    v[nb + 1] = a * p[nb + 1];
    return v;
  };
  fr.u = [nb, n, a](const Point& p) {
    Vec v = Vec::Zero(n);
    v[nb] = -a * p[nb + 1];
    v[nb + 1] = a * p[nb];
    return v;
  };
  fr.lift = [d, nb, n, zpart](const Point& p, int alpha) {
    Vec v = Vec::Zero(n);
    v[alpha] = 1.0;
    const cplx comp = -d->conn.gamma_real(p.head(nb))[alpha] * zpart(p);
    v[nb] = comp.real();
    v[nb + 1] = comp.imag();
    return v;
  };
  fr.vertical_part = [d, nb, n, zpart](const Point& p, const Vec& X) {
    const Eigen::VectorXcd G = d->conn.gamma_real(p.head(nb));
    cplx vc(X[nb], X[nb + 1]);
    for (int A = 0; A < nb; ++A) vc += X[A] * G[A] * zpart(p);
    Vec v = Vec::Zero(n);
    v[nb] = vc.real();
    v[nb + 1] = vc.imag();
    return v;
  };
  fr.base_metric = [d, nb](const Point& p) { return d->base.metric(p.head(nb)); };
  fr.base_J = [d](const Point&) { return d->base.complex_structure(); };
  const ChartMetric bchart = d->base.chart();
  fr.base_gamma = [bchart, nb](const Point& p) { return christoffels(bchart, p.head(nb), 1e-4); };
  fr.psi_phi = [d, logr](const Point& p) {
    const double L = logr(p);
    auto theta = [&](double l) {
      const double t = d->transform->tau_of_logr(l);
      return d->Q(t) / (d->a * d->a * std::exp(2.0 * l));
    };
    auto fl = [&](double l) { return d->f_of_tau(d->transform->tau_of_logr(l)); };
    auto deriv = [&](const auto& F, double step) {
      const double c1 = (F(L + step) - F(L - step)) / (2.0 * step);
      const double c2 = (F(L + 0.5 * step) - F(L - 0.5 * step)) / step;
      return (4.0 * c2 - c1) / 3.0;
    };
    const double step = 1e-3 * std::max(1e-3, d->transform->logr_range().hi - d->transform->logr_range().lo);
    const double th = theta(L);
    const double psi = d->a * (2.0 * th + deriv(theta, step)) / (2.0 * th);
    const double phi = d->eps == 0 ? 0.0 : d->a * deriv(fl, step) / (2.0 * fl(L));
    return std::make_pair(psi, phi);
  };
  return out;
}

Point sample_point(const ConstructionData& data, std::mt19937_64& rng, double central) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const int nb = data.base.real_dim();
  const double rad = 0.5 / std::max(1.0, std::sqrt(std::fabs(data.base.kp)));
  Point p(nb + 2);
  for (int tries = 0; tries < 1000; ++tries) {
    Vec y(nb);
    for (int i = 0; i < nb; ++i) y[i] = rad * U(rng);
    if (y.norm() > rad) continue;
    const double mid = 0.5 * (data.interval.lo + data.interval.hi);
    const double half = 0.5 * (data.interval.hi - data.interval.lo);
    const double tau = mid + central * half * U(rng);
    const double L = data.transform->logr_of_tau(tau);
    const double modz = std::exp(L) / std::sqrt(data.conn.weight(y));
    const double ang = M_PI * U(rng);
    p.head(nb) = y;
    p[nb] = modz * std::cos(ang);
    p[nb + 1] = modz * std::sin(ang);
    if (modz >= 2e-3 && std::isfinite(modz)) return p;
  }
  throw Error(ErrorCode::DomainViolation, "could not sample a chart point");
}

// ---- certification ----

namespace {

GeometryTolerances tolerances(double relaxed) {
  GeometryTolerances t;
  if (relaxed > 0.0) {
    for (double* v : {&t.kahler, &t.killing, &t.eigen, &t.structure, &t.einstein, &t.scal, &t.trace})
      *v = std::max(*v, relaxed);
  }
  return t;
}

double rel_dev(double emp, double ex) { return std::fabs(emp - ex) / std::max(1.0, std::fabs(ex)); }

VerificationReport certify_point(const ConstructionData& data, const AssembledChart& ac, const Point& p,
                                 const CertifyOptions& opt, size_t index) {
  VerificationReport r;
  const GeometryTolerances tol = tolerances(opt.relaxed_tol);
  try {
    FdOptions fo;
    fo.h = opt.h;
    PointAnalysis a = analyze_point(ac.chart, p, fo);
    r.append(check_kahler(a, tol));
    r.append(check_killing(a, tol));

    const SeptupleState ex = septuple_values(data.fns, a.tau);
    r.append(check_skrp_eigenstructure(a, {ex[0], ex[3], ex[4], ex[5], ex[6]}, tol));
    r.add_numeric("eigen.Y", "Laplacian of tau = Y(tau)", rel_dev(a.Y, ex[1]), tol.eigen);
    r.add_numeric("eigen.scal", "scalar curvature = s(tau)", rel_dev(a.curv.scal, ex[2]), tol.eigen);

    const Vec v = ac.frame.v(p), u = ac.frame.u(p);
    const double Qt = data.Q(a.tau);
    const double gv = v.dot(a.g * v), gu = u.dot(a.g * u);
    r.add_numeric("bundle.vertical_norm", "g(v,v) = g(u,u) = Q(tau), v = a z d/dz",
                  std::max(std::fabs(gv - Qt), std::fabs(gu - Qt)) / std::max(1.0, Qt), 1e-8);
    const Vec dv = a.grad - v;
    r.add_numeric("bundle.grad_is_v", "grad tau = v",
                  std::sqrt(std::max(0.0, dv.dot(a.g * dv))) / std::sqrt(std::max(Qt, 1e-300)), 1e-6);

    r.append(check_structure_equations(a, ac.frame, ac.chart, fo, tol));
    r.append(conformal_einstein_residual(a, data.eta, tol));
    r.append(check_curvature_identities(a, ac.chart, fo, opt.seed * 1000003ULL + index, tol));

    const int nb = data.base.real_dim();
    const Point y = p.head(nb);
    const ChartMetric bchart = data.base.chart();
    ChartMetric bare = bchart;
    bare.complex_structure_at = nullptr;
    PointAnalysis b = analyze_point(bare, y, fo);
    const double ein = frame_norm2(b.curv.ricci - data.kappa * b.g, b.L) /
                       std::max(1.0, std::fabs(data.kappa) * std::sqrt(static_cast<double>(nb)));
    r.add_numeric("base.einstein", "Ric_h = kappa h", ein, std::max(1e-6, opt.relaxed_tol));
    auto [cres, wres] = connection_residuals(data.conn, y, opt.h);
    r.add_numeric("connection.curvature", "i dGamma + 2 eps a omega_h = 0", cres, 1e-10);
    r.add_numeric("connection.weight", "d log<w,w> = 2 Re Gamma", wres, 1e-10);
  } catch (const std::exception& e) {
    r.add_failure("point.evaluation", "evaluation at sample point", e.what());
  }
  return r;
}

}  // namespace

VerificationReport certify_construction(const ConstructionData& data, const CertifyOptions& opt) {
  const AssembledChart ac = assemble_chart(data);
  std::mt19937_64 rng(opt.seed);
  std::vector<Point> pts;
  for (size_t i = 0; i < opt.points; ++i) pts.push_back(sample_point(data, rng, 0.8));
  auto reports = parallel_map<VerificationReport>(
      pts.size(), [&](size_t i) { return certify_point(data, ac, pts[i], opt, i); });
  VerificationReport out = merge_worst(reports);

  if (opt.ratio_points > 0) {
    std::mt19937_64 rng2(opt.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<Point> rp;
    for (size_t i = 0; i < opt.ratio_points; ++i) rp.push_back(sample_point(data, rng2, 0.5));
    auto ratios = parallel_map<double>(rp.size(), [&](size_t i) {
      try {
        return fd_convergence_ratio(ac.chart, rp[i], 1e-2, data.eta);
      } catch (const std::exception&) {
        return static_cast<double>(NAN);
      }
    });
    const GeometryTolerances tol;
    double worst = 0.0;
    std::ostringstream note;
    note.precision(6);
    note << "ratios:";
    bool pass = true;
    for (double q : ratios) {
      note << ' ' << q;
      const bool ok = std::isfinite(q) && q >= tol.ratio_lo && q <= tol.ratio_hi;
      pass = pass && ok;
      worst = std::isfinite(q) ? std::max(worst, std::fabs(q - 4.0)) : HUGE_VAL;
      if (!std::isfinite(q)) break;
    }
    ReportEntry e;
    e.tag = "fd.convergence_ratio";
    e.paper_eq = "trace-free Einstein residual(h) / residual(h/2) in [3.5, 4.5]";
    e.residual = worst;
    e.tolerance = 0.5;
    e.pass = pass;
    e.note = note.str();
    out.add(e);
  }
  return out;
}

// ---- product example ----

ChartMetric product_example_chart(unsigned m, double K, double lin) {
  if (m != 2) throw Error(ErrorCode::InvalidDimension, "product example is implemented for m = 2");
  if (!(K > 0.0)) throw Error(ErrorCode::ParameterDomain, "K must be positive");
  ChartMetric c;
  c.n = 4;
  c.metric_at = [K](const Point& p) {
    const double s1 = 1.0 + K * (p[0] * p[0] + p[1] * p[1]);
    const double s2 = 1.0 - K * (p[2] * p[2] + p[3] * p[3]);
    Mat g = Mat::Zero(4, 4);
    g(0, 0) = g(1, 1) = 4.0 / (s1 * s1);
    g(2, 2) = g(3, 3) = 4.0 / (s2 * s2);
    return g;
  };
  c.complex_structure_at = [](const Point&) { return standard_complex_structure(4); };
  c.potential_at = [K, lin](const Point& p) {
    const double n1 = K * (p[0] * p[0] + p[1] * p[1]);
    return lin / std::sqrt(K) * (1.0 - n1) / (1.0 + n1);
  };
  c.domain_probe = [K](const Point& p) {
    return p.allFinite() && 1.0 - K * (p[2] * p[2] + p[3] * p[3]) > 1e-2;
  };
  return c;
}

VerificationReport check_product_example(double K, double lin, size_t points, unsigned long long seed,
                                         double h, double tol) {
  const ChartMetric chart = product_example_chart(2, K, lin);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const double rad = 0.5 / std::sqrt(K);
  std::vector<Point> pts;
  while (pts.size() < points) {
    Point p(4);
    for (int i = 0; i < 4; ++i) p[i] = rad * U(rng);
    if (std::hypot(p[0], p[1]) > rad || std::hypot(p[2], p[3]) > rad) continue;
    pts.push_back(p);
  }
  struct Sample {
    VerificationReport rep;
    double integral = NAN;
  };
  auto samples = parallel_map<Sample>(pts.size(), [&](size_t i) {
    Sample s;
    try {
      FdOptions fo;
      fo.h = h;
      PointAnalysis a = analyze_point(chart, pts[i], fo);
      const int m = 2;
      Mat gamma = a.g;
      gamma.bottomRightCorner(2, 2).setZero();
      gamma.topRightCorner(2, 2).setZero();
      gamma.bottomLeftCorner(2, 2).setZero();
      const Mat target = -K * a.tau * gamma;
      s.rep.add_numeric("product.hessian", "D d tau = -K tau gamma (sphere metric gamma)",
                        frame_norm2(a.hess - target, a.L) / std::max(1.0, frame_norm2(target, a.L)), tol);
      s.rep.add_numeric("product.laplacian", "Laplacian tau = -2 K tau",
                        std::fabs(a.Y + 2.0 * K * a.tau) / std::max(1.0, std::fabs(2.0 * K * a.tau)), tol);
      const Mat b = 2.0 * (m - 1) * a.hess + a.tau * a.curv.ricci;
      const Mat bt = (3.0 - 2.0 * m) * K * a.tau * a.g;
      s.rep.add_numeric("product.b_tensor", "2(m-1) D d tau + tau Ric = (3-2m) K tau g",
                        frame_norm2(b - bt, a.L) / std::max(1.0, frame_norm2(bt, a.L)), tol);
      s.integral = a.Q + K * a.tau * a.tau;
    } catch (const std::exception& e) {
      s.rep.add_failure("product.evaluation", "evaluation at sample point", e.what());
    }
    return s;
  });
  std::vector<VerificationReport> reps;
  double lo = HUGE_VAL, hi = -HUGE_VAL;
  for (const auto& s : samples) {
    reps.push_back(s.rep);
    lo = std::min(lo, s.integral);
    hi = std::max(hi, s.integral);
  }
  VerificationReport out = merge_worst(reps);
  const double spread = (std::isfinite(lo) && std::isfinite(hi)) ? (hi - lo) / std::max(1.0, std::fabs(hi)) : HUGE_VAL;
  std::ostringstream note;
  note.precision(17);
  note << "range [" << lo << ", " << hi << "]";
  ReportEntry e;
  e.tag = "product.Q_plus_K_tau2";
  e.paper_eq = "Q + K tau^2 is a positive constant";
  e.residual = spread;
  e.tolerance = 1e-8;
  e.pass = std::isfinite(spread) && spread <= 1e-8 && lo > 0.0;
  e.note = note.str();
  out.add(e);
  return out;
}

// ---- Berard Bergery ----

Rational bb_default_eta(unsigned m) {
  const Rational mm(m);
  return mm * (2 * mm - 1) - mm / 2;
}

BBConstruction bb_construction(unsigned m, const Rational& q, const Rational& eta) {
  if (m < 2) throw Error(ErrorCode::InvalidDimension, "requires m >= 2");
  if (!(q > 0 && q < 1)) throw Error(ErrorCode::ParameterDomain, "q must lie in (0, 1)");
  BBConstruction out;
  const SpecialFunctionSet sf = build_special_functions(m);
  const Rational mm(m);
  Rational X = (eta / ((2 * mm - 1) * mm) - 1) / (2 * sf.E0);
  X.canonicalize();
  out.X = X;
  out.eta = eta;
  Rational half(1);
  half /= 2;
  out.params = CaseParams::case_iii(m, Rational(1), Rational(2 * X), Rational(-X), half);
  Rational a = -mm * q;
  out.a = to_double(a);

  const RatFunc t = RatFunc::var();
  const RatFunc phi = (RatFunc(2) - t) / t;
  const RatFunc w = RatFunc(1) - phi * phi;
  const RatFunc tau = t / RatFunc(2);
  const Rational k = 2 * mm - 1 - eta / mm;
  const RatFunc P_phi = RatFunc(sf.P).compose(phi);
  const RatFunc Q26 = tau * tau * (w.pow(static_cast<int>(m)) + RatFunc(k) * P_phi) / w.pow(static_cast<int>(m) - 1);
  const RatFunc Q21 = (t - RatFunc(1)) * (RatFunc(Rational(1)) + RatFunc(Rational(2 * X)) * RatFunc(sf.E) -
                                          RatFunc(X) * sf.F);
  out.report.add_exact("bb.Q_identity",
                       "tau^2 [(1-phi^2)^m + (2m-1-eta/m) P(phi)] / (1-phi^2)^(m-1) = (t-1)[A + B E(t) + C F(t)]",
                       Q26 - Q21);
  out.report.add_exact("bb.kappa", "eps m A / c = 2m",
                       RatFunc(expected_kappa(out.params, 1) - 2 * mm));
  out.report.add_exact("bb.eta", "(2m-1) m (A + B E(0)) = eta", RatFunc(expected_eta(out.params) - eta));

  // Positivity of the right side of the phi' equation on the working interval.
  const Interval iv = default_interval(out.params, 1);
  const RatFuncD rhs(w.pow(static_cast<int>(m)) + RatFunc(k) * P_phi);
  const int samples = 200;
  double lo = HUGE_VAL;
  int positive = 0;
  for (int i = 0; i <= samples; ++i) {
    const double tt = 2.0 * (iv.lo + (iv.hi - iv.lo) * i / samples);
    const double v = rhs(tt);
    lo = std::min(lo, v);
    positive += v > 0.0 ? 1 : 0;
  }
  if (positive == 0) throw Error(ErrorCode::ParameterDomain, "(1-phi^2)^m + (2m-1-eta/m) P(phi) <= 0 at all samples");
  ReportEntry e;
  e.tag = "bb.positivity";
  e.paper_eq = "(1-phi^2)^m + (2m-1-eta/m) P(phi) > 0";
  e.residual = lo > 0.0 ? 0.0 : -lo;
  e.tolerance = 0.0;
  e.pass = positive == samples + 1;
  std::ostringstream note;
  note.precision(6);
  note << "min " << lo << " over " << samples + 1 << " samples, t in [" << 2 * iv.lo << ", " << 2 * iv.hi << "]";
  e.note = note.str();
  out.report.add(e);
  return out;
}

}  // namespace klab
