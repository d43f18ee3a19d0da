#include "klab/septuple.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "klab/specfun.hpp"

namespace klab {

namespace {

RatFunc R(const Rational& q) { return RatFunc(q); }
RatFunc R(long v) { return RatFunc(Rational(v)); }

const RatFunc& tau_var() {
  static const RatFunc t = RatFunc::var();
  return t;
}

RatFunc tau_pow(long k) { return RatFunc(Poly::monomial(1, static_cast<int>(k))); }

void require_system_dim(unsigned m) {
  if (m < 2) throw Error(ErrorCode::InvalidDimension, "families require m >= 2");
}

void require_nondegenerate(const Rational& a, const Rational& b, const Rational& c) {
  if (a == 0 && b == 0 && c == 0) {
    throw Error(ErrorCode::DegenerateParameters, "all three parameters vanish");
  }
}

}  // namespace

const char* case_name(CaseTag tag) {
  switch (tag) {
    case CaseTag::I: return "i";
    case CaseTag::II: return "ii";
    case CaseTag::III: return "iii";
  }
  return "?";
}

CaseParams CaseParams::case_i(unsigned m, Rational K, Rational alpha, Rational eta) {
  CaseParams p;
  p.tag = CaseTag::I;
  p.m = m;
  p.K = std::move(K);
  p.alpha = std::move(alpha);
  p.eta = std::move(eta);
  return p;
}

CaseParams CaseParams::case_ii(unsigned m, Rational K, Rational alpha, Rational eta) {
  CaseParams p = case_i(m, std::move(K), std::move(alpha), std::move(eta));
  p.tag = CaseTag::II;
  return p;
}

CaseParams CaseParams::case_iii(unsigned m, Rational A, Rational B, Rational C, Rational c) {
  CaseParams p;
  p.tag = CaseTag::III;
  p.m = m;
  p.A = std::move(A);
  p.B = std::move(B);
  p.C = std::move(C);
  p.c = std::move(c);
  return p;
}

std::string CaseParams::describe() const {
  std::ostringstream os;
  os << "case " << case_name(tag) << " m=" << m;
  if (tag == CaseTag::III) {
    os << " A=" << A.get_str() << " B=" << B.get_str() << " C=" << C.get_str()
       << " c=" << c.get_str();
  } else {
    os << " K=" << K.get_str() << " alpha=" << alpha.get_str() << " eta=" << eta.get_str();
  }
  return os.str();
}

SeptupleFns build_case_i(unsigned m, const Rational& K, const Rational& alpha, const Rational& eta) {
  require_system_dim(m);
  require_nondegenerate(K, alpha, eta);
  const long mm = static_cast<long>(m);
  const RatFunc& t = tau_var();
  SeptupleFns s;
  s.m = m;
  Rational inv = Rational(1) / Rational(2 * mm - 1);
  s.grad_sq = -R(K) * t * t + R(inv) * (R(alpha) * tau_pow(2 * mm - 1) - R(Rational(eta / mm)));
  s.laplacian = R(Rational(-2 * K)) * t + R(alpha) * tau_pow(2 * mm - 2);
  s.scal = R(Rational(-(2 * mm - 1) * (2 * mm - 4) * K)) -
           R(Rational(2 * (mm - 1) * alpha)) * tau_pow(2 * mm - 3);
  s.hess_h = RatFunc();
  s.hess_v = -R(K) * t + R(Rational(alpha / 2)) * tau_pow(2 * mm - 2);
  s.ric_h = R(Rational((3 - 2 * mm) * K));
  s.ric_v = R(K) - R(Rational((mm - 1) * alpha)) * tau_pow(2 * mm - 3);
  return s;
}

SeptupleFns build_case_ii(unsigned m, const Rational& K, const Rational& alpha, const Rational& eta) {
  require_system_dim(m);
  require_nondegenerate(K, alpha, eta);
  const long mm = static_cast<long>(m);
  const RatFunc& t = tau_var();
  // 2m phi = K + m alpha tau^m - 2 eta / ((m+1) tau)
  RatFunc two_m_phi =
      R(K) + R(Rational(mm * alpha)) * tau_pow(mm) - R(Rational(2 * eta / (mm + 1))) / t;
  RatFunc phi = two_m_phi * R(Rational(1) / Rational(2 * mm));
  return reconstruct_from_sigma(phi, 0, m);
}

SeptupleFns build_case_iii(unsigned m, const Rational& A, const Rational& B, const Rational& C,
                           const Rational& c) {
  require_system_dim(m);
  if (c == 0) throw Error(ErrorCode::ZeroC, "case iii needs c != 0");
  require_nondegenerate(A, B, C);
  SpecialFunctionSet sf = build_special_functions(m);
  const RatFunc t_of_tau = tau_var() / R(c);
  // sigma = Q / (2(tau - c)) = [A + B E(t) + C F(t)] / (2c)
  RatFunc bracket = R(A) + R(B) * RatFunc(sf.E) + R(C) * sf.F;
  RatFunc sigma = bracket.compose(t_of_tau) * R(Rational(1 / (2 * c)));
  return reconstruct_from_sigma(sigma, c, m);
}

SeptupleFns build_family(const CaseParams& p) {
  switch (p.tag) {
    case CaseTag::I: return build_case_i(p.m, p.K, p.alpha, p.eta);
    case CaseTag::II: return build_case_ii(p.m, p.K, p.alpha, p.eta);
    case CaseTag::III: return build_case_iii(p.m, p.A, p.B, p.C, p.c);
  }
  return {};
}

SeptupleFns reconstruct_from_sigma(const RatFunc& sigma, const Rational& c, unsigned m) {
  if (m < 1) throw Error(ErrorCode::InvalidDimension, "m must be at least 1");
  if (sigma.is_zero()) throw Error(ErrorCode::ZeroSigma, "sigma vanishes identically");
  const long mm = static_cast<long>(m);
  const RatFunc& t = tau_var();
  const RatFunc tc = t - R(c);
  const RatFunc d1 = sigma.derivative();
  const RatFunc d2 = d1.derivative();
  SeptupleFns s;
  s.m = m;
  s.hess_h = sigma;
  s.grad_sq = R(2) * tc * sigma;
  s.hess_v = sigma + tc * d1;
  s.laplacian = R(2 * mm) * sigma + R(2) * tc * d1;
  s.ric_v = -R(mm + 1) * d1 - tc * d2;
  s.ric_h = s.ric_v + R(2 * (mm - 1)) * tc * d1 / t;
  s.scal = R(2) * s.ric_v + R(2 * (mm - 1)) * s.ric_h;
  return s;
}

VerificationReport check_system(const SeptupleFns& s) {
  VerificationReport rep;
  const long m = static_cast<long>(s.m);
  const RatFunc& t = tau_var();
  const RatFunc& Q = s.grad_sq;
  const RatFunc& Y = s.laplacian;
  const RatFunc& sc = s.scal;
  const RatFunc& phi = s.hess_h;
  const RatFunc& psi = s.hess_v;
  const RatFunc& lam = s.ric_h;
  const RatFunc& mu = s.ric_v;
  const RatFunc dQ = Q.derivative(), dY = Y.derivative(), ds = sc.derivative();
  const RatFunc dphi = phi.derivative(), dpsi = psi.derivative();
  const RatFunc dlam = lam.derivative(), dmu = mu.derivative();
  const RatFunc gap = psi - phi;  // psi - phi
  const RatFunc lm = lam - mu;

  rep.add_exact("system.dQ", "Q' = 2 psi", dQ - R(2) * psi);
  rep.add_exact("system.dY", "Y' = -2 mu", dY + R(2) * mu);
  rep.add_exact("system.dphi", "Q phi' = 2(psi - phi) phi", Q * dphi - R(2) * gap * phi);
  rep.add_exact("system.dpsi", "Q psi' = 2(m-1)(phi - psi) phi - mu Q",
                Q * dpsi - (R(-2 * (m - 1)) * gap * phi - mu * Q));
  rep.add_exact("system.dlambda", "Q lambda' = 2(mu - lambda) phi",
                Q * dlam - R(2) * (mu - lam) * phi);
  rep.add_exact("system.dmu",
                "2(m-1)(psi-phi) Q mu' = (lambda-mu)[lambda Q + (2m-3) mu Q + 4(m-1)^2 (psi-phi) phi]",
                R(2 * (m - 1)) * gap * Q * dmu -
                    lm * (lam * Q + R(2 * m - 3) * mu * Q + R(4 * (m - 1) * (m - 1)) * gap * phi));
  rep.add_exact("system.ds", "(m-1)(psi-phi) s' = (lambda-mu)[lambda + (2m-3) mu]",
                R(m - 1) * gap * ds - lm * (lam + R(2 * m - 3) * mu));

  {
    ReportEntry e;
    e.tag = "system.Q_nonzero";
    e.paper_eq = "Q != 0";
    e.residual = Q.is_zero() ? 1.0 : 0.0;
    e.pass = !Q.is_zero();
    rep.add(e);
  }
  rep.add_exact("system.laplacian_trace", "Y = 2 psi + 2(m-1) phi",
                Y - R(2) * psi - R(2 * (m - 1)) * phi);
  rep.add_exact("system.scal_trace", "s = 2 mu + 2(m-1) lambda",
                sc - R(2) * mu - R(2 * (m - 1)) * lam);
  rep.add_exact("system.gap", "2(m-1)(psi - phi) = (lambda - mu) tau", R(2 * (m - 1)) * gap - lm * t);
  rep.add_exact("system.conformal_a", "(2m-1)(m-2) Y' + (m-1) tau s' - s = 0",
                R((2 * m - 1) * (m - 2)) * dY + R(m - 1) * t * ds - sc);
  rep.add_exact("system.conformal_b", "tau^2 s' + 2Y + 2(m-1) tau Y' - 2m Q' = 0",
                t * t * ds + R(2) * Y + R(2 * (m - 1)) * t * dY - R(2 * m) * dQ);
  return rep;
}

IntegralValues integrals(const SeptupleFns& s, int eps) {
  IntegralValues iv;
  const long m = static_cast<long>(s.m);
  const RatFunc& t = tau_var();
  auto take = [&](const char* name, const RatFunc& f, std::optional<Rational>& out) {
    if (auto v = f.constant_value()) out = *v;
    else iv.nonconstant.emplace_back(name);
  };
  if (!s.hess_h.is_zero()) {
    take("c_const", t - s.grad_sq / (R(2) * s.hess_h), iv.c_const);
    take("kappa", R(eps) * (s.laplacian + s.ric_h * s.grad_sq / s.hess_h), iv.kappa);
  } else {
    // f = 1 and eps = 0, so the base constant is lambda itself.
    take("kappa", s.ric_h, iv.kappa);
    iv.kappa_from_ric_h = true;
  }
  RatFunc eta = (s.ric_v + R(m - 1) * s.ric_h) * t * t +
                R(2 * (2 * m - 1)) * (s.hess_v + R(m - 1) * s.hess_h) * t -
                R(m * (2 * m - 1)) * s.grad_sq;
  take("eta", eta, iv.eta);
  take("y_mark", R(2) * s.hess_v + R(2 * (m - 1)) * s.hess_h - s.laplacian, iv.y_mark);
  take("s_mark", R(2) * s.ric_v + R(2 * (m - 1)) * s.ric_h - s.scal, iv.s_mark);
  return iv;
}

Rational expected_kappa(const CaseParams& p, int eps) {
  const long m = static_cast<long>(p.m);
  switch (p.tag) {
    case CaseTag::I: return Rational((3 - 2 * m) * p.K);
    case CaseTag::II: return Rational(eps * p.K);
    case CaseTag::III: return Rational(eps * m * p.A / p.c);
  }
  return 0;
}

Rational expected_eta(const CaseParams& p) {
  if (p.tag != CaseTag::III) return p.eta;
  const long m = static_cast<long>(p.m);
  Rational e0 = build_E(p.m).coeff(0);
  return Rational((2 * m - 1) * m * (p.A + p.B * e0));
}

VerificationReport check_integrals(const SeptupleFns& s, const CaseParams& p, int eps) {
  VerificationReport rep;
  IntegralValues iv = integrals(s, eps);
  auto constant_entry = [&](const char* tag, const char* eq, const std::optional<Rational>& v,
                            std::optional<Rational> expected) {
    ReportEntry e;
    e.tag = tag;
    e.paper_eq = eq;
    if (!v) {
      e.pass = false;
      e.residual = HUGE_VAL;
      e.note = "not constant";
    } else if (expected) {
      Rational diff = abs(*v - *expected);
      e.residual = diff.get_d();
      e.pass = diff == 0;
      e.note = "value " + v->get_str() + ", expected " + expected->get_str();
    } else {
      e.note = "value " + v->get_str();
    }
    rep.add(e);
  };
  if (s.hess_h.is_zero()) {
    rep.add_not_applicable("integral.c", "2c = 2 tau - Q/phi", "phi vanishes identically");
  } else {
    std::optional<Rational> c_expected;
    if (p.tag == CaseTag::II) c_expected = Rational(0);
    if (p.tag == CaseTag::III) c_expected = p.c;
    constant_entry("integral.c", "2c = 2 tau - Q/phi", iv.c_const, c_expected);
  }
  constant_entry("integral.kappa", "kappa = eps (Y + lambda Q / phi)", iv.kappa,
                 expected_kappa(p, eps));
  constant_entry("integral.eta",
                 "eta = [mu + (m-1) lambda] tau^2 + 2(2m-1)[psi + (m-1) phi] tau - m(2m-1) Q",
                 iv.eta, expected_eta(p));
  constant_entry("integral.y_mark", "2 psi + 2(m-1) phi - Y = 0", iv.y_mark, Rational(0));
  constant_entry("integral.s_mark", "2 mu + 2(m-1) lambda - s = 0", iv.s_mark, Rational(0));
  return rep;
}

CaseTag classify(const SeptupleFns& s) {
  if (s.hess_h.is_zero()) return CaseTag::I;
  IntegralValues iv = integrals(s, 1);
  if (iv.c_const && *iv.c_const == 0) return CaseTag::II;
  return CaseTag::III;
}

namespace {

RatFunc third_order_expression(const RatFunc& sigma, const Rational& c, unsigned m) {
  const long mm = static_cast<long>(m);
  const RatFunc& t = tau_var();
  const RatFunc tc = t - R(c);
  const RatFunc d1 = sigma.derivative();
  const RatFunc d2 = d1.derivative();
  return R(mm) * sigma - tc * tc * d2 - R(mm) * tc * d1 + R(2 * (mm - 1)) * tc * tc * d1 / t;
}

}  // namespace

std::optional<Rational> third_order_constant(const RatFunc& sigma, const Rational& c, unsigned m) {
  return third_order_expression(sigma, c, m).constant_value();
}

VerificationReport check_third_order(const RatFunc& sigma, const Rational& c, unsigned m) {
  VerificationReport rep;
  const long mm = static_cast<long>(m);
  const RatFunc& t = tau_var();
  const RatFunc d1 = sigma.derivative();
  const RatFunc d2 = d1.derivative();
  const RatFunc d3 = d2.derivative();
  RatFunc res = t * t * (t - R(c)) * d3 -
                (R(mm - 4) * t * t - R(Rational(2 * (mm - 1) * c)) * t) * d2 -
                R(2 * (mm - 1)) * (t + R(c)) * d1;
  rep.add_exact("third_order.ode",
                "tau^2 (tau-c) S''' = [(m-4) tau^2 - 2(m-1) c tau] S'' + 2(m-1)(tau+c) S'", res);
  RatFunc expr = third_order_expression(sigma, c, m);
  rep.add_exact("third_order.integral",
                "d/dtau [m S - (tau-c)^2 S'' - m(tau-c) S' + 2(m-1)(tau-c)^2 S'/tau] = 0",
                expr.derivative());
  if (auto v = expr.constant_value()) rep.entries.back().note = "constant = " + v->get_str();
  return rep;
}

// ---- numerical integration ----

SeptupleState septuple_values(const SeptupleFns& s, double tau) {
  return {s.grad_sq.eval(tau), s.laplacian.eval(tau), s.scal.eval(tau), s.hess_h.eval(tau),
          s.hess_v.eval(tau),  s.ric_h.eval(tau),     s.ric_v.eval(tau)};
}

SeptupleState septuple_rhs(unsigned m, const SeptupleState& y, const OdeOptions& opt) {
  const double mm = static_cast<double>(m);
  const double Q = y[0], phi = y[3], psi = y[4], lam = y[5], mu = y[6];
  const double gap = psi - phi;
  if (!(std::fabs(Q) >= opt.q_floor)) {
    throw Error(ErrorCode::SingularityEncountered, "|Q| below floor");
  }
  if (!(std::fabs(gap) >= opt.gap_floor)) {
    throw Error(ErrorCode::SingularityEncountered, "|psi - phi| below floor");
  }
  SeptupleState d{};
  d[0] = 2.0 * psi;
  d[1] = -2.0 * mu;
  d[3] = 2.0 * gap * phi / Q;
  d[4] = (2.0 * (mm - 1.0) * (phi - psi) * phi - mu * Q) / Q;
  d[5] = 2.0 * (mu - lam) * phi / Q;
  d[6] = (lam - mu) *
         (lam * Q + (2.0 * mm - 3.0) * mu * Q + 4.0 * (mm - 1.0) * (mm - 1.0) * gap * phi) /
         (2.0 * (mm - 1.0) * gap * Q);
  d[2] = (lam - mu) * (lam + (2.0 * mm - 3.0) * mu) / ((mm - 1.0) * gap);
  return d;
}

Trajectory ode_integrate(unsigned m, const SeptupleState& init, double tau0, double tau1,
                         double step, const OdeOptions& opt) {
  if (m < 2) throw Error(ErrorCode::InvalidDimension, "the ODE system needs m >= 2");
  Trajectory tr;
  tr.samples.push_back({tau0, init});
  const double len = tau1 - tau0;
  if (len == 0.0) return tr;
  septuple_rhs(m, init, opt);  // reject singular initial data up front
  const size_t n = static_cast<size_t>(std::ceil(std::fabs(len) / std::fabs(step) - 1e-9));
  const double h = len / static_cast<double>(n);
  tr.step = h;
  tr.steps = n;
  SeptupleState y = init;
  auto axpy = [](const SeptupleState& a, double s, const SeptupleState& b) {
    SeptupleState r;
    for (size_t i = 0; i < r.size(); ++i) r[i] = a[i] + s * b[i];
    return r;
  };
  for (size_t k = 0; k < n; ++k) {
    SeptupleState k1 = septuple_rhs(m, y, opt);
    SeptupleState k2 = septuple_rhs(m, axpy(y, 0.5 * h, k1), opt);
    SeptupleState k3 = septuple_rhs(m, axpy(y, 0.5 * h, k2), opt);
    SeptupleState k4 = septuple_rhs(m, axpy(y, h, k3), opt);
    for (size_t i = 0; i < y.size(); ++i) y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    const double tau = k + 1 == n ? tau1 : tau0 + h * static_cast<double>(k + 1);
    tr.samples.push_back({tau, y});
  }
  return tr;
}

namespace {

// Componentwise deviation relative to the component's scale over the trajectory.
double trajectory_deviation(const Trajectory& tr, const SeptupleFns& s) {
  std::array<double, 7> scale{}, err{};
  for (const auto& smp : tr.samples) {
    SeptupleState ex = septuple_values(s, smp.tau);
    for (size_t i = 0; i < 7; ++i) {
      scale[i] = std::max(scale[i], std::fabs(ex[i]));
      err[i] = std::max(err[i], std::fabs(smp.y[i] - ex[i]));
    }
  }
  double dev = 0.0;
  for (size_t i = 0; i < 7; ++i) dev = std::max(dev, scale[i] > 0.0 ? err[i] / scale[i] : err[i]);
  return dev;
}

// c, kappa, eta, y_mark, s_mark evaluated on numerical state; c and kappa are NaN when phi == 0.
std::array<double, 5> numeric_integrals(unsigned m, double tau, const SeptupleState& y, int eps) {
  const double mm = static_cast<double>(m);
  const double Q = y[0], Y = y[1], s = y[2], phi = y[3], psi = y[4], lam = y[5], mu = y[6];
  std::array<double, 5> r;
  r[0] = phi != 0.0 ? tau - Q / (2.0 * phi) : std::nan("");
  r[1] = phi != 0.0 ? eps * (Y + lam * Q / phi) : lam;
  r[2] = (mu + (mm - 1.0) * lam) * tau * tau + 2.0 * (2.0 * mm - 1.0) * (psi + (mm - 1.0) * phi) * tau -
         mm * (2.0 * mm - 1.0) * Q;
  r[3] = 2.0 * psi + 2.0 * (mm - 1.0) * phi - Y;
  r[4] = 2.0 * mu + 2.0 * (mm - 1.0) * lam - s;
  return r;
}

}  // namespace

OdeCrossCheckResult ode_cross_check(const CaseParams& p, double tau0, double tau1, double step,
                                    const OdeTolerances& tol, const OdeOptions& opt) {
  OdeCrossCheckResult out;
  const std::string label = p.describe();
  SeptupleFns s = build_family(p);
  const SeptupleState init = septuple_values(s, tau0);
  const double phi_mid = s.hess_h.eval(0.5 * (tau0 + tau1));
  const int eps = phi_mid > 0 ? 1 : (phi_mid < 0 ? -1 : 0);

  Trajectory tr = ode_integrate(p.m, init, tau0, tau1, step, opt);
  out.deviation = trajectory_deviation(tr, s);

  const auto I0 = numeric_integrals(p.m, tau0, init, eps);
  for (const auto& smp : tr.samples) {
    auto I = numeric_integrals(p.m, smp.tau, smp.y, eps);
    for (size_t i = 0; i < I.size(); ++i) {
      if (std::isnan(I0[i])) continue;
      out.drift = std::max(out.drift, std::fabs(I[i] - I0[i]) / std::max(1.0, std::fabs(I0[i])));
    }
  }

  // Order measurement on a coarse grid, where truncation error dominates rounding.
  out.coarse_step = std::fabs(tau1 - tau0) / 16.0;
  double d1 = 0.0;
  if (out.coarse_step > 0.0) {
    d1 = trajectory_deviation(ode_integrate(p.m, init, tau0, tau1, out.coarse_step, opt), s);
    double d2 =
        trajectory_deviation(ode_integrate(p.m, init, tau0, tau1, 0.5 * out.coarse_step, opt), s);
    out.order_ratio = d2 > 0.0 ? d1 / d2 : HUGE_VAL;
  }

  out.report.add_numeric("ode.deviation", "RK4 trajectory vs closed form (max relative deviation)",
                         out.deviation, tol.deviation, label);
  out.report.add_numeric("ode.drift", "conserved integrals c, kappa, eta, y_mark, s_mark along RK4",
                         out.drift, tol.drift, label);
  if (!(out.order_ratio < HUGE_VAL) || d1 < 1e-12) {
    // RK4 is exact for low-degree polynomial solutions; the ratio then measures rounding.
    std::ostringstream os;
    os << "trajectory matches the closed form to rounding (coarse-step deviation " << d1 << "); "
       << label;
    out.report.add_not_applicable("ode.order_ratio", "deviation(h)/deviation(h/2) ~ 2^4", os.str());
    return out;
  }
  ReportEntry e;
  e.tag = "ode.order_ratio";
  e.paper_eq = "deviation(h)/deviation(h/2) ~ 2^4";
  e.residual = out.order_ratio;
  e.tolerance = tol.ratio_hi;
  e.pass = out.order_ratio >= tol.ratio_lo && out.order_ratio <= tol.ratio_hi;
  std::ostringstream os;
  os << label << "; accepted range [" << tol.ratio_lo << ", " << tol.ratio_hi
     << "], coarse step " << out.coarse_step;
  e.note = os.str();
  out.report.add(e);
  return out;
}

}  // namespace klab
