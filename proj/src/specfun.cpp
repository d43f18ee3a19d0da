#include "klab/specfun.hpp"

#include <string>

namespace klab {

namespace {

void require_dim(unsigned m) {
  if (m == 0) throw Error(ErrorCode::InvalidDimension, "m must be at least 1");
}

const RatFunc& tvar() {
  static const RatFunc t = RatFunc::var();
  return t;
}

}  // namespace

RatFunc build_F(unsigned m) {
  require_dim(m);
  Poly num = Poly{-2, 1} * Poly::monomial(1, static_cast<int>(2 * m - 1));
  Poly den = Poly{-1, 1}.pow(m);
  return RatFunc(std::move(num), std::move(den));
}

Poly build_E(unsigned m) {
  require_dim(m);
  std::vector<Rational> sum(m);
  for (unsigned k = 1; k <= m; ++k) {
    sum[k - 1] = Rational(k) / Rational(m) * binom(2 * m - k - 1, m - 1);
    sum[k - 1].canonicalize();
  }
  return Poly{-1, 1} * Poly(std::move(sum));
}

RatFunc build_Xi(unsigned m) {
  require_dim(m);
  const Rational mm(m);
  RatFunc tm1 = tvar() - RatFunc(1);
  return RatFunc(mm) * tm1 + RatFunc(mm) / tm1 - RatFunc(Rational(2 * (static_cast<long>(m) - 1)));
}

Poly build_P(unsigned m) {
  require_dim(m);
  std::vector<Rational> c(2 * m + 1);
  c[0] = 1;
  for (unsigned k = 1; k <= m; ++k) {
    Rational term = Rational(2 * m) * binom(m - 1, k - 1) / Rational(2 * k * (2 * k - 1));
    if ((k - 1) % 2 == 1) term = -term;
    c[2 * k] = term;
  }
  return Poly(std::move(c));
}

SpecialFunctionSet build_special_functions(unsigned m) {
  SpecialFunctionSet s;
  s.m = m;
  s.F = build_F(m);
  s.E = build_E(m);
  s.Xi = build_Xi(m);
  s.E0 = s.E.coeff(0);
  s.P = build_P(m);
  return s;
}

VerificationReport verify_su_identities(const SpecialFunctionSet& s, const SpecialFunctionSet* prev) {
  VerificationReport rep;
  const RatFunc& t = tvar();
  const long m = static_cast<long>(s.m);
  const RatFunc E(s.E);
  const RatFunc E0(s.E0);
  const RatFunc tt2 = t * (t - RatFunc(2));
  const RatFunc Fp = s.F.derivative();
  const RatFunc Ep = E.derivative();

  rep.add_exact("su.F_first_order", "t(t-2)F' = Xi*F", tt2 * Fp - s.Xi * s.F);
  rep.add_exact("su.E_first_order", "t(t-2)E' = Xi*E + 2(2m-1)E(0)",
                tt2 * Ep - s.Xi * E - RatFunc(Rational(2 * (2 * m - 1))) * E0);

  const RatFunc EF = E / s.F;
  rep.add_exact("su.E_over_F_derivative", "t(t-2)(E/F)' = 2(2m-1)E(0)/F",
                tt2 * EF.derivative() - RatFunc(Rational(2 * (2 * m - 1))) * E0 / s.F);

  const RatFunc two_tm1 = RatFunc(2) * (t - RatFunc(1));
  for (int which = 0; which < 2; ++which) {
    const RatFunc& sig = which == 0 ? E : s.F;
    RatFunc d1 = sig.derivative();
    RatFunc d2 = d1.derivative();
    RatFunc res = tt2 * d2 + two_tm1 * d1 - (s.Xi * sig).derivative();
    rep.add_exact(which == 0 ? "su.second_order_E" : "su.second_order_F",
                  "t(t-2)S'' + 2(t-1)S' = (Xi*S)'", res);
  }

  const char* shift_eq = "[E_m - E_m(0)]/F_m = E_{m-1}/F_{m-1}";
  const char* recF_eq = "(t-1)F_m = t^2 F_{m-1}";
  const char* recE_eq = "(t-1)[E_m - E_m(0)] = t^2 E_{m-1}";
  const char* recE0_eq = "m E_m(0) = 2(2m-3) E_{m-1}(0)";
  if (s.m < 2 || prev == nullptr) {
    const std::string why = "requires m >= 2";
    rep.add_not_applicable("su.E_over_F_shift", shift_eq, why);
    rep.add_not_applicable("su.rec_F", recF_eq, why);
    rep.add_not_applicable("su.rec_E", recE_eq, why);
    rep.add_not_applicable("su.rec_E0", recE0_eq, why);
    return rep;
  }
  const RatFunc Eprev(prev->E);
  const RatFunc t2 = t * t;
  rep.add_exact("su.E_over_F_shift", shift_eq, (E - E0) / s.F - Eprev / prev->F);
  rep.add_exact("su.rec_F", recF_eq, (t - RatFunc(1)) * s.F - t2 * prev->F);
  rep.add_exact("su.rec_E", recE_eq, (t - RatFunc(1)) * (E - E0) - t2 * Eprev);
  rep.add_exact("su.rec_E0", recE0_eq,
                RatFunc(Rational(m) * s.E0 - Rational(2 * (2 * m - 3)) * prev->E0));
  return rep;
}

VerificationReport verify_su_identities(unsigned m) {
  SpecialFunctionSet s = build_special_functions(m);
  if (m < 2) return verify_su_identities(s, nullptr);
  SpecialFunctionSet p = build_special_functions(m - 1);
  return verify_su_identities(s, &p);
}

VerificationReport verify_bb_identities(const SpecialFunctionSet& s) {
  VerificationReport rep;
  const RatFunc& t = tvar();
  const long m = static_cast<long>(s.m);
  const RatFunc phi = (RatFunc(2) - t) / t;
  const RatFunc one_minus_phi2 = RatFunc(1) - phi * phi;
  const RatFunc w = one_minus_phi2.pow(static_cast<int>(m));
  const RatFunc E(s.E);

  const RatFunc P_of_phi = RatFunc(s.P).compose(phi);
  rep.add_exact("bb.P_against_E_F", "2(1-2m)E(0)P(phi) = (1-phi^2)^m [2E(t) - F(t)], phi=(2-t)/t",
                RatFunc(Rational(2 * (1 - 2 * m)) * s.E0) * P_of_phi -
                    w * (RatFunc(2) * E - s.F));

  mpz_class four_m;
  mpz_ui_pow_ui(four_m.get_mpz_t(), 4, s.m);
  rep.add_exact("bb.F_phi", "(1-phi^2)^m F(t) = -4^m phi, phi=(2-t)/t",
                w * s.F + RatFunc(Rational(four_m)) * phi);

  Poly base = Poly{1, 0, -1}.pow(s.m - 1) * Rational(2 * m);
  rep.add_exact("bb.P_second_derivative", "P'' = 2m(1-phi^2)^(m-1)",
                RatFunc(s.P.derivative().derivative() - base));

  Rational off = abs(s.P.coeff(0) - 1);
  for (int i = 1; i <= s.P.degree(); i += 2) off += abs(s.P.coeff(i));
  ReportEntry e;
  e.tag = "bb.P_even_normalized";
  e.paper_eq = "P even, P(0) = 1";
  e.residual = off.get_d();
  e.pass = off == 0;
  rep.add(e);
  return rep;
}

VerificationReport verify_bb_identities(unsigned m) {
  return verify_bb_identities(build_special_functions(m));
}

}  // namespace klab
