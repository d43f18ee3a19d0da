#pragma once

// The seven eigenvalue/trace functions of a special Kaehler-Ricci potential,
// as exact rational functions of the potential tau, and their ODE system.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "klab/exactalg.hpp"
#include "klab/report.hpp"

namespace klab {

enum class CaseTag { I, II, III };
const char* case_name(CaseTag tag);

struct CaseParams {
  CaseTag tag = CaseTag::I;
  unsigned m = 2;
  Rational K, alpha, eta;  // cases I and II
  Rational A, B, C, c;     // case III

  static CaseParams case_i(unsigned m, Rational K, Rational alpha, Rational eta);
  static CaseParams case_ii(unsigned m, Rational K, Rational alpha, Rational eta);
  static CaseParams case_iii(unsigned m, Rational A, Rational B, Rational C, Rational c);
  std::string describe() const;
};

struct SeptupleFns {
  unsigned m = 2;
  RatFunc grad_sq;    // Q = g(grad tau, grad tau)
  RatFunc laplacian;  // Y = Laplacian of tau
  RatFunc scal;       // s
  RatFunc hess_h;     // phi, Hessian eigenvalue on H
  RatFunc hess_v;     // psi, Hessian eigenvalue on V
  RatFunc ric_h;      // lambda, Ricci eigenvalue on H
  RatFunc ric_v;      // mu, Ricci eigenvalue on V

  friend bool operator==(const SeptupleFns& a, const SeptupleFns& b) {
    return a.m == b.m && a.grad_sq == b.grad_sq && a.laplacian == b.laplacian &&
           a.scal == b.scal && a.hess_h == b.hess_h && a.hess_v == b.hess_v &&
           a.ric_h == b.ric_h && a.ric_v == b.ric_v;
  }
};

SeptupleFns build_case_i(unsigned m, const Rational& K, const Rational& alpha, const Rational& eta);
SeptupleFns build_case_ii(unsigned m, const Rational& K, const Rational& alpha, const Rational& eta);
SeptupleFns build_case_iii(unsigned m, const Rational& A, const Rational& B, const Rational& C,
                           const Rational& c);
SeptupleFns build_family(const CaseParams& p);
SeptupleFns reconstruct_from_sigma(const RatFunc& sigma, const Rational& c, unsigned m);

VerificationReport check_system(const SeptupleFns& s);

struct IntegralValues {
  std::optional<Rational> c_const;
  std::optional<Rational> kappa;
  std::optional<Rational> eta;
  std::optional<Rational> y_mark;
  std::optional<Rational> s_mark;
  std::vector<std::string> nonconstant;  // names of integrals that failed to be constant
  bool kappa_from_ric_h = false;         // hess_h == 0: kappa read off ric_h (f = 1, eps = 0)
};

// eps is the sign of hess_h on the working interval.
IntegralValues integrals(const SeptupleFns& s, int eps);
// Base Einstein constant required by each case: (3-2m)K, eps K, eps m A / c.
Rational expected_kappa(const CaseParams& p, int eps);
Rational expected_eta(const CaseParams& p);
// Integrals constant, y_mark = s_mark = 0, kappa and eta against the case formulas.
VerificationReport check_integrals(const SeptupleFns& s, const CaseParams& p, int eps);

// hess_h == 0, else c-integral == 0, else c != 0.
CaseTag classify(const SeptupleFns& s);

std::optional<Rational> third_order_constant(const RatFunc& sigma, const Rational& c, unsigned m);
VerificationReport check_third_order(const RatFunc& sigma, const Rational& c, unsigned m);

// ---- numerical integration ----

// Component order: Q, Y, s, phi, psi, lambda, mu.
using SeptupleState = std::array<double, 7>;
SeptupleState septuple_values(const SeptupleFns& s, double tau);

struct TrajectorySample {
  double tau;
  SeptupleState y;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  double step = 0.0;
  size_t steps = 0;
};

struct OdeOptions {
  double q_floor = 1e-9;
  double gap_floor = 1e-9;  // floor for |psi - phi|
};

SeptupleState septuple_rhs(unsigned m, const SeptupleState& y, const OdeOptions& opt = {});
Trajectory ode_integrate(unsigned m, const SeptupleState& init, double tau0, double tau1,
                         double step, const OdeOptions& opt = {});

struct OdeCrossCheckResult {
  double deviation = 0.0;      // at the requested step
  double drift = 0.0;          // max drift of the conserved integrals
  double order_ratio = 0.0;    // deviation(h_c) / deviation(h_c / 2)
  double coarse_step = 0.0;    // h_c used for the order measurement
  VerificationReport report;
};

struct OdeTolerances {
  double deviation = 1e-7;
  double drift = 1e-8;
  double ratio_lo = 12.0;
  double ratio_hi = 20.0;
};

OdeCrossCheckResult ode_cross_check(const CaseParams& p, double tau0, double tau1, double step,
                                    const OdeTolerances& tol = {}, const OdeOptions& opt = {});

}  // namespace klab
