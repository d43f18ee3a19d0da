#pragma once

#include "klab/exactalg.hpp"
#include "klab/report.hpp"

namespace klab {

// F, E, Xi in the variable t; P in the variable phi.
struct SpecialFunctionSet {
  unsigned m = 0;
  RatFunc F;
  Poly E;
  RatFunc Xi;
  Rational E0;
  Poly P;
};

RatFunc build_F(unsigned m);   // (t-2) t^(2m-1) / (t-1)^m
Poly build_E(unsigned m);      // (t-1) sum_k (k/m) C(2m-k-1, m-1) t^(k-1)
RatFunc build_Xi(unsigned m);  // m(t-1) + m/(t-1) - 2(m-1)
Poly build_P(unsigned m);      // even, P(0) = 1, P'' = 2m (1-phi^2)^(m-1)
SpecialFunctionSet build_special_functions(unsigned m);

// Identities and recursions of F, E, Xi. `prev` is the set for m-1 (recursions
// are reported as not applicable without it).
VerificationReport verify_su_identities(const SpecialFunctionSet& s, const SpecialFunctionSet* prev);
VerificationReport verify_su_identities(unsigned m);

// Identities linking P with E and F under phi = (2-t)/t.
VerificationReport verify_bb_identities(const SpecialFunctionSet& s);
VerificationReport verify_bb_identities(unsigned m);

}  // namespace klab
