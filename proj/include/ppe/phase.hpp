#pragma once

#include "ppe/basis.hpp"
#include "ppe/field.hpp"

namespace ppe {

// x(n) mod 1 in [0,1) for every n in [N].
RealField phase_field(const CoefficientVector& coeffs, const MultiIndex& window);

// frac(coef * p_m(n)) in [0,1) over the window of s, where p_m is C(n,m) or n^m/m!.
RealField term_phase(Basis basis, double coef, const MultiIndex& m, const MultiIndex& window);

// s(n) <- s(n) exp(-j 2 pi coef p_m(n)), in place.
void cancel_term(Signal& s, Basis basis, double coef, const MultiIndex& m);

}  // namespace ppe
