#include "ppe/phase.hpp"

#include <cmath>
#include <numbers>

#include "ppe/errors.hpp"

namespace ppe {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Adds frac(coef * p_m(n)) to acc(n) for every n, reducing mod 1.
void accumulate_term(RealField& acc, Basis basis, double coef, const MultiIndex& m) {
    const MultiIndex& window = acc.window();
    if (m.dim() != window.dim()) throw ValidationError("degree " + m.to_string() + " does not match window " + window.to_string());
    if (basis == Basis::Binomial) {
        // C(n,m) factorizes over axes; tabulate each axis once.
        std::vector<std::vector<std::int64_t>> tables(window.dim());
        for (std::size_t d = 0; d < window.dim(); ++d) {
            tables[d].resize(static_cast<std::size_t>(window[d]));
            for (std::int64_t n = 0; n < window[d]; ++n) tables[d][static_cast<std::size_t>(n)] = binom(n, m[d]);
        }
        std::size_t flat = 0;
        for_each_in_box(window, [&](const MultiIndex& n) {
            std::int64_t count = 1;
            for (std::size_t d = 0; d < n.dim() && count != 0; ++d) {
                if (__builtin_mul_overflow(count, tables[d][static_cast<std::size_t>(n[d])], &count)) {
                    throw OverflowError("C(n,m) exceeds int64 at n=" + n.to_string());
                }
            }
            double v = acc[flat] + frac_product(coef, count);
            acc[flat++] = v >= 1.0 ? v - 1.0 : v;
        });
    } else {
        std::size_t flat = 0;
        for_each_in_box(window, [&](const MultiIndex& n) {
            double v = acc[flat] + frac_monomial(coef, n, m);
            acc[flat++] = v >= 1.0 ? v - 1.0 : v;
        });
    }
}

}  // namespace

RealField phase_field(const CoefficientVector& coeffs, const MultiIndex& window) {
    coeffs.check();
    RealField acc(window);
    for (std::size_t i = 0; i < coeffs.values.size(); ++i) accumulate_term(acc, coeffs.basis, coeffs.values[i], coeffs.degrees[i]);
    return acc;
}

RealField term_phase(Basis basis, double coef, const MultiIndex& m, const MultiIndex& window) {
    RealField acc(window);
    accumulate_term(acc, basis, coef, m);
    return acc;
}

void cancel_term(Signal& s, Basis basis, double coef, const MultiIndex& m) {
    if (coef == 0.0) return;
    const RealField phase = term_phase(basis, coef, m, s.window());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] *= std::polar(1.0, -kTwoPi * phase[i]);
}

}  // namespace ppe
