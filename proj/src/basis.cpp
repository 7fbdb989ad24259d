#include "ppe/basis.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "ppe/errors.hpp"

namespace ppe {

namespace {

using Int128 = __int128;

Int128 gcd128(Int128 a, Int128 b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
        const Int128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

constexpr int kMaxExactDegree = 30;  // 30! still fits in 128 bits

// Coefficient of n^l/l! in C(n,m) for a single dimension, as an exact rational
// s(m,l) l!/m! (signed Stirling numbers of the first kind) rounded once to double.
std::vector<std::vector<double>> falling_factorial_table(int max_degree) {
    if (max_degree > kMaxExactDegree) {
        throw OverflowError("change of basis: degree " + std::to_string(max_degree) + " too large for exact expansion");
    }
    // stirling[m][l]: n(n-1)...(n-m+1) = sum_l stirling[m][l] n^l
    std::vector<std::vector<Int128>> stirling(max_degree + 1, std::vector<Int128>(max_degree + 1, 0));
    stirling[0][0] = 1;
    for (int m = 0; m < max_degree; ++m) {
        for (int l = 0; l <= m; ++l) {
            stirling[m + 1][l + 1] += stirling[m][l];
            stirling[m + 1][l] -= static_cast<Int128>(m) * stirling[m][l];
        }
    }
    std::vector<Int128> factorial(max_degree + 1, 1);
    for (int i = 1; i <= max_degree; ++i) factorial[i] = factorial[i - 1] * i;

    std::vector<std::vector<double>> table(max_degree + 1, std::vector<double>(max_degree + 1, 0.0));
    for (int m = 0; m <= max_degree; ++m) {
        for (int l = 0; l <= m; ++l) {
            // stirling * l! can overflow for large m; cancel against m! first.
            Int128 num = stirling[m][l];
            Int128 den = factorial[m];
            const Int128 g1 = gcd128(factorial[l], den);
            const Int128 lf = factorial[l] / g1;
            den /= g1;
            const Int128 g2 = gcd128(num, den);
            num /= g2;
            den /= g2;
            table[m][l] = static_cast<double>(static_cast<long double>(num * lf) / static_cast<long double>(den));
        }
    }
    return table;
}

void require_basis(const CoefficientVector& c, Basis expected, const char* what) {
    c.check();
    if (c.basis != expected) {
        throw ValidationError(std::string(what) + ": expected " + std::string(to_string(expected)) + " coefficients");
    }
}

double frac(double x) {
    double f = x - std::floor(x);
    return f >= 1.0 ? 0.0 : f;
}

}  // namespace

std::string_view to_string(Basis basis) { return basis == Basis::Binomial ? "binomial" : "monomial"; }

Basis parse_basis(std::string_view name) {
    if (name == "binomial") return Basis::Binomial;
    if (name == "monomial") return Basis::Monomial;
    throw ValidationError("unknown basis '" + std::string(name) + "' (expected binomial or monomial)");
}

CoefficientVector CoefficientVector::zeros(Basis basis, DegreeSet degrees) {
    CoefficientVector out{basis, std::move(degrees), {}};
    out.values.assign(out.degrees.size(), 0.0);
    return out;
}

void CoefficientVector::check() const {
    if (values.size() != degrees.size()) {
        throw ValidationError("coefficient vector: " + std::to_string(values.size()) + " values for " +
                              std::to_string(degrees.size()) + " degrees");
    }
}

double eval_binomial(const CoefficientVector& b, const MultiIndex& n) {
    require_basis(b, Basis::Binomial, "eval_binomial");
    double x = 0.0;
    for (std::size_t i = 0; i < b.values.size(); ++i) {
        x += b.values[i] * static_cast<double>(multi_binom(n, b.degrees[i]));
    }
    return x;
}

double eval_monomial(const CoefficientVector& a, const MultiIndex& n) {
    require_basis(a, Basis::Monomial, "eval_monomial");
    double x = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        const MultiIndex& m = a.degrees[i];
        double term = a.values[i];
        for (std::size_t d = 0; d < m.dim(); ++d) {
            for (std::int64_t e = 1; e <= m[d]; ++e) term *= static_cast<double>(n[d]) / static_cast<double>(e);
        }
        x += term;
    }
    return x;
}

double eval_polynomial(const CoefficientVector& coeffs, const MultiIndex& n) {
    return coeffs.basis == Basis::Binomial ? eval_binomial(coeffs, n) : eval_monomial(coeffs, n);
}

double frac_product(double coef, std::int64_t count) {
    constexpr std::int64_t kExact = std::int64_t{1} << 53;
    if (count > -kExact && count < kExact) {
        const double c = static_cast<double>(count);
        const double p = coef * c;
        const double err = std::fma(coef, c, -p);  // p + err == coef*c exactly
        return frac(frac(p) + err);
    }
    const std::int64_t hi = count / (std::int64_t{1} << 32);
    const std::int64_t lo = count - hi * (std::int64_t{1} << 32);
    return frac(frac_product(std::ldexp(coef, 32), hi) + frac_product(coef, lo));
}

double frac_monomial(double coef, const MultiIndex& n, const MultiIndex& m) {
    std::int64_t power = 1;
    std::int64_t factorial = 1;
    for (std::size_t d = 0; d < m.dim(); ++d) {
        for (std::int64_t e = 1; e <= m[d]; ++e) {
            if (__builtin_mul_overflow(power, n[d], &power) || __builtin_mul_overflow(factorial, e, &factorial)) {
                throw OverflowError("monomial " + n.to_string() + "^" + m.to_string() + " exceeds int64");
            }
        }
    }
    // n^m = q m! + r, so coef n^m/m! = coef q + coef r/m!
    std::int64_t q = power / factorial;
    std::int64_t r = power % factorial;
    if (r < 0) {
        r += factorial;
        --q;
    }
    return frac(frac_product(coef, q) + coef * (static_cast<double>(r) / static_cast<double>(factorial)));
}

double eval_phase(const CoefficientVector& coeffs, const MultiIndex& n) {
    coeffs.check();
    double x = 0.0;
    for (std::size_t i = 0; i < coeffs.values.size(); ++i) {
        const MultiIndex& m = coeffs.degrees[i];
        x += coeffs.basis == Basis::Binomial ? frac_product(coeffs.values[i], multi_binom(n, m))
                                             : frac_monomial(coeffs.values[i], n, m);
    }
    return frac(x);
}

ChangeOfBasis binomial_to_monomial_matrix(const DegreeSet& degrees) {
    const MultiIndex top = degrees.max_degree();
    if (!validate_degree_set(degrees, top + 1).downward_closed) {
        throw ValidationError("change of basis requires a downward closed degree set");
    }
    std::int64_t max_degree = 0;
    for (std::size_t d = 0; d < top.dim(); ++d) max_degree = std::max(max_degree, top[d]);
    const auto table = falling_factorial_table(static_cast<int>(max_degree));

    const auto size = static_cast<Eigen::Index>(degrees.size());
    ChangeOfBasis out{degrees, Eigen::MatrixXd::Zero(size, size)};
    for (Eigen::Index col = 0; col < size; ++col) {
        const MultiIndex& m = degrees[static_cast<std::size_t>(col)];
        for (Eigen::Index row = 0; row < size; ++row) {
            const MultiIndex& l = degrees[static_cast<std::size_t>(row)];
            if (!partial_leq(l, m)) continue;
            double t = 1.0;
            for (std::size_t d = 0; d < m.dim(); ++d) t *= table[m[d]][l[d]];
            out.matrix(row, col) = t;
        }
    }
    return out;
}

double round_half_up(double x) { return std::floor(x + 0.5); }

std::vector<std::int64_t> compute_lattice_point(std::span<const double> a, const ChangeOfBasis& change) {
    const auto& t = change.matrix;
    const auto size = static_cast<Eigen::Index>(a.size());
    if (t.rows() != size || t.cols() != size) throw ValidationError("lattice point: size mismatch");
    for (Eigen::Index i = 0; i < size; ++i) {
        if (t(i, i) != 1.0) throw ValidationError("lattice point: matrix must have a unit diagonal");
        for (Eigen::Index j = 0; j < i; ++j) {
            if (t(i, j) != 0.0) throw ValidationError("lattice point: matrix must be upper triangular");
        }
    }
    std::vector<std::int64_t> z(a.size(), 0);
    for (Eigen::Index l = size - 1; l >= 0; --l) {
        double target = a[static_cast<std::size_t>(l)];
        for (Eigen::Index m = l + 1; m < size; ++m) target -= t(l, m) * static_cast<double>(z[static_cast<std::size_t>(m)]);
        z[static_cast<std::size_t>(l)] = static_cast<std::int64_t>(round_half_up(target));
    }
    return z;
}

CoefficientVector compute_new_coordinate(const CoefficientVector& b, const ChangeOfBasis& change) {
    require_basis(b, Basis::Binomial, "compute_new_coordinate");
    const Eigen::Map<const Eigen::VectorXd> bv(b.values.data(), static_cast<Eigen::Index>(b.values.size()));
    const Eigen::VectorXd tb = change.matrix * bv;
    const auto z = compute_lattice_point(std::span<const double>(tb.data(), static_cast<std::size_t>(tb.size())), change);
    Eigen::VectorXd shifted = bv;
    for (Eigen::Index i = 0; i < shifted.size(); ++i) shifted(i) -= static_cast<double>(z[static_cast<std::size_t>(i)]);
    const Eigen::VectorXd a = change.matrix * shifted;
    return CoefficientVector{Basis::Monomial, b.degrees, std::vector<double>(a.data(), a.data() + a.size())};
}

CoefficientVector monomial_to_binomial(const CoefficientVector& a, const ChangeOfBasis& change) {
    require_basis(a, Basis::Monomial, "monomial_to_binomial");
    const Eigen::Map<const Eigen::VectorXd> av(a.values.data(), static_cast<Eigen::Index>(a.values.size()));
    const Eigen::VectorXd b = change.matrix.triangularView<Eigen::UnitUpper>().solve(av);
    return CoefficientVector{Basis::Binomial, a.degrees, std::vector<double>(b.data(), b.data() + b.size())};
}

double binomial_transform(const RealField& x, const MultiIndex& k, const DegreeSet& degrees) {
    if (!validate_degree_set(degrees, x.window()).window_ok) {
        throw ValidationError("binomial_transform: window " + x.window().to_string() + " too small for the degree set");
    }
    if (k.dim() != x.dim() || !k.all_nonnegative()) throw ValidationError("binomial_transform: invalid degree " + k.to_string());
    // Only l <= k contribute; clip the box to the window.
    MultiIndex extent = k + 1;
    for (std::size_t d = 0; d < k.dim(); ++d) extent[d] = std::min(extent[d], x.window()[d]);
    double sum = 0.0;
    for_each_in_box(extent, [&](const MultiIndex& l) {
        const double sign = ((k.total() + l.total()) % 2 == 0) ? 1.0 : -1.0;
        sum += sign * static_cast<double>(multi_binom(k, l)) * x.at(l);
    });
    return sum;
}

double wrap_to_cell(double v) {
    double r = v - std::floor(v + 0.5);
    // floor(v + 0.5) can round across the boundary for v just below 1/2.
    if (r >= 0.5) r -= 1.0;
    if (r < -0.5) r += 1.0;
    return r;
}

std::vector<double> wrap_to_cell(std::span<const double> v) {
    std::vector<double> out(v.begin(), v.end());
    for (auto& e : out) e = wrap_to_cell(e);
    return out;
}

void to_json(Json& j, const CoefficientVector& c) {
    j = Json::object();
    j["basis"] = std::string(to_string(c.basis));
    j["degrees"] = c.degrees;
    j["values"] = c.values;
}

void from_json(const Json& j, CoefficientVector& c) {
    if (!j.is_object()) throw ValidationError("coefficient vector must be a JSON object");
    for (const char* key : {"basis", "degrees", "values"}) {
        if (!j.contains(key)) throw ValidationError(std::string("coefficient vector: missing field '") + key + "'");
    }
    c.basis = parse_basis(j.at("basis").get<std::string>());
    c.degrees = j.at("degrees").get<DegreeSet>();
    c.values = j.at("values").get<std::vector<double>>();
    c.check();
}

}  // namespace ppe
