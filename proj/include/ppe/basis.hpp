#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "ppe/core_index.hpp"
#include "ppe/field.hpp"

namespace ppe {

enum class Basis { Binomial, Monomial };

std::string_view to_string(Basis basis);
Basis parse_basis(std::string_view name);

struct CoefficientVector {
    Basis basis = Basis::Binomial;
    DegreeSet degrees;
    std::vector<double> values;

    static CoefficientVector zeros(Basis basis, DegreeSet degrees);
    // Throws ValidationError unless values.size() == degrees.size().
    void check() const;
};

// Columns: binomial basis functions expressed in monomial coordinates n^l/l!.
struct ChangeOfBasis {
    DegreeSet degrees;
    Eigen::MatrixXd matrix;
};

// Sum of b_m C(n,m).
double eval_binomial(const CoefficientVector& b, const MultiIndex& n);
// Sum of a_m n^m/m!.
double eval_monomial(const CoefficientVector& a, const MultiIndex& n);
// Dispatches on the basis tag.
double eval_polynomial(const CoefficientVector& coeffs, const MultiIndex& n);

// x(n) mod 1 in [0,1), keeping the fractional part exact-ish even when
// C(n,m) or n^m/m! are far beyond 2^53.
double eval_phase(const CoefficientVector& coeffs, const MultiIndex& n);

// frac(coef * count) in [0,1) for an exact integer count.
double frac_product(double coef, std::int64_t count);
// frac(coef * n^m / m!) in [0,1).
double frac_monomial(double coef, const MultiIndex& n, const MultiIndex& m);

// Requires a downward closed degree set. Upper unitriangular in the stored order.
ChangeOfBasis binomial_to_monomial_matrix(const DegreeSet& degrees);

// floor(x + 1/2): ties round up, matching the half-open cell [-1/2, 1/2).
double round_half_up(double x);

// Nearest-plane recursion in descending order; a - T z lands in the cell.
std::vector<std::int64_t> compute_lattice_point(std::span<const double> a, const ChangeOfBasis& change);

// a = T(b - z) with z the lattice point of T b.
CoefficientVector compute_new_coordinate(const CoefficientVector& b, const ChangeOfBasis& change);

// Solves T b = a (back substitution). No wrapping.
CoefficientVector monomial_to_binomial(const CoefficientVector& a, const ChangeOfBasis& change);

// Coefficient b_k recovered from samples through the multidimensional inversion formula.
double binomial_transform(const RealField& x, const MultiIndex& k, const DegreeSet& degrees);

double wrap_to_cell(double v);
std::vector<double> wrap_to_cell(std::span<const double> v);

void to_json(Json& j, const CoefficientVector& c);
void from_json(const Json& j, CoefficientVector& c);

}  // namespace ppe
