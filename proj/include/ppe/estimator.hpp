#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "ppe/basis.hpp"
#include "ppe/field.hpp"
#include "ppe/weights.hpp"

namespace ppe {

enum class Averaging { Linear, KayComplex, ProjectedLinear, Circular };

std::string_view to_string(Averaging kind);
// Accepts the CLI names linear, kay, lw, circular.
Averaging parse_averaging(std::string_view name);
// Whether average() commutes with a global phase rotation.
bool is_rotation_equivariant(Averaging kind);

struct EstimatorConfig {
    DegreeSet degrees;
    Averaging averaging = Averaging::Circular;
    // Empty means the single all-ones lag.
    std::vector<MultiIndex> lags;
    bool general_degree_handling = false;

    std::vector<MultiIndex> lag_schedule() const;
    // Checks lag ordering and dimensions; windows are checked by the estimators.
    void validate() const;
};

// One stage of the sequential loop: degree m at lag tau contributed delta.
struct LagIncrement {
    MultiIndex degree;
    MultiIndex lag;
    double delta = 0.0;
    double resultant = 0.0;  // |average|, a rough confidence for the stage
};

struct Estimate {
    CoefficientVector binomial;
    std::optional<CoefficientVector> monomial;
    std::vector<LagIncrement> diagnostics;
};

Complex average(Averaging kind, const Signal& s, const WeightField& weights);

// Sequential estimation with the single lag 1, degrees in descending order.
Estimate estimate_coefficients(const Signal& y, const EstimatorConfig& cfg);

// Same loop, cancelling monomials n^m/m! instead of binomials.
Estimate estimate_coefficients_direct(const Signal& y, const EstimatorConfig& cfg);

// Estimates over the downward closure and projects with Fisher weighting
// when the degree set is not downward closed.
Estimate estimate_coefficients_general(const Signal& y, const EstimatorConfig& cfg);

// Lag refinement: every degree accumulates increments over the lag schedule.
Estimate estimate_coefficients_multilag(const Signal& y, const EstimatorConfig& cfg);

// A single lag tau (not necessarily all-ones). Estimates live in tau^{-m}[-1/2, 1/2).
Estimate estimate_coefficients_lag(const Signal& y, const DegreeSet& degrees, Averaging kind, const MultiIndex& lag);

// Picks the general, multi-lag or plain path from the config.
Estimate estimate(const Signal& y, const EstimatorConfig& cfg);

// Drops the entries of a closure estimate that are not in the target set.
CoefficientVector restrict_to_degrees(const CoefficientVector& b, const DegreeSet& target);

struct InvarianceWitness {
    std::vector<std::int64_t> integers;
    double max_deviation = 0.0;  // largest distance from an integer before rounding
};

InvarianceWitness parameter_invariance_witness(const Signal& y, const RealField& x_true, const EstimatorConfig& cfg);

void to_json(Json& j, const Estimate& e);

}  // namespace ppe
