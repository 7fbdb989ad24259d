#include "ppe/estimator.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "ppe/analysis.hpp"
#include "ppe/errors.hpp"
#include "ppe/phase.hpp"
#include "ppe/signal_ops.hpp"

namespace ppe {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double lag_power(const MultiIndex& lag, const MultiIndex& m) {
    double p = 1.0;
    for (std::size_t d = 0; d < m.dim(); ++d) p *= std::pow(static_cast<double>(lag[d]), static_cast<double>(m[d]));
    return p;
}

void require_windows(const Signal& y, const DegreeSet& degrees, const std::vector<MultiIndex>& lags) {
    if (degrees.empty()) throw ValidationError("estimator: empty degree set");
    if (degrees.dim() != y.dim()) {
        throw ValidationError("estimator: degree dimension " + std::to_string(degrees.dim()) + " does not match signal dimension " +
                              std::to_string(y.dim()));
    }
    for (const auto& lag : lags) {
        for (const auto& m : degrees) {
            if (!partial_leq(lag.hadamard(m) + 1, y.window())) {
                throw ValidationError("estimator: window " + y.window().to_string() + " leaves nothing to average for degree " +
                                      m.to_string() + " at lag " + lag.to_string());
            }
        }
    }
}

// Core sequential loop shared by every variant. Returns the raw accumulated
// coefficients (not wrapped) in degree-set order.
std::vector<double> run_sequential(Signal y, const DegreeSet& degrees, Averaging kind, const std::vector<MultiIndex>& lags,
                                   Basis cancel_basis, std::vector<LagIncrement>* diagnostics) {
    require_windows(y, degrees, lags);
    std::vector<double> coeffs(degrees.size(), 0.0);
    for (std::size_t pos = degrees.size(); pos-- > 0;) {
        const MultiIndex& m = degrees[pos];
        for (const auto& lag : lags) {
            const Signal diff = phase_diff_multi(y, m, lag);
            const WeightField weights = weight_multi(m, lag, y.window());
            const Complex mean = average(kind, diff, weights);
            const double delta = arg(mean) / (kTwoPi * lag_power(lag, m));
            coeffs[pos] += delta;
            cancel_term(y, cancel_basis, delta, m);
            if (diagnostics) diagnostics->push_back(LagIncrement{m, lag, delta, std::abs(mean)});
        }
    }
    return coeffs;
}

bool is_unit_schedule(const std::vector<MultiIndex>& lags, std::size_t dim) {
    return lags.size() == 1 && lags.front() == MultiIndex::ones(dim);
}

}  // namespace

std::string_view to_string(Averaging kind) {
    switch (kind) {
        case Averaging::Linear: return "linear";
        case Averaging::KayComplex: return "kay";
        case Averaging::ProjectedLinear: return "lw";
        case Averaging::Circular: return "circular";
    }
    return "circular";
}

Averaging parse_averaging(std::string_view name) {
    if (name == "linear") return Averaging::Linear;
    if (name == "kay") return Averaging::KayComplex;
    if (name == "lw") return Averaging::ProjectedLinear;
    if (name == "circular") return Averaging::Circular;
    throw ValidationError("unknown averaging '" + std::string(name) + "' (expected linear, kay, lw or circular)");
}

bool is_rotation_equivariant(Averaging kind) { return kind != Averaging::Linear; }

std::vector<MultiIndex> EstimatorConfig::lag_schedule() const {
    if (lags.empty()) return {MultiIndex::ones(degrees.dim())};
    return lags;
}

void EstimatorConfig::validate() const {
    if (degrees.empty()) throw ValidationError("estimator config: empty degree set");
    const auto schedule = lag_schedule();
    if (schedule.front() != MultiIndex::ones(degrees.dim())) {
        throw ValidationError("estimator config: first lag must be all ones, got " + schedule.front().to_string());
    }
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        if (schedule[i].dim() != degrees.dim()) throw ValidationError("estimator config: lag " + schedule[i].to_string() + " has wrong dimension");
        if (i > 0 && (!partial_leq(schedule[i - 1], schedule[i]) || schedule[i - 1] == schedule[i])) {
            throw ValidationError("estimator config: lags must be strictly ascending, " + schedule[i - 1].to_string() +
                                  " then " + schedule[i].to_string());
        }
    }
}

Complex average(Averaging kind, const Signal& s, const WeightField& weights) {
    if (s.window() != weights.window()) {
        throw ValidationError("average: signal window " + s.window().to_string() + " differs from weight window " +
                              weights.window().to_string());
    }
    const std::size_t count = s.size();
    switch (kind) {
        case Averaging::Linear: {
            double acc = 0.0;
            for (std::size_t i = 0; i < count; ++i) acc += weights[i] * arg(s[i]);
            return std::polar(1.0, acc);
        }
        case Averaging::KayComplex: {
            Complex acc(0.0, 0.0);
            for (std::size_t i = 0; i < count; ++i) acc += weights[i] * s[i];
            return acc;
        }
        case Averaging::ProjectedLinear: {
            Complex acc(0.0, 0.0);
            for (std::size_t i = 0; i < count; ++i) acc += weights[i] * project_unit_circle(s[i]);
            return acc;
        }
        case Averaging::Circular: {
            Complex resultant(0.0, 0.0);
            for (std::size_t i = 0; i < count; ++i) resultant += project_unit_circle(s[i]);
            const Complex centre = project_unit_circle(resultant);
            const Complex back = std::conj(centre);
            double acc = 0.0;
            for (std::size_t i = 0; i < count; ++i) acc += weights[i] * arg(s[i] * back);
            return centre * std::polar(1.0, acc);
        }
    }
    throw ValidationError("average: unknown kind");
}

Estimate estimate_coefficients_multilag(const Signal& y, const EstimatorConfig& cfg) {
    cfg.validate();
    Estimate out;
    const auto raw = run_sequential(y, cfg.degrees, cfg.averaging, cfg.lag_schedule(), Basis::Binomial, &out.diagnostics);
    out.binomial = CoefficientVector{Basis::Binomial, cfg.degrees, wrap_to_cell(raw)};
    return out;
}

Estimate estimate_coefficients(const Signal& y, const EstimatorConfig& cfg) {
    if (!is_unit_schedule(cfg.lag_schedule(), cfg.degrees.dim())) {
        throw ValidationError("estimate_coefficients: only the unit lag is allowed here; use the multi-lag estimator");
    }
    return estimate_coefficients_multilag(y, cfg);
}

Estimate estimate_coefficients_lag(const Signal& y, const DegreeSet& degrees, Averaging kind, const MultiIndex& lag) {
    if (lag.dim() != degrees.dim()) throw ValidationError("estimator: lag dimension mismatch");
    for (std::size_t d = 0; d < lag.dim(); ++d) {
        if (lag[d] < 1) throw ValidationError("estimator: lag entries must be >= 1, got " + lag.to_string());
    }
    Estimate out;
    const auto raw = run_sequential(y, degrees, kind, {lag}, Basis::Binomial, &out.diagnostics);
    out.binomial = CoefficientVector{Basis::Binomial, degrees, raw};
    return out;
}

Estimate estimate_coefficients_direct(const Signal& y, const EstimatorConfig& cfg) {
    cfg.validate();
    if (!is_unit_schedule(cfg.lag_schedule(), cfg.degrees.dim())) {
        throw ValidationError("direct estimator: only the unit lag is supported");
    }
    const ChangeOfBasis change = binomial_to_monomial_matrix(cfg.degrees);
    Estimate out;
    const auto raw = run_sequential(y, cfg.degrees, cfg.averaging, cfg.lag_schedule(), Basis::Monomial, &out.diagnostics);
    CoefficientVector monomial{Basis::Monomial, cfg.degrees, raw};
    CoefficientVector binomial = monomial_to_binomial(monomial, change);
    binomial.values = wrap_to_cell(binomial.values);
    out.binomial = std::move(binomial);
    out.monomial = std::move(monomial);
    return out;
}

Estimate estimate_coefficients_general(const Signal& y, const EstimatorConfig& cfg) {
    cfg.validate();
    const DegreeSet closure = downward_closure(cfg.degrees);
    if (closure == cfg.degrees) return estimate_coefficients_multilag(y, cfg);

    EstimatorConfig closed = cfg;
    closed.degrees = closure;
    closed.general_degree_handling = false;
    Estimate wide = estimate_coefficients_multilag(y, closed);

    // Fisher-weighted least squares onto the subspace spanned by the target degrees.
    const Eigen::MatrixXd gram = binomial_gram(closure, y.window());
    const auto rows = static_cast<Eigen::Index>(closure.size());
    const auto cols = static_cast<Eigen::Index>(cfg.degrees.size());
    Eigen::MatrixXd select = Eigen::MatrixXd::Zero(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c) {
        select(static_cast<Eigen::Index>(*closure.position(cfg.degrees[static_cast<std::size_t>(c)])), c) = 1.0;
    }
    const Eigen::Map<const Eigen::VectorXd> b_wide(wide.binomial.values.data(), rows);
    const Eigen::MatrixXd reduced = select.transpose() * gram * select;
    const Eigen::VectorXd rhs = select.transpose() * gram * b_wide;
    const Eigen::VectorXd projected = spd_solve(reduced, rhs);

    Estimate out;
    out.binomial = CoefficientVector{Basis::Binomial, cfg.degrees,
                                     wrap_to_cell(std::span<const double>(projected.data(), static_cast<std::size_t>(cols)))};
    out.diagnostics = std::move(wide.diagnostics);
    return out;
}

Estimate estimate(const Signal& y, const EstimatorConfig& cfg) {
    if (cfg.general_degree_handling) return estimate_coefficients_general(y, cfg);
    return estimate_coefficients_multilag(y, cfg);
}

CoefficientVector restrict_to_degrees(const CoefficientVector& b, const DegreeSet& target) {
    b.check();
    CoefficientVector out = CoefficientVector::zeros(b.basis, target);
    for (std::size_t i = 0; i < target.size(); ++i) {
        const auto pos = b.degrees.position(target[i]);
        if (!pos) throw ValidationError("restrict_to_degrees: degree " + target[i].to_string() + " missing from the estimate");
        out.values[i] = b.values[*pos];
    }
    return out;
}

InvarianceWitness parameter_invariance_witness(const Signal& y, const RealField& x_true, const EstimatorConfig& cfg) {
    if (!is_rotation_equivariant(cfg.averaging)) {
        throw ValidationError("invariance witness: averaging '" + std::string(to_string(cfg.averaging)) + "' is not rotation equivariant");
    }
    if (x_true.window() != y.window()) throw ValidationError("invariance witness: phase field window mismatch");
    Signal rotated = y;
    for (std::size_t i = 0; i < rotated.size(); ++i) rotated[i] *= std::polar(1.0, -kTwoPi * x_true[i]);

    const Estimate direct = estimate(y, cfg);
    const Estimate centred = estimate(rotated, cfg);
    InvarianceWitness out;
    for (std::size_t i = 0; i < cfg.degrees.size(); ++i) {
        const double b_true = binomial_transform(x_true, cfg.degrees[i], cfg.degrees);
        const double v = direct.binomial.values[i] - b_true - centred.binomial.values[i];
        const double nearest = std::round(v);
        out.integers.push_back(static_cast<std::int64_t>(nearest));
        out.max_deviation = std::max(out.max_deviation, std::abs(v - nearest));
    }
    return out;
}

void to_json(Json& j, const Estimate& e) {
    j = Json::object();
    j["binomial"] = e.binomial;
    if (e.monomial) j["monomial"] = *e.monomial;
    Json diag = Json::array();
    for (const auto& inc : e.diagnostics) {
        Json row = Json::object();
        row["degree"] = inc.degree;
        row["lag"] = inc.lag;
        row["delta"] = inc.delta;
        row["resultant"] = inc.resultant;
        diag.push_back(std::move(row));
    }
    j["diagnostics"] = std::move(diag);
}

}  // namespace ppe
