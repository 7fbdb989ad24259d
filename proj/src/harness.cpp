#include "ppe/harness.hpp"

#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <numbers>
#include <ostream>
#include <string>
#include <thread>

#include "ppe/analysis.hpp"
#include "ppe/errors.hpp"
#include "ppe/phase.hpp"

namespace ppe {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

CoefficientVector draw_truth(const ExperimentConfig& cfg, Rng& rng) {
    CoefficientVector b = CoefficientVector::zeros(Basis::Binomial, cfg.degrees);
    switch (cfg.parameter_mode) {
        case ParameterMode::Zero: break;
        case ParameterMode::Fixed: b.values = cfg.fixed_coefficients; break;
        case ParameterMode::UniformCell: {
            std::uniform_real_distribution<double> cell(-0.5, 0.5);
            for (auto& v : b.values) v = cell(rng);
            break;
        }
    }
    return b;
}

// The degrees the estimator actually differences over.
CoefficientVector working_truth(const ExperimentConfig& cfg, const CoefficientVector& truth) {
    if (!cfg.estimator.general_degree_handling) return truth;
    const DegreeSet closure = downward_closure(truth.degrees);
    CoefficientVector wide = CoefficientVector::zeros(Basis::Binomial, closure);
    for (std::size_t i = 0; i < truth.degrees.size(); ++i) wide.values[*closure.position(truth.degrees[i])] = truth.values[i];
    return wide;
}

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string format_optional(const std::optional<double>& v) { return v ? format_number(*v) : "NA"; }

template <class Fn>
auto with_field(const char* field, Fn&& fn) {
    try {
        return fn();
    } catch (const std::exception& e) {
        throw ValidationError(std::string("config field '") + field + "': " + e.what());
    }
}

}  // namespace

void ExperimentConfig::validate() const {
    if (degrees.empty()) throw ValidationError("experiment: empty degree set");
    if (trials < 1) throw ValidationError("experiment: trials must be >= 1");
    if (snr_db_grid.empty()) throw ValidationError("experiment: SNR grid is empty");
    if (!(estimator.degrees == degrees)) throw ValidationError("experiment: estimator degree set differs from the experiment's");
    if (parameter_mode == ParameterMode::Fixed && fixed_coefficients.size() != degrees.size()) {
        throw ValidationError("experiment: fixed parameters need " + std::to_string(degrees.size()) + " coefficients");
    }
    const DegreeSet effective = estimator.general_degree_handling ? downward_closure(degrees) : degrees;
    if (!validate_degree_set(effective, window).window_ok) {
        throw ValidationError("experiment: window " + window.to_string() + " too small for the degree set");
    }
    estimator.validate();
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t snr_index, std::uint64_t trial_index) {
    return splitmix(splitmix(splitmix(master_seed) ^ snr_index) ^ trial_index);
}

double reconstruction_error(const CoefficientVector& estimate, const CoefficientVector& truth, const MultiIndex& window) {
    const RealField est_phase = phase_field(estimate, window);
    const RealField true_phase = phase_field(truth, window);
    double total = 0.0;
    for (std::size_t i = 0; i < est_phase.size(); ++i) {
        const double s = std::sin(std::numbers::pi * (est_phase[i] - true_phase[i]));
        total += 4.0 * s * s;
    }
    return total;
}

TrialOutcome run_trial(const ExperimentConfig& cfg, std::size_t snr_index, std::uint64_t trial_index, const EstimatorFn& estimator) {
    if (snr_index >= cfg.snr_db_grid.size()) throw ValidationError("run_trial: SNR index out of range");
    const double snr = db_to_linear(cfg.snr_db_grid[snr_index]);
    Rng rng(trial_seed(cfg.master_seed, snr_index, trial_index));

    TrialOutcome out;
    out.truth = draw_truth(cfg, rng);
    const Signal clean = synthesize(out.truth, cfg.window);
    const Signal relative = complex_noise(cfg.window, snr, rng);
    Signal y = clean;
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += clean[i] * relative[i];

    out.estimate = estimator(y);
    out.reconstruction_error = reconstruction_error(out.estimate.binomial, out.truth, cfg.window);
    out.wrapped = phase_wrapping_occurred(relative, working_truth(cfg, out.truth));
    return out;
}

TrialOutcome run_trial(const ExperimentConfig& cfg, std::size_t snr_index, std::uint64_t trial_index) {
    return run_trial(cfg, snr_index, trial_index, [&](const Signal& y) { return estimate(y, cfg.estimator); });
}

void parallel_for(std::uint64_t count, unsigned threads, const std::function<void(std::uint64_t)>& fn) {
    unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
    workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, std::max<std::uint64_t>(count, 1)));
    if (workers <= 1) {
        for (std::uint64_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::exception_ptr failure;
    std::mutex failure_lock;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::uint64_t i = w; i < count; i += workers) fn(i);
            } catch (...) {
                std::lock_guard lock(failure_lock);
                if (!failure) failure = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

ExperimentResult run_sweep(const ExperimentConfig& cfg, const EstimatorFn& estimator) {
    cfg.validate();
    ExperimentResult result{cfg, {}};
    for (std::size_t s = 0; s < cfg.snr_db_grid.size(); ++s) {
        std::vector<double> errors(cfg.trials);
        std::vector<char> wrapped(cfg.trials);
        parallel_for(cfg.trials, cfg.threads, [&](std::uint64_t t) {
            const TrialOutcome outcome = run_trial(cfg, s, t, estimator);
            errors[t] = outcome.reconstruction_error;
            wrapped[t] = outcome.wrapped ? 1 : 0;
        });

        // Reduction in index order keeps results independent of the worker count.
        SweepRecord rec;
        rec.snr_db = cfg.snr_db_grid[s];
        rec.trials = cfg.trials;
        double total = 0.0, wrap_total = 0.0;
        for (std::uint64_t t = 0; t < cfg.trials; ++t) {
            total += errors[t];
            if (wrapped[t]) {
                ++rec.wraps;
                wrap_total += errors[t];
            }
        }
        const auto n = static_cast<double>(cfg.trials);
        rec.mse_mean = total / n;
        if (cfg.trials > 1) {
            double ss = 0.0;
            for (double e : errors) ss += (e - rec.mse_mean) * (e - rec.mse_mean);
            rec.mse_stderr = std::sqrt(ss / (n - 1.0) / n);
        }
        rec.wrap_probability = static_cast<double>(rec.wraps) / n;
        if (rec.wraps > 0) rec.mse_given_wrap = wrap_total / static_cast<double>(rec.wraps);
        if (rec.wraps < cfg.trials) rec.mse_given_nowrap = (total - wrap_total) / static_cast<double>(cfg.trials - rec.wraps);
        rec.crb_bound = reconstruction_bound(cfg.degrees, db_to_linear(rec.snr_db));
        result.records.push_back(rec);
    }
    return result;
}

ExperimentResult run_sweep(const ExperimentConfig& cfg) {
    return run_sweep(cfg, [&](const Signal& y) { return estimate(y, cfg.estimator); });
}

Eigen::MatrixXd empirical_covariance(const std::vector<Estimate>& estimates, const CoefficientVector& b_true) {
    if (estimates.size() < 2) throw ValidationError("empirical covariance needs at least two estimates");
    b_true.check();
    const auto size = static_cast<Eigen::Index>(b_true.values.size());
    Eigen::MatrixXd diffs(static_cast<Eigen::Index>(estimates.size()), size);
    for (std::size_t r = 0; r < estimates.size(); ++r) {
        const auto& v = estimates[r].binomial.values;
        if (v.size() != b_true.values.size()) throw ValidationError("empirical covariance: estimate size mismatch");
        for (Eigen::Index c = 0; c < size; ++c) {
            diffs(static_cast<Eigen::Index>(r), c) = wrap_to_cell(v[static_cast<std::size_t>(c)] - b_true.values[static_cast<std::size_t>(c)]);
        }
    }
    // Shifting by the first row first keeps identical samples exactly at zero.
    const Eigen::RowVectorXd anchor = diffs.row(0);
    const Eigen::MatrixXd shifted = diffs.rowwise() - anchor;
    const Eigen::MatrixXd centred = shifted.rowwise() - shifted.colwise().mean();
    return centred.transpose() * centred / static_cast<double>(estimates.size() - 1);
}

ExperimentConfig experiment_config_from_json(const Json& j) {
    if (!j.is_object()) throw ValidationError("config must be a JSON object");
    for (const char* key : {"degrees", "window", "snr_db", "trials"}) {
        if (!j.contains(key)) throw ValidationError(std::string("config field '") + key + "' is missing");
    }
    ExperimentConfig cfg;
    const auto listed = with_field("degrees", [&] { return j.at("degrees").get<std::vector<MultiIndex>>(); });
    cfg.degrees = with_field("degrees", [&] { return build_total_order(listed); });
    cfg.window = with_field("window", [&] { return j.at("window").get<MultiIndex>(); });
    cfg.snr_db_grid = with_field("snr_db", [&] { return j.at("snr_db").get<std::vector<double>>(); });
    cfg.trials = with_field("trials", [&] {
        const auto& t = j.at("trials");
        if (!t.is_number_integer() || t.get<std::int64_t>() < 1) throw ValidationError("must be a positive integer");
        return t.get<std::uint64_t>();
    });
    if (j.contains("parameter_mode")) {
        with_field("parameter_mode", [&] {
            const auto& mode = j.at("parameter_mode");
            if (mode.is_string() && mode == "uniform_cell") cfg.parameter_mode = ParameterMode::UniformCell;
            else if (mode.is_string() && mode == "zero") cfg.parameter_mode = ParameterMode::Zero;
            else if (mode.is_object() && mode.contains("fixed")) {
                cfg.parameter_mode = ParameterMode::Fixed;
                // values follow the degrees as listed; store them in the canonical order
                const auto given = mode.at("fixed").get<std::vector<double>>();
                if (given.size() != listed.size() || listed.size() != cfg.degrees.size()) {
                    throw ValidationError("needs one value per listed degree (no duplicates)");
                }
                cfg.fixed_coefficients.assign(given.size(), 0.0);
                for (std::size_t i = 0; i < listed.size(); ++i) cfg.fixed_coefficients[*cfg.degrees.position(listed[i])] = given[i];
            } else {
                throw ValidationError("expected \"uniform_cell\", \"zero\" or {\"fixed\": [...]}");
            }
            return 0;
        });
    }
    cfg.estimator.degrees = cfg.degrees;
    if (j.contains("estimator")) {
        const auto& est = j.at("estimator");
        if (!est.is_object()) throw ValidationError("config field 'estimator' must be an object");
        if (est.contains("averaging")) {
            cfg.estimator.averaging = with_field("estimator.averaging", [&] { return parse_averaging(est.at("averaging").get<std::string>()); });
        }
        if (est.contains("lags")) {
            cfg.estimator.lags = with_field("estimator.lags", [&] { return est.at("lags").get<std::vector<MultiIndex>>(); });
        }
        if (est.contains("general_degree_handling")) {
            cfg.estimator.general_degree_handling =
                with_field("estimator.general_degree_handling", [&] { return est.at("general_degree_handling").get<bool>(); });
        }
    }
    if (j.contains("master_seed")) cfg.master_seed = with_field("master_seed", [&] { return j.at("master_seed").get<std::uint64_t>(); });
    if (j.contains("threads")) cfg.threads = with_field("threads", [&] { return j.at("threads").get<unsigned>(); });
    with_field("experiment", [&] {
        cfg.validate();
        return 0;
    });
    return cfg;
}

void to_json(Json& j, const ExperimentConfig& cfg) {
    j = Json::object();
    j["degrees"] = cfg.degrees;
    j["window"] = cfg.window;
    j["snr_db"] = cfg.snr_db_grid;
    j["trials"] = cfg.trials;
    switch (cfg.parameter_mode) {
        case ParameterMode::UniformCell: j["parameter_mode"] = "uniform_cell"; break;
        case ParameterMode::Zero: j["parameter_mode"] = "zero"; break;
        case ParameterMode::Fixed: j["parameter_mode"] = Json{{"fixed", cfg.fixed_coefficients}}; break;
    }
    Json est = Json::object();
    est["averaging"] = std::string(to_string(cfg.estimator.averaging));
    est["lags"] = cfg.estimator.lag_schedule();
    est["general_degree_handling"] = cfg.estimator.general_degree_handling;
    j["estimator"] = std::move(est);
    j["master_seed"] = cfg.master_seed;
}

void write_result_csv(std::ostream& out, const ExperimentResult& result) {
    out << "snr_db,mse_mean,mse_stderr,wrap_prob,mse_wrap,mse_nowrap,crb_bound\n";
    for (const auto& r : result.records) {
        out << format_number(r.snr_db) << ',' << format_number(r.mse_mean) << ',' << format_optional(r.mse_stderr) << ','
            << format_number(r.wrap_probability) << ',' << format_optional(r.mse_given_wrap) << ','
            << format_optional(r.mse_given_nowrap) << ',' << format_number(r.crb_bound) << '\n';
    }
}

}  // namespace ppe
