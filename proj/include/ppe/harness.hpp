#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "ppe/basis.hpp"
#include "ppe/estimator.hpp"
#include "ppe/signal_ops.hpp"

namespace ppe {

enum class ParameterMode { Fixed, UniformCell, Zero };

struct ExperimentConfig {
    DegreeSet degrees;
    MultiIndex window;
    std::vector<double> snr_db_grid;
    std::uint64_t trials = 1;
    ParameterMode parameter_mode = ParameterMode::UniformCell;
    std::vector<double> fixed_coefficients;  // binomial basis, used by ParameterMode::Fixed
    EstimatorConfig estimator;               // its degree set must equal `degrees`
    std::uint64_t master_seed = 0;
    unsigned threads = 1;  // 0 picks the hardware concurrency; never changes results

    void validate() const;
};

struct TrialOutcome {
    double reconstruction_error = 0.0;
    bool wrapped = false;
    CoefficientVector truth;
    Estimate estimate;
};

struct SweepRecord {
    double snr_db = 0.0;
    std::uint64_t trials = 0;
    std::uint64_t wraps = 0;
    double mse_mean = 0.0;
    std::optional<double> mse_stderr;  // undefined for a single trial
    double wrap_probability = 0.0;
    std::optional<double> mse_given_wrap;
    std::optional<double> mse_given_nowrap;
    double crb_bound = 0.0;
};

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<SweepRecord> records;
};

using EstimatorFn = std::function<Estimate(const Signal&)>;

double db_to_linear(double db);

// Counter-based: depends only on its arguments, never on scheduling.
std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t snr_index, std::uint64_t trial_index);

// Sum over the window of |exp(j2pi xhat) - exp(j2pi x)|^2.
double reconstruction_error(const CoefficientVector& estimate, const CoefficientVector& truth, const MultiIndex& window);

// One Monte-Carlo trial at grid point snr_index. The noise is drawn relative
// to the signal, y = s (1 + w), so that w is also the rotated noise used by
// the wrap predicate.
TrialOutcome run_trial(const ExperimentConfig& cfg, std::size_t snr_index, std::uint64_t trial_index);
TrialOutcome run_trial(const ExperimentConfig& cfg, std::size_t snr_index, std::uint64_t trial_index, const EstimatorFn& estimator);

ExperimentResult run_sweep(const ExperimentConfig& cfg);
ExperimentResult run_sweep(const ExperimentConfig& cfg, const EstimatorFn& estimator);

// Runs fn(trial_index) for every index on cfg.threads workers.
void parallel_for(std::uint64_t count, unsigned threads, const std::function<void(std::uint64_t)>& fn);

// Sample covariance (n-1 normalisation) of wrap_to_cell(bhat - b_true).
Eigen::MatrixXd empirical_covariance(const std::vector<Estimate>& estimates, const CoefficientVector& b_true);

ExperimentConfig experiment_config_from_json(const Json& j);
void to_json(Json& j, const ExperimentConfig& cfg);
void write_result_csv(std::ostream& out, const ExperimentResult& result);

}  // namespace ppe
