#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "ppe/field.hpp"

namespace ppe {

// Nonnegative averaging weights over [N - tau∘k], summing to one.
using WeightField = RealField;

// Integer kernel of the covariance of the lagged k-th difference of white noise.
struct NoiseCovariance {
    MultiIndex window;  // N - tau∘k
    Eigen::MatrixXd matrix;
};

// Closed-form optimal weights along one axis: proportional to
// C(floor(n/tau)+k, k) C(ceil((N-n)/tau)-1, k) for n in [N - tau k].
std::vector<double> weight_1d(std::int64_t k, std::int64_t lag, std::int64_t length);

// Tensor product of weight_1d along every axis.
WeightField weight_multi(const MultiIndex& k, const MultiIndex& lag, const MultiIndex& window);

NoiseCovariance covariance_matrix(const MultiIndex& k, const MultiIndex& lag, const MultiIndex& window);

// C^{-1} 1 / (1' C^{-1} 1) by dense Cholesky; reference implementation only.
WeightField weight_via_inversion(const MultiIndex& k, const MultiIndex& lag, const MultiIndex& window);

inline constexpr std::int64_t kMaxInversionUnknowns = 4096;

namespace detail {
// Both evaluation routes of weight_1d, exposed so the switchover can be tested.
std::vector<double> weight_1d_exact(std::int64_t k, std::int64_t lag, std::int64_t length);
std::vector<double> weight_1d_log(std::int64_t k, std::int64_t lag, std::int64_t length);
inline constexpr std::int64_t kExactWeightLimit = 64;
}  // namespace detail

}  // namespace ppe
