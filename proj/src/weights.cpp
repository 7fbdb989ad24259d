#include "ppe/weights.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ppe/errors.hpp"

namespace ppe {

namespace {

void check_1d(std::int64_t k, std::int64_t lag, std::int64_t length) {
    if (k < 0) throw ValidationError("weights: negative order " + std::to_string(k));
    if (lag < 1) throw ValidationError("weights: lag must be >= 1, got " + std::to_string(lag));
    if (length <= lag * k) {
        throw ValidationError("weights: window " + std::to_string(length) + " must exceed lag*order = " + std::to_string(lag * k));
    }
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

// log C(a, k) as a sum of k logs; accurate for the small k used here.
double log_binom(std::int64_t a, std::int64_t k) {
    double s = 0.0;
    for (std::int64_t i = 1; i <= k; ++i) s += std::log(static_cast<double>(a - k + i) / static_cast<double>(i));
    return s;
}

std::vector<double> normalized(std::vector<double> raw) {
    long double total = 0.0L;
    for (double v : raw) total += v;
    for (double& v : raw) v = static_cast<double>(v / total);
    return raw;
}

// Per-axis covariance kernel: sum over l, l' of (-1)^(l+l') C(k,l) C(k,l') [n + tau l == n' + tau l'].
std::int64_t kernel_1d(std::int64_t n, std::int64_t np, std::int64_t k, std::int64_t lag) {
    std::int64_t total = 0;
    for (std::int64_t l = 0; l <= k; ++l) {
        const std::int64_t shifted = n + lag * l - np;
        if (shifted % lag != 0) continue;
        const std::int64_t lp = shifted / lag;
        if (lp < 0 || lp > k) continue;
        const std::int64_t sign = ((l + lp) % 2 == 0) ? 1 : -1;
        total += sign * binom(k, l) * binom(k, lp);
    }
    return total;
}

}  // namespace

namespace detail {

std::vector<double> weight_1d_exact(std::int64_t k, std::int64_t lag, std::int64_t length) {
    check_1d(k, lag, length);
    std::vector<double> raw(static_cast<std::size_t>(length - lag * k));
    for (std::int64_t n = 0; n < static_cast<std::int64_t>(raw.size()); ++n) {
        const std::int64_t left = binom(n / lag + k, k);
        const std::int64_t right = binom(ceil_div(length - n, lag) - 1, k);
        raw[static_cast<std::size_t>(n)] = static_cast<double>(left) * static_cast<double>(right);
    }
    return normalized(std::move(raw));
}

std::vector<double> weight_1d_log(std::int64_t k, std::int64_t lag, std::int64_t length) {
    check_1d(k, lag, length);
    std::vector<double> logs(static_cast<std::size_t>(length - lag * k));
    for (std::int64_t n = 0; n < static_cast<std::int64_t>(logs.size()); ++n) {
        logs[static_cast<std::size_t>(n)] = log_binom(n / lag + k, k) + log_binom(ceil_div(length - n, lag) - 1, k);
    }
    const double peak = *std::max_element(logs.begin(), logs.end());
    for (double& v : logs) v = std::exp(v - peak);
    return normalized(std::move(logs));
}

}  // namespace detail

std::vector<double> weight_1d(std::int64_t k, std::int64_t lag, std::int64_t length) {
    if (length <= detail::kExactWeightLimit) {
        try {
            return detail::weight_1d_exact(k, lag, length);
        } catch (const OverflowError&) {
            // very high orders on short windows; fall through
        }
    }
    return detail::weight_1d_log(k, lag, length);
}

WeightField weight_multi(const MultiIndex& k, const MultiIndex& lag, const MultiIndex& window) {
    if (k.dim() != window.dim() || lag.dim() != window.dim()) throw ValidationError("weights: dimension mismatch");
    std::vector<std::vector<double>> axes;
    for (std::size_t d = 0; d < window.dim(); ++d) axes.push_back(weight_1d(k[d], lag[d], window[d]));
    WeightField out(window - lag.hadamard(k));
    std::size_t flat = 0;
    for_each_in_box(out.window(), [&](const MultiIndex& n) {
        double w = 1.0;
        for (std::size_t d = 0; d < n.dim(); ++d) w *= axes[d][static_cast<std::size_t>(n[d])];
        out[flat++] = w;
    });
    return out;
}

NoiseCovariance covariance_matrix(const MultiIndex& k, const MultiIndex& lag, const MultiIndex& window) {
    if (k.dim() != window.dim() || lag.dim() != window.dim()) throw ValidationError("covariance: dimension mismatch");
    for (std::size_t d = 0; d < window.dim(); ++d) check_1d(k[d], lag[d], window[d]);
    const MultiIndex reduced = window - lag.hadamard(k);
    const std::int64_t size = reduced.volume();
    if (size > kMaxInversionUnknowns) {
        throw ValidationError("covariance: " + std::to_string(size) + " unknowns exceeds the dense limit of " +
                              std::to_string(kMaxInversionUnknowns));
    }
    std::vector<MultiIndex> points;
    for_each_in_box(reduced, [&](const MultiIndex& n) { points.push_back(n); });

    NoiseCovariance out{reduced, Eigen::MatrixXd::Zero(size, size)};
    for (std::int64_t i = 0; i < size; ++i) {
        for (std::int64_t j = 0; j <= i; ++j) {
            std::int64_t entry = 1;
            for (std::size_t d = 0; d < window.dim() && entry != 0; ++d) {
                entry *= kernel_1d(points[i][d], points[j][d], k[d], lag[d]);
            }
            out.matrix(i, j) = out.matrix(j, i) = static_cast<double>(entry);
        }
    }
    return out;
}

WeightField weight_via_inversion(const MultiIndex& k, const MultiIndex& lag, const MultiIndex& window) {
    const NoiseCovariance cov = covariance_matrix(k, lag, window);
    const Eigen::LLT<Eigen::MatrixXd> llt(cov.matrix);
    if (llt.info() != Eigen::Success) throw NumericalError("covariance matrix is not positive definite");
    const Eigen::VectorXd x = llt.solve(Eigen::VectorXd::Ones(cov.matrix.rows()));
    const double total = x.sum();
    WeightField out(cov.window);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x(static_cast<Eigen::Index>(i)) / total;
    return out;
}

}  // namespace ppe
