#include "ppe/analysis.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "ppe/errors.hpp"
#include "ppe/signal_ops.hpp"

namespace ppe {

namespace {

using Int128 = __int128;

constexpr double kFisherScale = 8.0 * std::numbers::pi * std::numbers::pi;

void require_window(const DegreeSet& degrees, const MultiIndex& window, const char* what) {
    if (degrees.empty()) throw ValidationError(std::string(what) + ": empty degree set");
    if (degrees.dim() != window.dim()) throw ValidationError(std::string(what) + ": dimension mismatch");
    if (!validate_degree_set(degrees, window).window_ok) {
        throw ValidationError(std::string(what) + ": window " + window.to_string() + " too small for the degree set");
    }
}

std::int64_t to_int64(Int128 v, const char* what) {
    if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min()) {
        throw OverflowError(std::string(what) + " exceeds int64");
    }
    return static_cast<std::int64_t>(v);
}

// sum_{n<length} C(n,a) C(n,b)
long double axis_gram(std::int64_t length, std::int64_t a, std::int64_t b) {
    Int128 total = 0;
    for (std::int64_t n = std::max(a, b); n < length; ++n) total += static_cast<Int128>(binom(n, a)) * binom(n, b);
    return static_cast<long double>(total);
}

std::int64_t axis_orthogonal_poly(std::int64_t k, std::int64_t length, std::int64_t n) {
    Int128 total = 0;
    const std::int64_t lo = std::max<std::int64_t>(0, n - k);
    const std::int64_t hi = std::min(n, length - k - 1);
    for (std::int64_t l = lo; l <= hi; ++l) {
        const Int128 sign = ((k + n + l) % 2 == 0) ? 1 : -1;
        total += sign * static_cast<Int128>(binom(l + k, k)) * binom(length - l - 1, k) * binom(k, n - l);
    }
    return to_int64(total, "orthogonal polynomial");
}

// <C(n,m), q_k> along one axis
long double axis_inner(std::int64_t k, std::int64_t m, std::int64_t length) {
    Int128 total = 0;
    for (std::int64_t n = 0; n < length - k; ++n) {
        total += static_cast<Int128>(binom(n, m - k)) * binom(n + k, k) * binom(length - n - 1, k);
    }
    return static_cast<long double>(total);
}

}  // namespace

Eigen::MatrixXd binomial_gram(const DegreeSet& degrees, const MultiIndex& window) {
    require_window(degrees, window, "fisher matrix");
    const auto size = static_cast<Eigen::Index>(degrees.size());
    Eigen::MatrixXd gram(size, size);
    for (Eigen::Index i = 0; i < size; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            const MultiIndex& a = degrees[static_cast<std::size_t>(i)];
            const MultiIndex& b = degrees[static_cast<std::size_t>(j)];
            long double entry = 1.0L;
            for (std::size_t d = 0; d < window.dim(); ++d) entry *= axis_gram(window[d], a[d], b[d]);
            gram(i, j) = gram(j, i) = static_cast<double>(entry);
        }
    }
    return gram;
}

FisherMatrix fisher_matrix(const DegreeSet& degrees, const MultiIndex& window, double snr) {
    if (!(snr > 0.0)) throw ValidationError("fisher matrix: snr must be positive");
    return FisherMatrix{kFisherScale * snr * binomial_gram(degrees, window), degrees, snr};
}

Eigen::MatrixXd crb(const DegreeSet& degrees, const MultiIndex& window, double snr) {
    return spd_inverse(fisher_matrix(degrees, window, snr).matrix);
}

Eigen::MatrixXd spd_solve(const Eigen::MatrixXd& a, const Eigen::MatrixXd& rhs) {
    if (a.rows() != a.cols() || a.rows() != rhs.rows()) throw ValidationError("spd_solve: shape mismatch");
    Eigen::VectorXd scale(a.rows());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        if (!(a(i, i) > 0.0)) throw NumericalError("spd_solve: matrix is not positive definite");
        scale(i) = 1.0 / std::sqrt(a(i, i));
    }
    const Eigen::MatrixXd scaled = scale.asDiagonal() * a * scale.asDiagonal();
    const Eigen::LLT<Eigen::MatrixXd> llt(scaled);
    if (llt.info() != Eigen::Success) throw NumericalError("spd_solve: matrix is not positive definite");
    return scale.asDiagonal() * llt.solve(scale.asDiagonal() * rhs);
}

Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& a) {
    return spd_solve(a, Eigen::MatrixXd::Identity(a.rows(), a.cols()));
}

std::int64_t orthogonal_poly_exact(const MultiIndex& k, const MultiIndex& window, const MultiIndex& n) {
    if (k.dim() != window.dim() || n.dim() != window.dim()) throw ValidationError("orthogonal_poly: dimension mismatch");
    std::int64_t out = 1;
    for (std::size_t d = 0; d < window.dim(); ++d) {
        if (k[d] < 0 || k[d] >= window[d]) throw ValidationError("orthogonal_poly: degree " + k.to_string() + " outside [N]");
        if (n[d] < 0 || n[d] >= window[d]) throw ValidationError("orthogonal_poly: sample " + n.to_string() + " outside [N]");
        const std::int64_t v = axis_orthogonal_poly(k[d], window[d], n[d]);
        if (__builtin_mul_overflow(out, v, &out)) throw OverflowError("orthogonal polynomial exceeds int64");
    }
    return out;
}

double orthogonal_poly(const MultiIndex& k, const MultiIndex& window, const MultiIndex& n) {
    return static_cast<double>(orthogonal_poly_exact(k, window, n));
}

std::int64_t orthogonal_norm(const MultiIndex& k, const MultiIndex& window) {
    std::int64_t out = 1;
    for (std::size_t d = 0; d < window.dim(); ++d) {
        const Int128 v = static_cast<Int128>(binom(window[d] + k[d], 2 * k[d] + 1)) * binom(2 * k[d], k[d]);
        if (__builtin_mul_overflow(out, to_int64(v, "orthogonal norm"), &out)) throw OverflowError("orthogonal norm exceeds int64");
    }
    return out;
}

DecompositionPair decomposition(const DegreeSet& degrees, const MultiIndex& window) {
    require_window(degrees, window, "decomposition");
    const auto size = static_cast<Eigen::Index>(degrees.size());
    const std::int64_t samples = window.volume();
    DecompositionPair out{Eigen::MatrixXd::Zero(size, size), Eigen::MatrixXd::Zero(size, samples)};
    for (Eigen::Index row = 0; row < size; ++row) {
        const MultiIndex& k = degrees[static_cast<std::size_t>(row)];
        for (Eigen::Index col = 0; col < size; ++col) {
            const MultiIndex& m = degrees[static_cast<std::size_t>(col)];
            long double entry = 1.0L;
            for (std::size_t d = 0; d < window.dim(); ++d) entry *= axis_inner(k[d], m[d], window[d]);
            out.inner(row, col) = static_cast<double>(entry);
        }
        Eigen::Index flat = 0;
        for_each_in_box(window, [&](const MultiIndex& n) { out.samples(row, flat++) = orthogonal_poly(k, window, n); });
    }
#ifndef NDEBUG
    if (validate_degree_set(degrees, window).downward_closed) {
        const Eigen::MatrixXd gram = binomial_gram(degrees, window);
        const Eigen::MatrixXd rebuilt = out.inner.transpose() * spd_solve(out.samples * out.samples.transpose(), out.inner);
        if ((gram - rebuilt).norm() > 1e-8 * gram.norm()) throw NumericalError("decomposition does not reproduce the Fisher matrix");
    }
#endif
    return out;
}

double reconstruction_bound(std::size_t num_degrees, double snr) {
    if (!(snr > 0.0)) throw ValidationError("reconstruction bound: snr must be positive");
    return static_cast<double>(num_degrees) / (2.0 * snr);
}

double reconstruction_bound(const DegreeSet& degrees, double snr) { return reconstruction_bound(degrees.size(), snr); }

double tr_kj(const Eigen::MatrixXd& k, const FisherMatrix& j) {
    if (k.rows() != j.matrix.rows() || k.cols() != j.matrix.cols()) throw ValidationError("tr_kj: shape mismatch");
    return (k * j.matrix).trace();
}

double naive_penalty(std::int64_t degree) {
    if (degree < 0) throw ValidationError("naive_penalty: degree must be nonnegative");
    const double c = static_cast<double>(binom(2 * degree, degree));
    return c * c;
}

bool outlier_predicate(const RealField& arg_increments, double b_k) {
    for (double inc : arg_increments.values()) {
        const double v = b_k + inc;
        if (v < -0.5 || v >= 0.5) return true;
    }
    return false;
}

bool phase_wrapping_occurred(const Signal& relative_noise, const CoefficientVector& b) {
    b.check();
    RealField phase(relative_noise.window());
    for (std::size_t i = 0; i < phase.size(); ++i) {
        phase[i] = arg(Complex(1.0, 0.0) + relative_noise[i]) / (2.0 * std::numbers::pi);
    }
    for (std::size_t i = 0; i < b.values.size(); ++i) {
        if (outlier_predicate(finite_difference(phase, b.degrees[i]), b.values[i])) return true;
    }
    return false;
}

}  // namespace ppe
