#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "ppe/basis.hpp"
#include "ppe/field.hpp"

namespace ppe {

struct FisherMatrix {
    Eigen::MatrixXd matrix;
    DegreeSet degrees;
    double snr = 1.0;
};

// Orthogonal polynomial samples and their inner products with the binomial basis.
struct DecompositionPair {
    Eigen::MatrixXd inner;    // rows k, columns m: <C(n,m), q_k>
    Eigen::MatrixXd samples;  // rows k, columns flat n: q_k(n)
};

// sum over [N] of C(n,m) C(n,m'); the SNR-free part of the Fisher matrix.
Eigen::MatrixXd binomial_gram(const DegreeSet& degrees, const MultiIndex& window);

FisherMatrix fisher_matrix(const DegreeSet& degrees, const MultiIndex& window, double snr);
Eigen::MatrixXd crb(const DegreeSet& degrees, const MultiIndex& window, double snr);

// Cholesky solve with symmetric diagonal scaling; NumericalError if A is not SPD.
Eigen::MatrixXd spd_solve(const Eigen::MatrixXd& a, const Eigen::MatrixXd& rhs);
Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& a);

// q_k(n) over the window N; integer-valued, computed in exact arithmetic.
std::int64_t orthogonal_poly_exact(const MultiIndex& k, const MultiIndex& window, const MultiIndex& n);
double orthogonal_poly(const MultiIndex& k, const MultiIndex& window, const MultiIndex& n);

// Exact squared norm C(N+k,2k+1) C(2k,k), multiplied across axes.
std::int64_t orthogonal_norm(const MultiIndex& k, const MultiIndex& window);

DecompositionPair decomposition(const DegreeSet& degrees, const MultiIndex& window);

// High-SNR floor of the reconstruction MSE, |M|/(2 snr).
double reconstruction_bound(std::size_t num_degrees, double snr);
double reconstruction_bound(const DegreeSet& degrees, double snr);

double tr_kj(const Eigen::MatrixXd& k, const FisherMatrix& j);

// C(2M, M)^2
double naive_penalty(std::int64_t degree);

// True iff b_k + increment(n) leaves [-1/2, 1/2) somewhere.
bool outlier_predicate(const RealField& arg_increments, double b_k);

// Runs outlier_predicate for every degree, given the noise relative to the
// signal (y = s (1 + relative_noise)) and the true binomial coefficients.
bool phase_wrapping_occurred(const Signal& relative_noise, const CoefficientVector& b);

}  // namespace ppe
