#include <doctest.h>

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "ppe/analysis.hpp"
#include "ppe/errors.hpp"
#include "ppe/signal_ops.hpp"

using namespace ppe;

namespace {

constexpr double kEightPiSq = 8.0 * std::numbers::pi * std::numbers::pi;

DegreeSet chain(std::int64_t top) {
    std::vector<MultiIndex> ms;
    for (std::int64_t m = 0; m <= top; ++m) ms.push_back(MultiIndex{m});
    return build_total_order(ms);
}

DegreeSet total_degree(std::int64_t top) {
    std::vector<MultiIndex> ms;
    for (std::int64_t a = 0; a <= top; ++a)
        for (std::int64_t b = 0; a + b <= top; ++b) ms.push_back(MultiIndex{a, b});
    return build_total_order(ms);
}

// Definition-level oracle: k-th forward difference of C(n,k) C(n-N,k), in integers.
std::vector<std::int64_t> q_by_differencing(std::int64_t k, std::int64_t length) {
    std::vector<std::int64_t> g(static_cast<std::size_t>(length + k));
    for (std::int64_t n = 0; n < length + k; ++n) g[static_cast<std::size_t>(n)] = binom(n, k) * binom(n - length, k);
    for (std::int64_t step = 0; step < k; ++step) {
        for (std::size_t i = 0; i + 1 < g.size(); ++i) g[i] = g[i + 1] - g[i];
        g.pop_back();
    }
    g.resize(static_cast<std::size_t>(length));
    return g;
}

}  // namespace

TEST_SUITE("analysis") {

TEST_CASE("fisher_matrix examples") {
    const FisherMatrix scalar = fisher_matrix(chain(0), MultiIndex{16}, 1.0);
    CHECK(scalar.matrix(0, 0) == doctest::Approx(kEightPiSq * 16.0));

    const FisherMatrix j = fisher_matrix(chain(1), MultiIndex{4}, 2.5);
    Eigen::Matrix2d gram;
    gram << 4, 6, 6, 14;
    CHECK((j.matrix - kEightPiSq * 2.5 * gram).cwiseAbs().maxCoeff() < 1e-10);

    const FisherMatrix doubled = fisher_matrix(total_degree(2), MultiIndex{7, 9}, 5.0);
    const FisherMatrix base = fisher_matrix(total_degree(2), MultiIndex{7, 9}, 2.5);
    CHECK(doubled.matrix.isApprox(2.0 * base.matrix, 1e-14));
    CHECK(doubled.matrix.isApprox(doubled.matrix.transpose()));
    CHECK(doubled.matrix.llt().info() == Eigen::Success);

    CHECK_THROWS_AS(fisher_matrix(chain(4), MultiIndex{4}, 1.0), ValidationError);
}

TEST_CASE("binomial_gram matches brute-force summation") {
    const DegreeSet degrees = total_degree(3);
    const MultiIndex window{6, 5};
    const Eigen::MatrixXd gram = binomial_gram(degrees, window);
    for (std::size_t i = 0; i < degrees.size(); ++i) {
        for (std::size_t j = 0; j < degrees.size(); ++j) {
            std::int64_t total = 0;
            for_each_in_box(window, [&](const MultiIndex& n) { total += multi_binom(n, degrees[i]) * multi_binom(n, degrees[j]); });
            CHECK(gram(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) == static_cast<double>(total));
        }
    }
}

TEST_CASE("crb examples") {
    const Eigen::MatrixXd scalar = crb(chain(0), MultiIndex{10}, 3.0);
    CHECK(scalar(0, 0) == doctest::Approx(1.0 / (kEightPiSq * 3.0 * 10.0)));

    const DegreeSet degrees = total_degree(3);
    const MultiIndex window{12, 11};
    const Eigen::MatrixXd k = crb(degrees, window, 0.7);
    const FisherMatrix j = fisher_matrix(degrees, window, 0.7);
    CHECK((k * j.matrix - Eigen::MatrixXd::Identity(10, 10)).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("dropping known coefficients lowers the bound in Loewner order") {
    const Eigen::MatrixXd full = fisher_matrix(chain(3), MultiIndex{64}, 1.0).matrix;
    // keep degrees 0 and 3
    Eigen::MatrixXd select = Eigen::MatrixXd::Zero(4, 2);
    select(0, 0) = 1.0;
    select(3, 1) = 1.0;
    const Eigen::MatrixXd constrained = spd_inverse(select.transpose() * full * select);
    const Eigen::MatrixXd unconstrained = select.transpose() * spd_inverse(full) * select;
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(unconstrained - constrained);
    CHECK(eig.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("spd_solve") {
    Eigen::MatrixXd a(3, 3);
    a << 4, 1, 0, 1, 3, 1, 0, 1, 2;
    const Eigen::VectorXd x = spd_solve(a, Eigen::VectorXd::Ones(3));
    CHECK((a * x - Eigen::VectorXd::Ones(3)).cwiseAbs().maxCoeff() < 1e-14);
    Eigen::MatrixXd indefinite(2, 2);
    indefinite << 1, 2, 2, 1;
    CHECK_THROWS_AS(spd_solve(indefinite, Eigen::VectorXd::Ones(2)), NumericalError);
}

TEST_CASE("orthogonal_poly examples") {
    const double expected[] = {-3, -1, 1, 3};
    for (std::int64_t n = 0; n < 4; ++n) CHECK(orthogonal_poly(MultiIndex{1}, MultiIndex{4}, MultiIndex{n}) == expected[n]);
    for_each_in_box(MultiIndex{3, 4}, [&](const MultiIndex& n) {
        CHECK(orthogonal_poly_exact(MultiIndex{0, 0}, MultiIndex{3, 4}, n) == 1);
    });
    std::int64_t norm = 0;
    for (std::int64_t n = 0; n < 4; ++n) norm += orthogonal_poly_exact(MultiIndex{1}, MultiIndex{4}, MultiIndex{n}) * orthogonal_poly_exact(MultiIndex{1}, MultiIndex{4}, MultiIndex{n});
    CHECK(norm == 20);
    CHECK(orthogonal_norm(MultiIndex{1}, MultiIndex{4}) == 20);
    CHECK_THROWS_AS(orthogonal_poly_exact(MultiIndex{4}, MultiIndex{4}, MultiIndex{0}), ValidationError);
}

TEST_CASE("closed form matches finite differencing of the generating product") {
    for (std::int64_t length = 1; length <= 14; ++length) {
        for (std::int64_t k = 0; k < length; ++k) {
            const auto oracle = q_by_differencing(k, length);
            for (std::int64_t n = 0; n < length; ++n) {
                CHECK(orthogonal_poly_exact(MultiIndex{k}, MultiIndex{length}, MultiIndex{n}) == oracle[static_cast<std::size_t>(n)]);
            }
        }
    }
    // separable in several dimensions
    const MultiIndex window{5, 4};
    const auto q0 = q_by_differencing(2, 5);
    const auto q1 = q_by_differencing(3, 4);
    for_each_in_box(window, [&](const MultiIndex& n) {
        CHECK(orthogonal_poly_exact(MultiIndex{2, 3}, window, n) == q0[static_cast<std::size_t>(n[0])] * q1[static_cast<std::size_t>(n[1])]);
    });
}

TEST_CASE("orthogonality holds exactly in integers") {
    for (std::int64_t length = 1; length <= 12; ++length) {
        for (std::int64_t k = 0; k < length; ++k) {
            for (std::int64_t k2 = 0; k2 < length; ++k2) {
                __int128 total = 0;
                for (std::int64_t n = 0; n < length; ++n) {
                    total += static_cast<__int128>(orthogonal_poly_exact(MultiIndex{k}, MultiIndex{length}, MultiIndex{n})) *
                             orthogonal_poly_exact(MultiIndex{k2}, MultiIndex{length}, MultiIndex{n});
                }
                const __int128 expected = k == k2 ? static_cast<__int128>(binom(length + k, 2 * k + 1)) * binom(2 * k, k) : 0;
                CHECK(total == expected);
            }
        }
    }
    const MultiIndex window{6, 5};
    for_each_in_box(window, [&](const MultiIndex& k) {
        for_each_in_box(window, [&](const MultiIndex& k2) {
            __int128 total = 0;
            for_each_in_box(window, [&](const MultiIndex& n) {
                total += static_cast<__int128>(orthogonal_poly_exact(k, window, n)) * orthogonal_poly_exact(k2, window, n);
            });
            CHECK(total == (k == k2 ? static_cast<__int128>(orthogonal_norm(k, window)) : 0));
        });
    });
}

TEST_CASE("decomposition") {
    const DegreeSet degrees = total_degree(3);
    const MultiIndex window{9, 8};
    const DecompositionPair pair = decomposition(degrees, window);
    const Eigen::MatrixXd qqt = pair.samples * pair.samples.transpose();
    for (std::size_t i = 0; i < degrees.size(); ++i) {
        for (std::size_t j = 0; j < degrees.size(); ++j) {
            const double want = i == j ? static_cast<double>(orthogonal_norm(degrees[i], window)) : 0.0;
            CHECK(qqt(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) == want);
        }
    }
    // brute-force inner products, and triangularity in the total order
    const RealField shape(window);
    for (std::size_t i = 0; i < degrees.size(); ++i) {
        for (std::size_t j = 0; j < degrees.size(); ++j) {
            std::int64_t total = 0;
            for_each_in_box(window, [&](const MultiIndex& n) { total += multi_binom(n, degrees[j]) * orthogonal_poly_exact(degrees[i], window, n); });
            CHECK(pair.inner(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) == static_cast<double>(total));
            if (i > j) CHECK(total == 0);
        }
    }

    const DecompositionPair small = decomposition(chain(1), MultiIndex{4});
    CHECK(small.inner(0, 0) == 4.0);
    CHECK(small.inner(1, 1) == 10.0);  // sum n (2n - 3) over n < 4
}

TEST_CASE("Fisher decomposition residual") {
    for (std::int64_t top = 0; top <= 3; ++top) {
        for (const auto& window : {MultiIndex{4, 4}, MultiIndex{10, 7}, MultiIndex{16, 16}}) {
            const DegreeSet degrees = total_degree(top);
            const DecompositionPair pair = decomposition(degrees, window);
            const double snr = 1.7;
            const Eigen::MatrixXd rebuilt = kEightPiSq * snr * pair.inner.transpose() *
                                            spd_solve(pair.samples * pair.samples.transpose(), pair.inner);
            const Eigen::MatrixXd j = fisher_matrix(degrees, window, snr).matrix;
            CHECK((j - rebuilt).norm() / j.norm() < 1e-8);
        }
    }
}

TEST_CASE("Fisher matrix equals the Monte-Carlo score covariance") {
    const DegreeSet degrees = chain(1);
    const MultiIndex window{8};
    const double snr = 1.0;
    const CoefficientVector b{Basis::Binomial, degrees, {0.1, -0.2}};
    const Signal s = synthesize(b, window);
    Rng rng(2024);
    constexpr int draws = 100000;
    Eigen::MatrixXd scores(draws, 2);
    for (int t = 0; t < draws; ++t) {
        const Signal w = complex_noise(window, snr, rng);
        for (std::size_t m = 0; m < 2; ++m) {
            // d/db_m of -snr |y - s|^2 at the truth
            double g = 0.0;
            for (std::int64_t n = 0; n < 8; ++n) {
                const auto idx = static_cast<std::size_t>(n);
                const Complex ds = Complex(0.0, 2.0 * std::numbers::pi * static_cast<double>(binom(n, degrees[m][0]))) * s[idx];
                g += 2.0 * snr * std::real(std::conj(w[idx]) * ds);
            }
            scores(t, static_cast<Eigen::Index>(m)) = g;
        }
    }
    const Eigen::MatrixXd j = fisher_matrix(degrees, window, snr).matrix;
    for (Eigen::Index a = 0; a < 2; ++a) {
        for (Eigen::Index c = 0; c < 2; ++c) {
            const Eigen::ArrayXd prod = scores.col(a).array() * scores.col(c).array();
            const double mean = prod.mean();
            const double se = std::sqrt((prod - mean).square().sum() / (draws - 1) / draws);
            CHECK(std::abs(mean - j(a, c)) < 3.0 * se);
        }
    }
}

TEST_CASE("scalar measures") {
    CHECK(reconstruction_bound(2, std::pow(10.0, 1.5)) == doctest::Approx(0.0316227766).epsilon(1e-9));
    CHECK(reconstruction_bound(1, 1.0) == 0.5);
    CHECK(reconstruction_bound(chain(3), 2.0) == 1.0);

    CHECK(naive_penalty(3) == 400.0);
    CHECK(naive_penalty(0) == 1.0);
    CHECK(naive_penalty(1) == 4.0);

    const DegreeSet degrees = total_degree(2);
    const FisherMatrix j = fisher_matrix(degrees, MultiIndex{10, 10}, 3.0);
    const Eigen::MatrixXd inv = spd_inverse(j.matrix);
    CHECK(tr_kj(inv, j) == doctest::Approx(6.0).epsilon(1e-10));
    CHECK(tr_kj(2.0 * inv, j) == doctest::Approx(12.0).epsilon(1e-10));
    CHECK_THROWS_AS(tr_kj(Eigen::MatrixXd::Identity(3, 3), j), ValidationError);

    Rng rng(5);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::VectorXd p(6);
        for (auto& v : p) v = normal(rng) * 1e-3;
        const Eigen::MatrixXd k = inv + p * p.transpose();
        const double log_det = std::log((k * j.matrix).determinant());
        CHECK(tr_kj(k, j) >= 6.0 + log_det - 1e-9);
    }
}

TEST_CASE("outlier_predicate") {
    const RealField zeros(MultiIndex{10});
    CHECK_FALSE(outlier_predicate(zeros, 0.3));
    CHECK_FALSE(outlier_predicate(zeros, -0.5));
    CHECK(outlier_predicate(zeros, 0.5));
    RealField push(MultiIndex{4}, {0.0, 0.0, 0.02, 0.0});
    CHECK(outlier_predicate(push, 0.49));
    CHECK_FALSE(outlier_predicate(push, 0.4));
}

TEST_CASE("phase_wrapping_occurred") {
    const CoefficientVector b{Basis::Binomial, chain(1), {0.2, 0.3}};
    CHECK_FALSE(phase_wrapping_occurred(Signal(MultiIndex{64}), b));

    // wrap probability decays with SNR
    Rng rng(77);
    double previous = 1.1;
    for (double snr_db : {0.0, 5.0, 10.0}) {
        const double snr = std::pow(10.0, snr_db / 10.0);
        int wraps = 0;
        constexpr int trials = 3000;
        for (int t = 0; t < trials; ++t) wraps += phase_wrapping_occurred(complex_noise(MultiIndex{64}, snr, rng), b) ? 1 : 0;
        const double p = static_cast<double>(wraps) / trials;
        CHECK(p < previous);
        previous = p;
    }
}

}
