#include <doctest.h>

#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "ppe/errors.hpp"
#include "ppe/weights.hpp"

using namespace ppe;

namespace {

// Independent oracle: write the lagged difference as a matrix acting on the
// raw white-noise samples, form A A^T, and solve for C^{-1} 1 normalized.
Eigen::MatrixXd difference_operator(const MultiIndex& k, const MultiIndex& lag, const MultiIndex& window) {
    const MultiIndex out_window = window - lag.hadamard(k);
    const RealField probe(window);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(out_window.volume(), window.volume());
    std::size_t row = 0;
    for_each_in_box(out_window, [&](const MultiIndex& n) {
        for_each_in_box(k + 1, [&](const MultiIndex& l) {
            const double sign = ((k.total() - l.total()) % 2 == 0) ? 1.0 : -1.0;
            const auto col = probe.flat_index(n + lag.hadamard(l));
            a(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) += sign * static_cast<double>(multi_binom(k, l));
        });
        ++row;
    });
    return a;
}

Eigen::VectorXd oracle_weights(const MultiIndex& k, const MultiIndex& lag, const MultiIndex& window) {
    const Eigen::MatrixXd a = difference_operator(k, lag, window);
    const Eigen::MatrixXd c = a * a.transpose();
    const Eigen::VectorXd x = c.ldlt().solve(Eigen::VectorXd::Ones(c.rows()));
    return x / x.sum();
}

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

TEST_SUITE("weights") {

TEST_CASE("weight_1d examples") {
    const auto uniform = weight_1d(0, 1, 5);
    REQUIRE(uniform.size() == 5);
    for (double v : uniform) CHECK(v == doctest::Approx(0.2).epsilon(1e-15));

    const auto w = weight_1d(1, 1, 4);
    REQUIRE(w.size() == 3);
    CHECK(w[0] == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(w[1] == doctest::Approx(0.4).epsilon(1e-14));
    CHECK(w[2] == doctest::Approx(0.3).epsilon(1e-14));

    // two interleaved length-2 problems at k=1, each the flat (1/2,1/2) shape
    const auto lagged = weight_1d(1, 2, 6);
    REQUIRE(lagged.size() == 4);
    for (double v : lagged) CHECK(v == doctest::Approx(0.25).epsilon(1e-14));
    const auto oracle = oracle_weights(MultiIndex{1}, MultiIndex{2}, MultiIndex{6});
    for (std::size_t i = 0; i < 4; ++i) CHECK(lagged[i] == doctest::Approx(oracle(static_cast<Eigen::Index>(i))).epsilon(1e-12));

    CHECK_THROWS_AS(weight_1d(2, 1, 2), ValidationError);
    CHECK_THROWS_AS(weight_1d(1, 3, 3), ValidationError);
    CHECK_THROWS_AS(weight_1d(1, 0, 5), ValidationError);
}

TEST_CASE("weight_1d unit-lag closed form") {
    for (std::int64_t k = 0; k <= 4; ++k) {
        for (std::int64_t n_len = k + 1; n_len <= 40; ++n_len) {
            const auto w = weight_1d(k, 1, n_len);
            const double denom = static_cast<double>(binom(n_len + k, 2 * k + 1));
            for (std::int64_t n = 0; n < n_len - k; ++n) {
                const double expected = static_cast<double>(binom(n + k, k) * binom(n_len - n - 1, k)) / denom;
                CHECK(w[static_cast<std::size_t>(n)] == doctest::Approx(expected).epsilon(1e-13));
            }
        }
    }
}

TEST_CASE("weight_1d matches the covariance oracle") {
    double worst = 0.0;
    for (std::int64_t k = 0; k <= 3; ++k) {
        for (std::int64_t lag = 1; lag <= 3; ++lag) {
            for (std::int64_t n_len = lag * k + 1; n_len <= 24; ++n_len) {
                const auto w = weight_1d(k, lag, n_len);
                const auto oracle = oracle_weights(MultiIndex{k}, MultiIndex{lag}, MultiIndex{n_len});
                REQUIRE(w.size() == static_cast<std::size_t>(oracle.size()));
                for (std::size_t i = 0; i < w.size(); ++i) worst = std::max(worst, std::abs(w[i] - oracle(static_cast<Eigen::Index>(i))));
            }
        }
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("weight_1d invariants") {
    for (std::int64_t k = 0; k <= 5; ++k) {
        for (std::int64_t lag = 1; lag <= 4; ++lag) {
            for (std::int64_t n_len : {lag * k + 1, lag * k + 2, std::int64_t{37}, std::int64_t{100}, std::int64_t{1000}}) {
                if (n_len <= lag * k) continue;
                const auto w = weight_1d(k, lag, n_len);
                CHECK(sum(w) == doctest::Approx(1.0).epsilon(1e-12));
                for (std::size_t i = 0; i < w.size(); ++i) {
                    CHECK(w[i] >= 0.0);
                    CHECK(w[i] == doctest::Approx(w[w.size() - 1 - i]).epsilon(1e-12));
                }
            }
        }
    }
}

TEST_CASE("exact and log-space routes agree at the switchover") {
    for (std::int64_t k = 0; k <= 5; ++k) {
        for (std::int64_t lag = 1; lag <= 3; ++lag) {
            for (std::int64_t n_len = detail::kExactWeightLimit - 3; n_len <= detail::kExactWeightLimit + 3; ++n_len) {
                const auto exact = detail::weight_1d_exact(k, lag, n_len);
                const auto logs = detail::weight_1d_log(k, lag, n_len);
                REQUIRE(exact.size() == logs.size());
                for (std::size_t i = 0; i < exact.size(); ++i) CHECK(std::abs(exact[i] - logs[i]) < 1e-12);
            }
        }
    }
    // large windows stay finite and normalized
    const auto big = weight_1d(4, 1, 1 << 20);
    CHECK(sum(big) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::isfinite(big[big.size() / 2]));
}

TEST_CASE("weight_multi") {
    const WeightField uniform = weight_multi(MultiIndex{0, 0}, MultiIndex{1, 1}, MultiIndex{3, 4});
    for (double v : uniform.values()) CHECK(v == doctest::Approx(1.0 / 12.0).epsilon(1e-14));

    const WeightField w = weight_multi(MultiIndex{1, 0}, MultiIndex{1, 1}, MultiIndex{4, 2});
    REQUIRE(w.window() == MultiIndex{3, 2});
    const double rows[] = {0.3, 0.4, 0.3};
    for_each_in_box(w.window(), [&](const MultiIndex& n) { CHECK(w.at(n) == doctest::Approx(rows[n[0]] * 0.5).epsilon(1e-14)); });

    const WeightField any = weight_multi(MultiIndex{2, 1, 3}, MultiIndex{1, 2, 1}, MultiIndex{9, 7, 12});
    double total = 0.0;
    for (double v : any.values()) total += v;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_AS(weight_multi(MultiIndex{2, 1}, MultiIndex{1, 1}, MultiIndex{2, 5}), ValidationError);
}

TEST_CASE("covariance_matrix examples") {
    const NoiseCovariance c = covariance_matrix(MultiIndex{1}, MultiIndex{1}, MultiIndex{4});
    Eigen::Matrix3d expected;
    expected << 2, -1, 0, -1, 2, -1, 0, -1, 2;
    CHECK((c.matrix - expected).cwiseAbs().maxCoeff() == 0.0);

    const NoiseCovariance id = covariance_matrix(MultiIndex{0, 0}, MultiIndex{1, 1}, MultiIndex{3, 2});
    CHECK((id.matrix - Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff() == 0.0);

    // k=2, lag=3, N=16: 6 on the diagonal, -4 and 1 at distances 3 and 6, zero elsewhere
    const NoiseCovariance lagged = covariance_matrix(MultiIndex{2}, MultiIndex{3}, MultiIndex{16});
    REQUIRE(lagged.matrix.rows() == 10);
    for (Eigen::Index i = 0; i < 10; ++i) {
        for (Eigen::Index j = 0; j < 10; ++j) {
            const auto gap = std::abs(i - j);
            const double want = gap == 0 ? 6.0 : gap == 3 ? -4.0 : gap == 6 ? 1.0 : 0.0;
            CHECK(lagged.matrix(i, j) == want);
        }
    }
}

TEST_CASE("covariance_matrix equals the difference-operator Gram matrix") {
    for (const auto& [k, lag, window] : {std::tuple{MultiIndex{3}, MultiIndex{2}, MultiIndex{15}},
                                         std::tuple{MultiIndex{1, 2}, MultiIndex{1, 1}, MultiIndex{5, 6}},
                                         std::tuple{MultiIndex{2, 1}, MultiIndex{2, 3}, MultiIndex{7, 8}}}) {
        const Eigen::MatrixXd a = difference_operator(k, lag, window);
        const NoiseCovariance c = covariance_matrix(k, lag, window);
        CHECK(c.window == window - lag.hadamard(k));
        CHECK((c.matrix - a * a.transpose()).cwiseAbs().maxCoeff() == 0.0);
        CHECK(c.matrix.isApprox(c.matrix.transpose()));
        CHECK(c.matrix.llt().info() == Eigen::Success);
    }
}

TEST_CASE("covariance block structure") {
    const MultiIndex k{2, 1}, lag{3, 2}, window{11, 9};
    const NoiseCovariance c = covariance_matrix(k, lag, window);
    const RealField shape(c.window);
    for_each_in_box(c.window, [&](const MultiIndex& n) {
        for_each_in_box(c.window, [&](const MultiIndex& m) {
            bool congruent = true;
            for (std::size_t d = 0; d < 2; ++d) congruent = congruent && (n[d] - m[d]) % lag[d] == 0;
            if (!congruent) {
                CHECK(c.matrix(static_cast<Eigen::Index>(shape.flat_index(n)), static_cast<Eigen::Index>(shape.flat_index(m))) == 0.0);
            }
        });
    });
}

TEST_CASE("weight_via_inversion matches the closed form") {
    double worst = 0.0;
    for (std::int64_t k = 0; k <= 3; ++k) {
        for (std::int64_t lag = 1; lag <= 3; ++lag) {
            for (std::int64_t n_len = lag * k + 1; n_len <= 24; ++n_len) {
                const WeightField inv = weight_via_inversion(MultiIndex{k}, MultiIndex{lag}, MultiIndex{n_len});
                const WeightField closed = weight_multi(MultiIndex{k}, MultiIndex{lag}, MultiIndex{n_len});
                for (std::size_t i = 0; i < inv.size(); ++i) worst = std::max(worst, std::abs(inv[i] - closed[i]));
            }
        }
    }
    for (std::int64_t k0 = 0; k0 <= 2; ++k0) {
        for (std::int64_t k1 = 0; k1 <= 2; ++k1) {
            for (std::int64_t n0 = k0 + 1; n0 <= 8; ++n0) {
                for (std::int64_t n1 = k1 + 1; n1 <= 8; ++n1) {
                    const MultiIndex k{k0, k1}, lag{1, 1}, window{n0, n1};
                    const WeightField inv = weight_via_inversion(k, lag, window);
                    const WeightField closed = weight_multi(k, lag, window);
                    for (std::size_t i = 0; i < inv.size(); ++i) worst = std::max(worst, std::abs(inv[i] - closed[i]));
                }
            }
        }
    }
    CHECK(worst < 1e-10);

    const WeightField flat = weight_via_inversion(MultiIndex{0}, MultiIndex{1}, MultiIndex{7});
    for (double v : flat.values()) CHECK(v == doctest::Approx(1.0 / 7.0).epsilon(1e-14));
    CHECK_THROWS_AS(weight_via_inversion(MultiIndex{0, 0}, MultiIndex{1, 1}, MultiIndex{65, 64}), ValidationError);
}

}
