#include "ppe/selftest.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "ppe/analysis.hpp"
#include "ppe/basis.hpp"
#include "ppe/errors.hpp"
#include "ppe/phase.hpp"
#include "ppe/weights.hpp"

namespace ppe {

namespace {

void fail(CheckGroup& group, const std::string& what) {
    if (group.passed) group.detail = what;
    group.passed = false;
}

// Exhaustive orthogonality over one window; returns the number of (k,k') pairs.
std::size_t orthogonality_on(const MultiIndex& window, CheckGroup& group) {
    std::vector<MultiIndex> degrees;
    for_each_in_box(window, [&](const MultiIndex& k) { degrees.push_back(k); });
    std::vector<std::vector<std::int64_t>> samples;
    for (const auto& k : degrees) {
        std::vector<std::int64_t> q;
        for_each_in_box(window, [&](const MultiIndex& n) { q.push_back(orthogonal_poly_exact(k, window, n)); });
        samples.push_back(std::move(q));
    }
    for (std::size_t a = 0; a < degrees.size(); ++a) {
        for (std::size_t b = 0; b < degrees.size(); ++b) {
            __int128 dot = 0;
            for (std::size_t i = 0; i < samples[a].size(); ++i) dot += static_cast<__int128>(samples[a][i]) * samples[b][i];
            const __int128 expected = (a == b) ? orthogonal_norm(degrees[a], window) : 0;
            if (dot != expected) {
                fail(group, "N=" + window.to_string() + " k=" + degrees[a].to_string() + " k'=" + degrees[b].to_string());
            }
        }
    }
    return degrees.size() * degrees.size();
}

}  // namespace

CheckGroup check_orthogonality() {
    CheckGroup group{"orthogonality", true, 0, ""};
    for (std::int64_t n = 1; n <= 12; ++n) group.checks += orthogonality_on(MultiIndex{n}, group);
    for (std::int64_t n0 = 1; n0 <= 6; ++n0) {
        for (std::int64_t n1 = 1; n1 <= 6; ++n1) group.checks += orthogonality_on(MultiIndex{n0, n1}, group);
    }
    if (group.passed) group.detail = std::to_string(group.checks) + " inner products exact";
    return group;
}

CheckGroup check_inversion() {
    CheckGroup group{"inversion", true, 0, ""};
    std::mt19937_64 rng(20240607);
    std::uniform_real_distribution<double> cell(-0.5, 0.5);
    double worst = 0.0;

    auto run = [&](const DegreeSet& degrees, const MultiIndex& window) {
        CoefficientVector b = CoefficientVector::zeros(Basis::Binomial, degrees);
        for (auto& v : b.values) v = cell(rng);
        RealField x(window);
        std::size_t flat = 0;
        for_each_in_box(window, [&](const MultiIndex& n) { x[flat++] = eval_binomial(b, n); });
        for (std::size_t i = 0; i < degrees.size(); ++i) {
            const double err = std::abs(binomial_transform(x, degrees[i], degrees) - b.values[i]);
            worst = std::max(worst, err);
            ++group.checks;
            if (err > 1e-10) fail(group, "degree " + degrees[i].to_string() + " over N=" + window.to_string());
        }
    };

    for (std::int64_t top = 0; top <= 5; ++top) {
        std::vector<MultiIndex> ms;
        for (std::int64_t m = 0; m <= top; ++m) ms.push_back(MultiIndex{m});
        const DegreeSet degrees = build_total_order(ms);
        for (std::int64_t n = top + 1; n <= 16; ++n) {
            for (int rep = 0; rep < 4; ++rep) run(degrees, MultiIndex{n});
        }
    }
    // sparse 1-D sets need only N >= m+1, not downward closure
    run(build_total_order({MultiIndex{3}}), MultiIndex{4});
    run(build_total_order({MultiIndex{1}, MultiIndex{4}}), MultiIndex{9});
    for (std::int64_t total = 0; total <= 3; ++total) {
        std::vector<MultiIndex> ms;
        for_each_in_box(MultiIndex{total + 1, total + 1}, [&](const MultiIndex& m) {
            if (m.total() <= total) ms.push_back(m);
        });
        const DegreeSet degrees = build_total_order(ms);
        for (std::int64_t n0 = total + 1; n0 <= 6; ++n0) {
            for (std::int64_t n1 = total + 1; n1 <= 6; ++n1) run(degrees, MultiIndex{n0, n1});
        }
    }
    if (group.passed) {
        std::ostringstream os;
        os << group.checks << " coefficients, max error " << worst;
        group.detail = os.str();
    }
    return group;
}

CheckGroup check_weight_oracle() {
    CheckGroup group{"weight oracle", true, 0, ""};
    double worst = 0.0;
    auto compare = [&](const MultiIndex& k, const MultiIndex& lag, const MultiIndex& window) {
        const WeightField closed = weight_multi(k, lag, window);
        const WeightField oracle = weight_via_inversion(k, lag, window);
        double err = 0.0;
        for (std::size_t i = 0; i < closed.size(); ++i) err = std::max(err, std::abs(closed[i] - oracle[i]));
        worst = std::max(worst, err);
        ++group.checks;
        if (err > 1e-10 || closed.window() != oracle.window()) {
            fail(group, "k=" + k.to_string() + " tau=" + lag.to_string() + " N=" + window.to_string());
        }
    };
    for (std::int64_t k = 0; k <= 3; ++k) {
        for (std::int64_t lag = 1; lag <= 3; ++lag) {
            for (std::int64_t n = lag * k + 1; n <= 24; ++n) compare(MultiIndex{k}, MultiIndex{lag}, MultiIndex{n});
        }
    }
    for (std::int64_t k0 = 0; k0 <= 2; ++k0) {
        for (std::int64_t k1 = 0; k1 <= 2; ++k1) {
            for (std::int64_t n0 = k0 + 1; n0 <= 8; ++n0) {
                for (std::int64_t n1 = k1 + 1; n1 <= 8; ++n1) compare(MultiIndex{k0, k1}, MultiIndex{1, 1}, MultiIndex{n0, n1});
            }
        }
    }

    // Lagged covariance: second differences at lag 3 on 16 samples.
    const NoiseCovariance cov = covariance_matrix(MultiIndex{2}, MultiIndex{3}, MultiIndex{16});
    const double pattern[] = {6.0, -4.0, 1.0};
    bool block_ok = cov.matrix.rows() == 10 && cov.matrix.cols() == 10;
    for (Eigen::Index i = 0; block_ok && i < 10; ++i) {
        for (Eigen::Index j = 0; j < 10; ++j) {
            const Eigen::Index gap = std::abs(i - j);
            const double expected = (gap % 3 == 0 && gap / 3 <= 2) ? pattern[gap / 3] : 0.0;
            if (cov.matrix(i, j) != expected) block_ok = false;
        }
    }
    ++group.checks;
    if (!block_ok) fail(group, "lagged covariance for N=16, k=2, tau=3 does not show the 6/-4/1 block pattern");
    compare(MultiIndex{2}, MultiIndex{3}, MultiIndex{16});

    if (group.passed) {
        std::ostringstream os;
        os << group.checks << " configurations, max error " << worst;
        group.detail = os.str();
    }
    return group;
}

std::vector<CheckGroup> run_identity_suite() { return {check_orthogonality(), check_inversion(), check_weight_oracle()}; }

}  // namespace ppe
