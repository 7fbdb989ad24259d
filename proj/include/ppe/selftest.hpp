#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace ppe {

struct CheckGroup {
    std::string name;
    bool passed = true;
    std::size_t checks = 0;
    std::string detail;  // first failure, or a summary
};

// Integer orthogonality of the discrete orthogonal polynomials.
CheckGroup check_orthogonality();
// Coefficient recovery through the inversion formula.
CheckGroup check_inversion();
// Closed-form weights against the covariance-inversion reference,
// including the lagged block pattern for N=16, k=2, tau=3.
CheckGroup check_weight_oracle();

std::vector<CheckGroup> run_identity_suite();

}  // namespace ppe
