#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <random>

#include "ppe/basis.hpp"
#include "ppe/field.hpp"

namespace ppe {

using Rng = std::mt19937_64;

// exp(j 2 pi x(n)) over [N]; the phase is reduced mod 1 before exponentiation.
Signal synthesize(const CoefficientVector& coeffs, const MultiIndex& window);

// Circularly-symmetric complex Gaussian samples with total variance 1/snr.
Signal complex_noise(const MultiIndex& window, double snr, Rng& rng);
Signal add_noise(const Signal& s, double snr, Rng& rng);

// (E_d^lag s)(n) conj(s(n)) over the window shrunk by lag along axis d.
Signal phase_diff(const Signal& s, std::size_t axis, std::int64_t lag);
// Applies phase_diff k_d times with lag tau_d along every axis.
Signal phase_diff_multi(const Signal& s, const MultiIndex& k, const MultiIndex& lag);
Signal phase_diff_multi(const Signal& s, const MultiIndex& k);

// s/|s|, with 0 mapped to 0.
Complex project_unit_circle(Complex v);
Signal project_unit_circle(const Signal& s);

// k-th forward difference over the window N - k.
RealField finite_difference(const RealField& x, const MultiIndex& k);

// Argument in [-pi, pi); arg(0) = 0 and arg(-r) = -pi.
double arg(Complex v);
RealField arg_field(const Signal& s);

// Samplewise product and conjugate helpers.
Signal multiply(const Signal& a, const Signal& b);
Signal conjugate(const Signal& s);

// Binary "PPSG" container, little-endian.
void write_signal(std::ostream& out, const Signal& s);
Signal read_signal(std::istream& in);
void write_signal_file(const std::filesystem::path& path, const Signal& s);
Signal read_signal_file(const std::filesystem::path& path);

// CSV debug form: n_0..n_{D-1},re,im with a header row.
void write_signal_csv(std::ostream& out, const Signal& s);
Signal read_signal_csv(std::istream& in);

// Picks the CSV reader for a .csv extension, the binary reader otherwise.
Signal load_signal(const std::filesystem::path& path);

}  // namespace ppe
