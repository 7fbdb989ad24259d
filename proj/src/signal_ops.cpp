#include "ppe/signal_ops.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

#include "ppe/errors.hpp"
#include "ppe/phase.hpp"

namespace ppe {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// out(n) = combine(in(n + lag e_axis), in(n)) over the window shrunk along axis.
template <class T, class Combine>
Field<T> shift_combine(const Field<T>& in, std::size_t axis, std::int64_t lag, Combine combine) {
    if (axis >= in.dim()) throw ValidationError("axis " + std::to_string(axis) + " out of range");
    if (lag < 1) throw ValidationError("lag must be positive");
    const MultiIndex& window = in.window();
    if (window[axis] <= lag) {
        throw ValidationError("window " + window.to_string() + " too small for lag " + std::to_string(lag) +
                              " along axis " + std::to_string(axis));
    }
    MultiIndex out_window = window;
    out_window[axis] -= lag;
    Field<T> out(out_window);

    const std::size_t inner = in.stride(axis);
    std::size_t outer = 1;
    for (std::size_t d = 0; d < axis; ++d) outer *= static_cast<std::size_t>(window[d]);
    const auto in_len = static_cast<std::size_t>(window[axis]);
    const auto out_len = static_cast<std::size_t>(out_window[axis]);
    const std::size_t offset = static_cast<std::size_t>(lag) * inner;

    const T* src = in.values().data();
    T* dst = out.values().data();
    for (std::size_t o = 0; o < outer; ++o) {
        const T* block = src + o * in_len * inner;
        T* out_block = dst + o * out_len * inner;
        const std::size_t count = out_len * inner;
        for (std::size_t i = 0; i < count; ++i) out_block[i] = combine(block[i + offset], block[i]);
    }
    return out;
}

void write_u32(std::ostream& out, std::uint32_t v) {
    std::array<unsigned char, 4> bytes{};
    for (int i = 0; i < 4; ++i) bytes[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
    out.write(reinterpret_cast<const char*>(bytes.data()), 4);
}

std::uint32_t read_u32(std::istream& in) {
    std::array<unsigned char, 4> bytes{};
    if (!in.read(reinterpret_cast<char*>(bytes.data()), 4)) throw ValidationError("signal file: truncated header");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[i]) << (8 * i);
    return v;
}

void write_f64(std::ostream& out, double v) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    std::array<unsigned char, 8> bytes{};
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xFF);
    out.write(reinterpret_cast<const char*>(bytes.data()), 8);
}

double read_f64(std::istream& in) {
    std::array<unsigned char, 8> bytes{};
    if (!in.read(reinterpret_cast<char*>(bytes.data()), 8)) throw ValidationError("signal file: truncated sample data");
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    return std::bit_cast<double>(bits);
}

constexpr std::array<char, 4> kMagic{'P', 'P', 'S', 'G'};

}  // namespace

Signal synthesize(const CoefficientVector& coeffs, const MultiIndex& window) {
    coeffs.check();
    if (!validate_degree_set(coeffs.degrees, window).window_ok) {
        throw ValidationError("synthesize: window " + window.to_string() + " too small for the degree set");
    }
    const RealField phase = phase_field(coeffs, window);
    Signal s(window);
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::polar(1.0, kTwoPi * phase[i]);
    return s;
}

Signal complex_noise(const MultiIndex& window, double snr, Rng& rng) {
    if (!(snr > 0.0)) throw ValidationError("snr must be positive");
    Signal w(window);
    const double scale = std::sqrt(1.0 / (2.0 * snr));
    std::normal_distribution<double> normal(0.0, 1.0);
    for (auto& v : w.values()) {
        const double re = normal(rng);
        const double im = normal(rng);
        v = Complex(scale * re, scale * im);
    }
    return w;
}

Signal add_noise(const Signal& s, double snr, Rng& rng) {
    const Signal w = complex_noise(s.window(), snr, rng);
    Signal out = s;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += w[i];
    return out;
}

Signal phase_diff(const Signal& s, std::size_t axis, std::int64_t lag) {
    return shift_combine(s, axis, lag, [](Complex ahead, Complex here) { return ahead * std::conj(here); });
}

Signal phase_diff_multi(const Signal& s, const MultiIndex& k, const MultiIndex& lag) {
    if (k.dim() != s.dim() || lag.dim() != s.dim()) throw ValidationError("phase_diff_multi: dimension mismatch");
    if (!k.all_nonnegative()) throw ValidationError("phase_diff_multi: negative order " + k.to_string());
    for (std::size_t d = 0; d < s.dim(); ++d) {
        if (k[d] > 0 && s.window()[d] < lag[d] * k[d] + 1) {
            throw ValidationError("phase_diff_multi: window " + s.window().to_string() + " too small for order " +
                                  k.to_string() + " at lag " + lag.to_string());
        }
    }
    Signal out = s;
    for (std::size_t d = 0; d < s.dim(); ++d) {
        for (std::int64_t i = 0; i < k[d]; ++i) out = phase_diff(out, d, lag[d]);
    }
    return out;
}

Signal phase_diff_multi(const Signal& s, const MultiIndex& k) {
    return phase_diff_multi(s, k, MultiIndex::ones(s.dim()));
}

Complex project_unit_circle(Complex v) {
    const double r = std::abs(v);
    return r == 0.0 ? Complex(0.0, 0.0) : v / r;
}

Signal project_unit_circle(const Signal& s) {
    Signal out = s;
    for (auto& v : out.values()) v = project_unit_circle(v);
    return out;
}

RealField finite_difference(const RealField& x, const MultiIndex& k) {
    if (k.dim() != x.dim() || !k.all_nonnegative()) throw ValidationError("finite_difference: invalid order " + k.to_string());
    if (!partial_leq(k + 1, x.window())) {
        throw ValidationError("finite_difference: window " + x.window().to_string() + " too small for order " + k.to_string());
    }
    RealField out = x;
    for (std::size_t d = 0; d < x.dim(); ++d) {
        for (std::int64_t i = 0; i < k[d]; ++i) {
            out = shift_combine(out, d, 1, [](double ahead, double here) { return ahead - here; });
        }
    }
    return out;
}

double arg(Complex v) {
    if (v == Complex(0.0, 0.0)) return 0.0;
    const double a = std::atan2(v.imag(), v.real());
    return a >= std::numbers::pi ? -std::numbers::pi : a;
}

RealField arg_field(const Signal& s) {
    RealField out(s.window());
    for (std::size_t i = 0; i < s.size(); ++i) out[i] = arg(s[i]);
    return out;
}

Signal multiply(const Signal& a, const Signal& b) {
    if (a.window() != b.window()) throw ValidationError("multiply: window mismatch");
    Signal out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b[i];
    return out;
}

Signal conjugate(const Signal& s) {
    Signal out = s;
    for (auto& v : out.values()) v = std::conj(v);
    return out;
}

void write_signal(std::ostream& out, const Signal& s) {
    out.write(kMagic.data(), kMagic.size());
    write_u32(out, static_cast<std::uint32_t>(s.dim()));
    for (std::size_t d = 0; d < s.dim(); ++d) write_u32(out, static_cast<std::uint32_t>(s.window()[d]));
    for (const auto& v : s.values()) {
        write_f64(out, v.real());
        write_f64(out, v.imag());
    }
    if (!out) throw std::runtime_error("signal file: write failed");
}

Signal read_signal(std::istream& in) {
    std::array<char, 4> magic{};
    if (!in.read(magic.data(), magic.size()) || magic != kMagic) throw ValidationError("signal file: bad magic (expected PPSG)");
    const std::uint32_t dim = read_u32(in);
    if (dim == 0 || dim > 16) throw ValidationError("signal file: unsupported dimension " + std::to_string(dim));
    MultiIndex window = MultiIndex::zeros(dim);
    for (std::uint32_t d = 0; d < dim; ++d) window[d] = read_u32(in);
    Signal s(window);
    for (auto& v : s.values()) {
        const double re = read_f64(in);
        const double im = read_f64(in);
        v = Complex(re, im);
    }
    if (in.peek() != std::char_traits<char>::eof()) throw ValidationError("signal file: trailing bytes after sample data");
    return s;
}

void write_signal_file(const std::filesystem::path& path, const Signal& s) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    write_signal(out, s);
}

Signal read_signal_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open signal file " + path.string());
    return read_signal(in);
}

void write_signal_csv(std::ostream& out, const Signal& s) {
    for (std::size_t d = 0; d < s.dim(); ++d) out << 'n' << d << ',';
    out << "re,im\n";
    char buf[64];
    std::size_t flat = 0;
    for_each_in_box(s.window(), [&](const MultiIndex& n) {
        for (std::size_t d = 0; d < n.dim(); ++d) out << n[d] << ',';
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", s[flat].real(), s[flat].imag());
        out << buf;
        ++flat;
    });
}

Signal read_signal_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("signal csv: empty input");
    const auto columns = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',') + 1);
    if (columns < 3) throw ValidationError("signal csv: expected n_0..n_{D-1},re,im columns");
    const std::size_t dim = columns - 2;

    std::map<MultiIndex, Complex> samples;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(row, cell, ',')) cells.push_back(cell);
        if (cells.size() != columns) throw ValidationError("signal csv: wrong column count on line " + std::to_string(line_no));
        try {
            MultiIndex n = MultiIndex::zeros(dim);
            for (std::size_t d = 0; d < dim; ++d) n[d] = std::stoll(cells[d]);
            samples[n] = Complex(std::stod(cells[dim]), std::stod(cells[dim + 1]));
        } catch (const std::logic_error&) {
            throw ValidationError("signal csv: unparsable value on line " + std::to_string(line_no));
        }
    }
    if (samples.empty()) throw ValidationError("signal csv: no samples");
    MultiIndex window = MultiIndex::zeros(dim);
    for (const auto& [n, v] : samples) {
        for (std::size_t d = 0; d < dim; ++d) {
            if (n[d] < 0) throw ValidationError("signal csv: negative index " + n.to_string());
            window[d] = std::max(window[d], n[d] + 1);
        }
    }
    Signal s(window);
    if (samples.size() != s.size()) throw ValidationError("signal csv: samples do not cover the full window " + window.to_string());
    for (const auto& [n, v] : samples) s.at(n) = v;
    return s;
}

Signal load_signal(const std::filesystem::path& path) {
    if (path.extension() == ".csv") {
        std::ifstream in(path);
        if (!in) throw ValidationError("cannot open signal file " + path.string());
        return read_signal_csv(in);
    }
    return read_signal_file(path);
}

}  // namespace ppe
