#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ppe/core_index.hpp"
#include "ppe/errors.hpp"

namespace ppe {

// Values over the rectangular window [N], stored row-major (last axis fastest).
template <class T>
class Field {
public:
    using value_type = T;

    Field() = default;

    explicit Field(MultiIndex window) : window_(std::move(window)) {
        check_window();
        data_.assign(static_cast<std::size_t>(window_.volume()), T{});
    }

    Field(MultiIndex window, std::vector<T> data) : window_(std::move(window)), data_(std::move(data)) {
        check_window();
        if (data_.size() != static_cast<std::size_t>(window_.volume())) {
            throw ValidationError("field: data length " + std::to_string(data_.size()) +
                                  " does not match window " + window_.to_string());
        }
    }

    const MultiIndex& window() const { return window_; }
    std::size_t dim() const { return window_.dim(); }
    std::size_t size() const { return data_.size(); }

    T& operator[](std::size_t flat) { return data_[flat]; }
    const T& operator[](std::size_t flat) const { return data_[flat]; }
    T& at(const MultiIndex& n) { return data_[flat_index(n)]; }
    const T& at(const MultiIndex& n) const { return data_[flat_index(n)]; }

    std::span<T> values() { return data_; }
    std::span<const T> values() const { return data_; }
    std::vector<T>& storage() { return data_; }
    const std::vector<T>& storage() const { return data_; }

    // Distance in the flat array between neighbours along axis d.
    std::size_t stride(std::size_t d) const {
        std::size_t s = 1;
        for (std::size_t i = d + 1; i < dim(); ++i) s *= static_cast<std::size_t>(window_[i]);
        return s;
    }

    std::size_t flat_index(const MultiIndex& n) const {
        if (n.dim() != dim()) throw ValidationError("field: index dimension mismatch");
        std::size_t flat = 0;
        for (std::size_t d = 0; d < dim(); ++d) {
            if (n[d] < 0 || n[d] >= window_[d]) throw ValidationError("field: index " + n.to_string() + " outside window");
            flat = flat * static_cast<std::size_t>(window_[d]) + static_cast<std::size_t>(n[d]);
        }
        return flat;
    }

    MultiIndex unflatten(std::size_t flat) const {
        MultiIndex n = MultiIndex::zeros(dim());
        for (std::size_t d = dim(); d > 0; --d) {
            const auto extent = static_cast<std::size_t>(window_[d - 1]);
            n[d - 1] = static_cast<std::int64_t>(flat % extent);
            flat /= extent;
        }
        return n;
    }

    friend bool operator==(const Field&, const Field&) = default;

private:
    void check_window() const {
        if (window_.dim() == 0) throw ValidationError("field: window must have at least one dimension");
        for (std::size_t d = 0; d < window_.dim(); ++d) {
            if (window_[d] < 1) throw ValidationError("field: window entries must be >= 1, got " + window_.to_string());
        }
    }

    MultiIndex window_;
    std::vector<T> data_;
};

using Complex = std::complex<double>;
using Signal = Field<Complex>;
using RealField = Field<double>;

}  // namespace ppe
