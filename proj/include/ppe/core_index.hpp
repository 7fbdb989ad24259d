#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace ppe {

using Json = nlohmann::ordered_json;

// Signed integer tuple of fixed length D >= 1. Used for sample positions,
// degrees, windows and lags alike.
class MultiIndex {
public:
    MultiIndex() = default;
    MultiIndex(std::initializer_list<std::int64_t> entries);
    explicit MultiIndex(std::vector<std::int64_t> entries);

    static MultiIndex zeros(std::size_t dim);
    static MultiIndex ones(std::size_t dim);
    static MultiIndex filled(std::size_t dim, std::int64_t value);
    static MultiIndex unit(std::size_t dim, std::size_t axis);

    std::size_t dim() const { return entries_.size(); }
    std::int64_t operator[](std::size_t d) const { return entries_[d]; }
    std::int64_t& operator[](std::size_t d) { return entries_[d]; }
    const std::vector<std::int64_t>& entries() const { return entries_; }

    // |m| = sum of entries
    std::int64_t total() const;
    // number of points in the box [m], i.e. product of entries (all must be >= 0)
    std::int64_t volume() const;
    bool all_nonnegative() const;

    MultiIndex operator+(const MultiIndex& other) const;
    MultiIndex operator-(const MultiIndex& other) const;
    MultiIndex operator+(std::int64_t scalar) const;
    MultiIndex operator-(std::int64_t scalar) const;
    // Componentwise (Hadamard) product, written tau∘k in the literature.
    MultiIndex hadamard(const MultiIndex& other) const;

    friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
    // Lexicographic; only for use as an ordered-container key.
    friend std::strong_ordering operator<=>(const MultiIndex& a, const MultiIndex& b) {
        return a.entries_ <=> b.entries_;
    }

    std::string to_string() const;

private:
    std::vector<std::int64_t> entries_;
};

// Generalized binomial coefficient n(n-1)...(n-k+1)/k!, zero for k < 0.
// Throws OverflowError if the result does not fit in int64.
std::int64_t binom(std::int64_t n, std::int64_t k);

// Product of per-dimension binomials.
std::int64_t multi_binom(const MultiIndex& n, const MultiIndex& m);

// Componentwise a <= b.
bool partial_leq(const MultiIndex& a, const MultiIndex& b);

// Finite set of nonnegative degrees with an explicit total order compatible
// with partial_leq. Position in the order indexes coefficient vectors.
class DegreeSet {
public:
    DegreeSet() = default;

    // Keeps the given order; throws ValidationError if it is not compatible,
    // has duplicates, negative entries or mixed dimensions.
    static DegreeSet from_ordered(std::vector<MultiIndex> ordered);

    std::size_t size() const { return order_.size(); }
    bool empty() const { return order_.empty(); }
    std::size_t dim() const;
    const MultiIndex& operator[](std::size_t pos) const { return order_[pos]; }
    const std::vector<MultiIndex>& order() const { return order_; }
    auto begin() const { return order_.begin(); }
    auto end() const { return order_.end(); }

    std::optional<std::size_t> position(const MultiIndex& m) const;
    bool contains(const MultiIndex& m) const { return position(m).has_value(); }

    // Largest entry per dimension.
    MultiIndex max_degree() const;

    friend bool operator==(const DegreeSet& a, const DegreeSet& b) { return a.order_ == b.order_; }

private:
    std::vector<MultiIndex> order_;
    std::map<MultiIndex, std::size_t> lookup_;
};

// Repeatedly extract a minimal element; ties go to smallest |m|, then the
// lexicographically smallest tuple.
DegreeSet build_total_order(const std::vector<MultiIndex>& degrees);

// True iff no later element is componentwise below an earlier one.
bool is_compatible_order(const std::vector<MultiIndex>& order);

struct DegreeSetReport {
    bool window_ok = false;        // N >= m+1 for all m
    bool downward_closed = false;  // [m+1] subset of M for all m
};

DegreeSetReport validate_degree_set(const DegreeSet& degrees, const MultiIndex& window);

// Union of the boxes [m+1]. Returns the input unchanged when already closed.
DegreeSet downward_closure(const DegreeSet& degrees);

// Visit every point of the box [extent] in row-major order (last axis fastest).
template <class Fn>
void for_each_in_box(const MultiIndex& extent, Fn&& fn) {
    const std::size_t dim = extent.dim();
    for (std::size_t d = 0; d < dim; ++d) {
        if (extent[d] <= 0) return;
    }
    MultiIndex point = MultiIndex::zeros(dim);
    while (true) {
        fn(static_cast<const MultiIndex&>(point));
        std::size_t d = dim;
        while (d > 0) {
            --d;
            if (++point[d] < extent[d]) break;
            point[d] = 0;
            if (d == 0) return;
        }
    }
}

void to_json(Json& j, const MultiIndex& m);
void from_json(const Json& j, MultiIndex& m);
void to_json(Json& j, const DegreeSet& degrees);
// Preserves the array order (must be compatible).
void from_json(const Json& j, DegreeSet& degrees);

}  // namespace ppe
