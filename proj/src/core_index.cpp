#include "ppe/core_index.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "ppe/errors.hpp"

namespace ppe {

namespace {

void require_same_dim(const MultiIndex& a, const MultiIndex& b, const char* what) {
    if (a.dim() != b.dim()) {
        throw ValidationError(std::string(what) + ": dimension mismatch (" + std::to_string(a.dim()) +
                              " vs " + std::to_string(b.dim()) + ")");
    }
}

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
    std::int64_t out = 0;
    if (__builtin_mul_overflow(a, b, &out)) throw OverflowError("integer product exceeds int64");
    return out;
}

}  // namespace

MultiIndex::MultiIndex(std::initializer_list<std::int64_t> entries) : entries_(entries) {}

MultiIndex::MultiIndex(std::vector<std::int64_t> entries) : entries_(std::move(entries)) {}

MultiIndex MultiIndex::zeros(std::size_t dim) { return filled(dim, 0); }
MultiIndex MultiIndex::ones(std::size_t dim) { return filled(dim, 1); }

MultiIndex MultiIndex::filled(std::size_t dim, std::int64_t value) {
    return MultiIndex(std::vector<std::int64_t>(dim, value));
}

MultiIndex MultiIndex::unit(std::size_t dim, std::size_t axis) {
    MultiIndex e = zeros(dim);
    e[axis] = 1;
    return e;
}

std::int64_t MultiIndex::total() const {
    return std::accumulate(entries_.begin(), entries_.end(), std::int64_t{0});
}

std::int64_t MultiIndex::volume() const {
    std::int64_t v = 1;
    for (auto e : entries_) v = checked_mul(v, std::max<std::int64_t>(e, 0));
    return v;
}

bool MultiIndex::all_nonnegative() const {
    return std::all_of(entries_.begin(), entries_.end(), [](std::int64_t e) { return e >= 0; });
}

MultiIndex MultiIndex::operator+(const MultiIndex& other) const {
    require_same_dim(*this, other, "MultiIndex +");
    MultiIndex out = *this;
    for (std::size_t d = 0; d < dim(); ++d) out[d] += other[d];
    return out;
}

MultiIndex MultiIndex::operator-(const MultiIndex& other) const {
    require_same_dim(*this, other, "MultiIndex -");
    MultiIndex out = *this;
    for (std::size_t d = 0; d < dim(); ++d) out[d] -= other[d];
    return out;
}

MultiIndex MultiIndex::operator+(std::int64_t scalar) const {
    MultiIndex out = *this;
    for (auto& e : out.entries_) e += scalar;
    return out;
}

MultiIndex MultiIndex::operator-(std::int64_t scalar) const { return *this + (-scalar); }

MultiIndex MultiIndex::hadamard(const MultiIndex& other) const {
    require_same_dim(*this, other, "MultiIndex hadamard");
    MultiIndex out = *this;
    for (std::size_t d = 0; d < dim(); ++d) out[d] *= other[d];
    return out;
}

std::string MultiIndex::to_string() const {
    std::ostringstream os;
    os << '(';
    for (std::size_t d = 0; d < dim(); ++d) os << (d ? "," : "") << entries_[d];
    os << ')';
    return os.str();
}

std::int64_t binom(std::int64_t n, std::int64_t k) {
    if (k < 0) return 0;
    if (n < 0) {
        // C(n,k) = (-1)^k C(k-n-1,k)
        const std::int64_t mag = binom(k - n - 1, k);
        return (k % 2 == 0) ? mag : -mag;
    }
    if (k > n) return 0;
    k = std::min(k, n - k);
    // r_i = C(n-k+i, i) is an integer at every step and increases with i.
    __int128 r = 1;
    for (std::int64_t i = 1; i <= k; ++i) {
        r = r * (n - k + i) / i;
        if (r > std::numeric_limits<std::int64_t>::max()) {
            throw OverflowError("binom(" + std::to_string(n) + "," + std::to_string(k) + ") exceeds int64");
        }
    }
    return static_cast<std::int64_t>(r);
}

std::int64_t multi_binom(const MultiIndex& n, const MultiIndex& m) {
    require_same_dim(n, m, "multi_binom");
    std::int64_t out = 1;
    for (std::size_t d = 0; d < n.dim(); ++d) {
        const std::int64_t c = binom(n[d], m[d]);
        if (c == 0) return 0;
        out = checked_mul(out, c);
    }
    return out;
}

bool partial_leq(const MultiIndex& a, const MultiIndex& b) {
    require_same_dim(a, b, "partial_leq");
    for (std::size_t d = 0; d < a.dim(); ++d) {
        if (a[d] > b[d]) return false;
    }
    return true;
}

bool is_compatible_order(const std::vector<MultiIndex>& order) {
    for (std::size_t i = 0; i < order.size(); ++i) {
        for (std::size_t j = i + 1; j < order.size(); ++j) {
            if (order[j] != order[i] && partial_leq(order[j], order[i])) return false;
        }
    }
    return true;
}

DegreeSet DegreeSet::from_ordered(std::vector<MultiIndex> ordered) {
    DegreeSet out;
    for (std::size_t i = 0; i < ordered.size(); ++i) {
        const auto& m = ordered[i];
        if (m.dim() == 0) throw ValidationError("degree set: empty multi-index");
        if (m.dim() != ordered.front().dim()) throw ValidationError("degree set: mixed dimensions");
        if (!m.all_nonnegative()) throw ValidationError("degree set: negative degree " + m.to_string());
        if (!out.lookup_.emplace(m, i).second) throw ValidationError("degree set: duplicate degree " + m.to_string());
    }
    if (!is_compatible_order(ordered)) {
        throw ValidationError("degree set: order is not compatible with the componentwise partial order");
    }
    out.order_ = std::move(ordered);
    return out;
}

std::size_t DegreeSet::dim() const { return order_.empty() ? 0 : order_.front().dim(); }

std::optional<std::size_t> DegreeSet::position(const MultiIndex& m) const {
    auto it = lookup_.find(m);
    if (it == lookup_.end()) return std::nullopt;
    return it->second;
}

MultiIndex DegreeSet::max_degree() const {
    MultiIndex out = MultiIndex::zeros(dim());
    for (const auto& m : order_) {
        for (std::size_t d = 0; d < m.dim(); ++d) out[d] = std::max(out[d], m[d]);
    }
    return out;
}

DegreeSet build_total_order(const std::vector<MultiIndex>& degrees) {
    // Sorting by (|m|, lex) is the same as greedy extraction with that tie-break:
    // anything strictly below m has smaller |m|, so the first remaining element
    // in this order is always minimal among those left.
    std::set<MultiIndex> unique(degrees.begin(), degrees.end());
    std::vector<MultiIndex> order(unique.begin(), unique.end());
    std::stable_sort(order.begin(), order.end(), [](const MultiIndex& a, const MultiIndex& b) {
        if (a.total() != b.total()) return a.total() < b.total();
        return a < b;
    });
    return DegreeSet::from_ordered(std::move(order));
}

DegreeSetReport validate_degree_set(const DegreeSet& degrees, const MultiIndex& window) {
    DegreeSetReport report{true, true};
    for (const auto& m : degrees) {
        if (m.dim() != window.dim() || !partial_leq(m + 1, window)) report.window_ok = false;
        // [m+1] subset of M follows by induction from the immediate predecessors.
        for (std::size_t d = 0; d < m.dim(); ++d) {
            if (m[d] > 0 && !degrees.contains(m - MultiIndex::unit(m.dim(), d))) report.downward_closed = false;
        }
    }
    return report;
}

DegreeSet downward_closure(const DegreeSet& degrees) {
    if (validate_degree_set(degrees, degrees.max_degree() + 1).downward_closed) return degrees;
    std::set<MultiIndex> closure;
    for (const auto& m : degrees) {
        for_each_in_box(m + 1, [&](const MultiIndex& l) { closure.insert(l); });
    }
    return build_total_order(std::vector<MultiIndex>(closure.begin(), closure.end()));
}

void to_json(Json& j, const MultiIndex& m) { j = m.entries(); }

void from_json(const Json& j, MultiIndex& m) {
    if (!j.is_array() || j.empty()) throw ValidationError("multi-index must be a non-empty integer array");
    std::vector<std::int64_t> entries;
    for (const auto& e : j) {
        if (!e.is_number_integer()) throw ValidationError("multi-index entries must be integers");
        entries.push_back(e.get<std::int64_t>());
    }
    m = MultiIndex(std::move(entries));
}

void to_json(Json& j, const DegreeSet& degrees) {
    j = Json::array();
    for (const auto& m : degrees) j.push_back(m);
}

void from_json(const Json& j, DegreeSet& degrees) {
    if (!j.is_array()) throw ValidationError("degree set must be an array of integer arrays");
    std::vector<MultiIndex> ordered;
    for (const auto& e : j) ordered.push_back(e.get<MultiIndex>());
    degrees = DegreeSet::from_ordered(std::move(ordered));
}

}  // namespace ppe
