#pragma once

// Pairwise cost function networks: unary and pairwise cost tensors over a set
// of finite-domain variables, plus the evaluation, conditioning and
// thresholding operations defined on them.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cfnlearn/cost.hpp"

namespace cfnlearn {

using Assignment = std::vector<int>;

/// Partial assignment as a list of (variable, value). Duplicates with the same
/// value are tolerated; conflicting duplicates are rejected by `condition`.
using Evidence = std::vector<std::pair<int, int>>;

struct VariableSpec {
    int index = 0;
    int domain_size = 1;
};

/// Dense |D^i| x |D^j| matrix for the canonical pair i < j. Row index is the
/// value of i.
class CostMatrix {
public:
    CostMatrix() = default;
    CostMatrix(int i, int j, int rows, int cols, Cost fill = 0.0)
        : i_(i), j_(j), rows_(rows), cols_(cols),
          data_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), fill) {}

    int i() const noexcept { return i_; }
    int j() const noexcept { return j_; }
    int rows() const noexcept { return rows_; }
    int cols() const noexcept { return cols_; }

    Cost operator()(int a, int b) const noexcept { return data_[index(a, b)]; }
    Cost& operator()(int a, int b) noexcept { return data_[index(a, b)]; }

    std::span<const Cost> values() const noexcept { return data_; }
    std::span<Cost> values() noexcept { return data_; }

    bool is_zero() const noexcept {
        return std::all_of(data_.begin(), data_.end(), [](Cost c) { return c == 0.0; });
    }

    friend bool operator==(const CostMatrix&, const CostMatrix&) = default;

private:
    std::size_t index(int a, int b) const noexcept {
        return static_cast<std::size_t>(a) * static_cast<std::size_t>(cols_) + static_cast<std::size_t>(b);
    }

    int i_ = 0, j_ = 0, rows_ = 0, cols_ = 0;
    std::vector<Cost> data_;
};

struct UnaryCosts {
    int i = 0;
    std::vector<Cost> costs;
};

class CostFunctionNetwork {
public:
    CostFunctionNetwork() = default;

    explicit CostFunctionNetwork(std::vector<int> domain_sizes, Cost top = kDefaultTop)
        : domains_(std::move(domain_sizes)), top_(top) {
        if (!(top_ > 0.0) || !std::isfinite(top_)) throw StructuralError("top must be a positive finite number");
        for (std::size_t i = 0; i < domains_.size(); ++i) {
            if (domains_[i] < 1) throw StructuralError("variable " + std::to_string(i) + " has an empty domain");
        }
        slots_.assign(domains_.size() * domains_.size(), -1);
        unaries_.resize(domains_.size());
    }

    static CostFunctionNetwork uniform(int n, int d, Cost top = kDefaultTop) {
        return CostFunctionNetwork(std::vector<int>(static_cast<std::size_t>(n), d), top);
    }

    int size() const noexcept { return static_cast<int>(domains_.size()); }
    int domain_size(int i) const { return domains_.at(static_cast<std::size_t>(i)); }
    const std::vector<int>& domain_sizes() const noexcept { return domains_; }
    int max_domain_size() const noexcept {
        return domains_.empty() ? 0 : *std::max_element(domains_.begin(), domains_.end());
    }
    Cost top() const noexcept { return top_; }

    std::vector<VariableSpec> variables() const {
        std::vector<VariableSpec> out;
        out.reserve(domains_.size());
        for (int i = 0; i < size(); ++i) out.push_back({i, domains_[static_cast<std::size_t>(i)]});
        return out;
    }

    /// Stored pairs, sorted by (i, j).
    std::span<const CostMatrix> pairs() const noexcept { return pairs_; }
    std::span<CostMatrix> pairs() noexcept { return pairs_; }

    /// Index into pairs() of the matrix for {i, j}, or -1 when absent.
    int pair_slot(int i, int j) const noexcept {
        return slots_[static_cast<std::size_t>(i) * domains_.size() + static_cast<std::size_t>(j)];
    }

    bool has_pair(int i, int j) const noexcept { return i != j && pair_slot(i, j) >= 0; }

    /// C[i,j](a,b) in either orientation; absent pairs read as zero.
    Cost pair_cost(int i, int j, int a, int b) const noexcept {
        const int s = pair_slot(i, j);
        if (s < 0) return 0.0;
        const auto& m = pairs_[static_cast<std::size_t>(s)];
        return i < j ? m(a, b) : m(b, a);
    }

    /// Creates (zero-filled) or returns the canonical matrix for {i, j}.
    CostMatrix& pair(int i, int j) {
        check_pair(i, j);
        if (i > j) std::swap(i, j);
        const int s = pair_slot(i, j);
        if (s >= 0) return pairs_[static_cast<std::size_t>(s)];
        return insert(CostMatrix(i, j, domain_size(i), domain_size(j)));
    }

    /// Stores a matrix, given in the orientation (i, j) as passed: rows index
    /// values of i. Replaces any existing matrix for the pair.
    void set_pair(int i, int j, const std::vector<std::vector<Cost>>& rows) {
        check_pair(i, j);
        const int di = domain_size(i), dj = domain_size(j);
        if (static_cast<int>(rows.size()) != di) throw StructuralError("pair matrix row count mismatch");
        CostMatrix& m = pair(i, j);
        for (int a = 0; a < di; ++a) {
            if (static_cast<int>(rows[static_cast<std::size_t>(a)].size()) != dj)
                throw StructuralError("pair matrix column count mismatch");
            for (int b = 0; b < dj; ++b) {
                const Cost c = checked(rows[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]);
                if (i < j) m(a, b) = c; else m(b, a) = c;
            }
        }
    }

    void set_pair(CostMatrix m) {
        check_pair(m.i(), m.j());
        if (m.i() > m.j()) throw StructuralError("stored pairs must satisfy i < j");
        if (m.rows() != domain_size(m.i()) || m.cols() != domain_size(m.j()))
            throw StructuralError("pair matrix shape mismatch");
        for (Cost& c : m.values()) c = checked(c);
        pair(m.i(), m.j()) = std::move(m);
    }

    const std::vector<Cost>* unary(int i) const {
        const auto& u = unaries_.at(static_cast<std::size_t>(i));
        return u ? &*u : nullptr;
    }

    Cost unary_cost(int i, int a) const noexcept {
        const auto& u = unaries_[static_cast<std::size_t>(i)];
        return u ? (*u)[static_cast<std::size_t>(a)] : 0.0;
    }

    std::vector<UnaryCosts> unaries() const {
        std::vector<UnaryCosts> out;
        for (int i = 0; i < size(); ++i)
            if (const auto* u = unary(i)) out.push_back({i, *u});
        return out;
    }

    /// Adds `costs` entrywise to variable i's unary, saturating at TOP.
    void add_unary(int i, std::span<const Cost> costs) {
        if (i < 0 || i >= size()) throw StructuralError("unary on unknown variable " + std::to_string(i));
        if (static_cast<int>(costs.size()) != domain_size(i)) throw StructuralError("unary length mismatch");
        auto& u = unaries_[static_cast<std::size_t>(i)];
        if (!u) u.emplace(costs.size(), 0.0);
        for (std::size_t a = 0; a < costs.size(); ++a) (*u)[a] = add_saturating((*u)[a], checked(costs[a]), top_);
    }

    void add_unary(int i, const std::vector<Cost>& costs) { add_unary(i, std::span<const Cost>(costs)); }

    void clear_unaries() { std::fill(unaries_.begin(), unaries_.end(), std::nullopt); }

    /// Throws StructuralError unless y has one in-domain value per variable.
    void validate(const Assignment& y) const {
        if (y.size() != domains_.size())
            throw StructuralError("assignment has " + std::to_string(y.size()) + " values for " +
                                  std::to_string(domains_.size()) + " variables");
        for (std::size_t i = 0; i < y.size(); ++i)
            if (y[i] < 0 || y[i] >= domains_[i])
                throw StructuralError("value " + std::to_string(y[i]) + " out of domain for variable " +
                                      std::to_string(i));
    }

    friend bool operator==(const CostFunctionNetwork&, const CostFunctionNetwork&) = default;

private:
    void check_pair(int i, int j) const {
        if (i == j || i < 0 || j < 0 || i >= size() || j >= size())
            throw StructuralError("invalid pair (" + std::to_string(i) + "," + std::to_string(j) + ")");
    }

    Cost checked(Cost c) const {
        if (std::isnan(c)) throw StructuralError("NaN cost");
        return c >= top_ ? top_ : c;
    }

    CostMatrix& insert(CostMatrix m) {
        const auto key = std::pair{m.i(), m.j()};
        auto pos = std::lower_bound(pairs_.begin(), pairs_.end(), key, [](const CostMatrix& x, const auto& k) {
            return std::pair{x.i(), x.j()} < k;
        });
        const bool append = pos == pairs_.end();
        pos = pairs_.insert(pos, std::move(m));
        if (append) {
            set_slot(pos->i(), pos->j(), static_cast<int>(pairs_.size() - 1));
        } else {
            for (std::size_t s = 0; s < pairs_.size(); ++s) set_slot(pairs_[s].i(), pairs_[s].j(), static_cast<int>(s));
        }
        return *pos;
    }

    void set_slot(int i, int j, int s) {
        const auto n = domains_.size();
        slots_[static_cast<std::size_t>(i) * n + static_cast<std::size_t>(j)] = s;
        slots_[static_cast<std::size_t>(j) * n + static_cast<std::size_t>(i)] = s;
    }

    std::vector<int> domains_;
    Cost top_ = kDefaultTop;
    std::vector<CostMatrix> pairs_;
    std::vector<int> slots_;
    std::vector<std::optional<std::vector<Cost>>> unaries_;
};

/// Joint cost of a full assignment: saturating sum of every selected unary and
/// pairwise entry.
inline Cost evaluate(const CostFunctionNetwork& net, const Assignment& y) {
    net.validate(y);
    const Cost top = net.top();
    Cost total = 0.0;
    for (int i = 0; i < net.size(); ++i) total = add_saturating(total, net.unary_cost(i, y[static_cast<std::size_t>(i)]), top);
    for (const auto& m : net.pairs())
        total = add_saturating(total, m(y[static_cast<std::size_t>(m.i())], y[static_cast<std::size_t>(m.j())]), top);
    return total;
}

/// Fixes evidenced variables through unary costs: 0 on the observed value,
/// TOP elsewhere.
inline CostFunctionNetwork condition(const CostFunctionNetwork& net, const Evidence& evidence) {
    std::vector<int> fixed(static_cast<std::size_t>(net.size()), -1);
    for (const auto& [var, val] : evidence) {
        if (var < 0 || var >= net.size()) throw StructuralError("evidence on unknown variable " + std::to_string(var));
        if (val < 0 || val >= net.domain_size(var))
            throw StructuralError("evidence value out of domain for variable " + std::to_string(var));
        auto& slot = fixed[static_cast<std::size_t>(var)];
        if (slot >= 0 && slot != val)
            throw StructuralError("contradictory evidence on variable " + std::to_string(var));
        slot = val;
    }
    CostFunctionNetwork out = net;
    for (int i = 0; i < net.size(); ++i) {
        const int v = fixed[static_cast<std::size_t>(i)];
        if (v < 0) continue;
        std::vector<Cost> u(static_cast<std::size_t>(net.domain_size(i)), net.top());
        u[static_cast<std::size_t>(v)] = 0.0;
        out.add_unary(i, u);
    }
    return out;
}

/// Boolean version of a network: costs >= tau become TOP, everything else 0.
inline CostFunctionNetwork threshold_to_boolean(const CostFunctionNetwork& net, Cost tau) {
    if (!(tau > 0.0)) throw StructuralError("threshold must be positive");
    const Cost top = net.top();
    auto cut = [&](Cost c) { return c >= tau ? top : 0.0; };
    CostFunctionNetwork out(net.domain_sizes(), top);
    for (const auto& u : net.unaries()) {
        std::vector<Cost> b(u.costs.size());
        std::transform(u.costs.begin(), u.costs.end(), b.begin(), cut);
        out.add_unary(u.i, b);
    }
    for (CostMatrix m : net.pairs()) {
        for (Cost& c : m.values()) c = cut(c);
        out.set_pair(std::move(m));
    }
    return out;
}

/// Sum of absolute pairwise costs. Unary costs are not included.
inline Cost l1_norm(const CostFunctionNetwork& net) {
    Cost total = 0.0;
    for (const auto& m : net.pairs())
        for (Cost c : m.values()) {
            if (is_top(c, net.top())) throw StructuralError("l1_norm is undefined on TOP entries");
            total += std::abs(c);
        }
    return total;
}

/// Subgradient of l1_norm: sign of each pairwise entry (0 at 0), aligned with
/// net.pairs().
inline std::vector<CostMatrix> l1_gradient(const CostFunctionNetwork& net) {
    std::vector<CostMatrix> g(net.pairs().begin(), net.pairs().end());
    for (auto& m : g)
        for (Cost& c : m.values()) c = static_cast<Cost>((c > 0.0) - (c < 0.0));
    return g;
}

/// Number of assignments of the network, saturating at `cap`.
inline double search_space_size(const CostFunctionNetwork& net, double cap = 1e300) {
    double s = 1.0;
    for (int d : net.domain_sizes()) {
        s *= d;
        if (s > cap) return cap;
    }
    return s;
}

} // namespace cfnlearn
