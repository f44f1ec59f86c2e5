#pragma once

// Exact depth-first branch and bound for pairwise cost function networks.
//
// Lower bound at a node: cost of the assigned part plus, for each unassigned
// variable, the minimum over its values of unary + costs towards assigned
// neighbours. Negative pairwise entries are handled by shifting each matrix
// by its (negative) minimum, which changes every assignment's cost by the same
// constant and keeps the bound admissible.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cfnlearn/cfn.hpp"

namespace cfnlearn {

enum class VariableOrder { StaticDegree, MinDomain };

struct SolverConfig {
    std::uint64_t node_limit = 100'000'000; ///< 0 = unlimited
    Cost enumeration_bound = 0.0;
    std::size_t max_solutions = 1000;
    VariableOrder variable_order = VariableOrder::StaticDegree;
};

struct SolveResult {
    Assignment best;
    Cost best_cost = 0.0;
    std::uint64_t nodes_expanded = 0;
    bool proven_optimal = false;

    friend bool operator==(const SolveResult&, const SolveResult&) = default;
};

struct EnumerationResult {
    std::vector<std::pair<Assignment, Cost>> solutions; ///< lexicographic order
    bool truncated = false;      ///< more than max_solutions exist
    bool complete = true;        ///< false when the node limit stopped the search
    std::uint64_t nodes_expanded = 0;
};

class SearchAborted : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

class BranchAndBound {
public:
    BranchAndBound(const CostFunctionNetwork& net, const SolverConfig& cfg)
        : net_(net), cfg_(cfg), n_(net.size()), d_(std::max(1, net.max_domain_size())), top_(net.top()) {
        build();
    }

    SolveResult minimize() {
        mode_ = Mode::Minimize;
        threshold_ = top_;
        best_.assign(static_cast<std::size_t>(n_), 0);
        found_ = false;
        run();
        SolveResult r;
        r.nodes_expanded = nodes_;
        r.proven_optimal = !aborted_;
        if (found_) {
            r.best = best_;
            r.best_cost = evaluate(net_, best_);
        } else {
            r.best.assign(static_cast<std::size_t>(n_), 0);
            r.best_cost = top_;
        }
        return r;
    }

    EnumerationResult enumerate() {
        if (cfg_.enumeration_bound >= top_) throw StructuralError("enumeration bound must be below TOP");
        if (cfg_.max_solutions < 1) throw StructuralError("max_solutions must be at least 1");
        mode_ = Mode::Enumerate;
        const Cost slack = 1e-9 * (1.0 + std::abs(cfg_.enumeration_bound) + std::abs(offset_));
        threshold_ = cfg_.enumeration_bound - offset_ + slack;
        run();
        EnumerationResult r;
        r.solutions = std::move(solutions_);
        std::sort(r.solutions.begin(), r.solutions.end());
        r.truncated = truncated_;
        r.complete = !aborted_ || truncated_;
        r.nodes_expanded = nodes_;
        return r;
    }

private:
    enum class Mode { Minimize, Enumerate };

    struct Edge {
        int other;
        const Cost* data; // shifted matrix
        int stride_self;  // multiplier for this variable's value
        int stride_other; // multiplier for the neighbour's value
    };

    void build() {
        shifted_.reserve(net_.pairs().size());
        adjacency_.assign(static_cast<std::size_t>(n_), {});
        offset_ = 0.0;
        for (const auto& m : net_.pairs()) {
            if (m.is_zero()) continue;
            Cost lo = 0.0;
            for (Cost c : m.values()) lo = std::min(lo, c);
            CostMatrix s = m;
            if (lo < 0.0) {
                for (Cost& c : s.values())
                    if (!is_top(c, top_)) c -= lo;
                offset_ += lo;
            }
            shifted_.push_back(std::move(s));
        }
        for (const auto& s : shifted_) {
            adjacency_[static_cast<std::size_t>(s.i())].push_back({s.j(), s.values().data(), s.cols(), 1});
            adjacency_[static_cast<std::size_t>(s.j())].push_back({s.i(), s.values().data(), 1, s.cols()});
        }
        static_order_.resize(static_cast<std::size_t>(n_));
        std::iota(static_order_.begin(), static_order_.end(), 0);
        std::stable_sort(static_order_.begin(), static_order_.end(), [&](int a, int b) {
            return adjacency_[static_cast<std::size_t>(a)].size() > adjacency_[static_cast<std::size_t>(b)].size();
        });
    }

    Cost& local(int depth, int var, int val) {
        return locals_[static_cast<std::size_t>(depth)]
                      [static_cast<std::size_t>(var) * static_cast<std::size_t>(d_) + static_cast<std::size_t>(val)];
    }

    void run() {
        nodes_ = 0;
        aborted_ = false;
        truncated_ = false;
        solutions_.clear();
        values_.assign(static_cast<std::size_t>(n_), -1);
        locals_.assign(static_cast<std::size_t>(n_) + 1,
                       std::vector<Cost>(static_cast<std::size_t>(n_) * static_cast<std::size_t>(d_), top_));
        for (int i = 0; i < n_; ++i)
            for (int a = 0; a < net_.domain_size(i); ++a) local(0, i, a) = net_.unary_cost(i, a);
        try {
            const Cost bound = lower_bound(0, 0.0);
            if (bound < threshold_ || (mode_ == Mode::Enumerate && bound <= threshold_)) search(0, 0.0, bound);
        } catch (const SearchAborted&) {
            aborted_ = true;
        }
    }

    Cost min_local(int depth, int var) {
        Cost lo = top_;
        for (int a = 0; a < net_.domain_size(var); ++a) lo = std::min(lo, local(depth, var, a));
        return lo;
    }

    Cost lower_bound(int depth, Cost acc) {
        Cost bound = acc;
        for (int i = 0; i < n_; ++i) {
            if (values_[static_cast<std::size_t>(i)] >= 0) continue;
            bound = add_saturating(bound, min_local(depth, i), top_);
        }
        return bound;
    }

    bool prunes(Cost bound) const {
        return mode_ == Mode::Minimize ? bound >= threshold_ : bound > threshold_;
    }

    int pick_variable(int depth, Cost bound) {
        if (cfg_.variable_order == VariableOrder::StaticDegree) {
            for (int v : static_order_)
                if (values_[static_cast<std::size_t>(v)] < 0) return v;
            return -1;
        }
        int best = -1;
        int best_size = 0;
        for (int v = 0; v < n_; ++v) {
            if (values_[static_cast<std::size_t>(v)] >= 0) continue;
            const Cost rest = bound - min_local(depth, v);
            int alive = 0;
            for (int a = 0; a < net_.domain_size(v); ++a)
                if (!prunes(add_saturating(rest, local(depth, v, a), top_))) ++alive;
            if (best < 0 || alive < best_size) {
                best = v;
                best_size = alive;
            }
        }
        return best;
    }

    void search(int depth, Cost acc, Cost bound) {
        if (depth == n_) {
            leaf(acc);
            return;
        }
        const int var = pick_variable(depth, bound);
        const int dom = net_.domain_size(var);
        const Cost rest = bound - min_local(depth, var);

        std::vector<int> order(static_cast<std::size_t>(dom));
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return local(depth, var, a) < local(depth, var, b); });

        for (int a : order) {
            const Cost here = local(depth, var, a);
            if (prunes(add_saturating(rest, here, top_))) continue;
            if (cfg_.node_limit != 0 && nodes_ >= cfg_.node_limit) throw SearchAborted("node limit");
            ++nodes_;

            values_[static_cast<std::size_t>(var)] = a;
            auto& next = locals_[static_cast<std::size_t>(depth) + 1];
            next = locals_[static_cast<std::size_t>(depth)];
            for (const Edge& e : adjacency_[static_cast<std::size_t>(var)]) {
                if (values_[static_cast<std::size_t>(e.other)] >= 0) continue;
                const int od = net_.domain_size(e.other);
                for (int b = 0; b < od; ++b) {
                    Cost& slot = local(depth + 1, e.other, b);
                    slot = add_saturating(slot, e.data[a * e.stride_self + b * e.stride_other], top_);
                }
            }
            const Cost acc2 = add_saturating(acc, here, top_);
            const Cost bound2 = lower_bound(depth + 1, acc2);
            if (!prunes(bound2)) search(depth + 1, acc2, bound2);
            values_[static_cast<std::size_t>(var)] = -1;
            if (truncated_) return;
        }
    }

    void leaf(Cost acc) {
        if (mode_ == Mode::Minimize) {
            if (acc < threshold_) {
                threshold_ = acc;
                best_ = values_;
                found_ = true;
            }
            return;
        }
        const Cost c = evaluate(net_, values_);
        if (c > cfg_.enumeration_bound) return;
        if (solutions_.size() >= cfg_.max_solutions) {
            truncated_ = true;
            return;
        }
        solutions_.emplace_back(values_, c);
    }

    const CostFunctionNetwork& net_;
    SolverConfig cfg_;
    int n_;
    int d_;
    Cost top_;
    Mode mode_ = Mode::Minimize;

    std::vector<CostMatrix> shifted_;
    std::vector<std::vector<Edge>> adjacency_;
    std::vector<int> static_order_;
    Cost offset_ = 0.0;

    std::vector<std::vector<Cost>> locals_;
    Assignment values_;
    Assignment best_;
    bool found_ = false;
    Cost threshold_ = 0.0;
    std::uint64_t nodes_ = 0;
    bool aborted_ = false;
    bool truncated_ = false;
    std::vector<std::pair<Assignment, Cost>> solutions_;
};

} // namespace detail

/// Proven minimum-cost assignment (best_cost == TOP means infeasible).
inline SolveResult solve(const CostFunctionNetwork& net, const SolverConfig& cfg = {}) {
    return detail::BranchAndBound(net, cfg).minimize();
}

/// All assignments with cost <= cfg.enumeration_bound, up to cfg.max_solutions.
inline EnumerationResult enumerate(const CostFunctionNetwork& net, const SolverConfig& cfg) {
    return detail::BranchAndBound(net, cfg).enumerate();
}

inline constexpr double kBruteForceLimit = 1e7;

/// Exhaustive scan in lexicographic order; keeps the first minimum.
inline SolveResult brute_force(const CostFunctionNetwork& net) {
    if (search_space_size(net) > kBruteForceLimit)
        throw StructuralError("search space too large for brute force");
    const int n = net.size();
    Assignment y(static_cast<std::size_t>(n), 0);
    SolveResult r{y, evaluate(net, y), 1, true};
    while (true) {
        int i = n - 1;
        while (i >= 0 && ++y[static_cast<std::size_t>(i)] == net.domain_size(i)) y[static_cast<std::size_t>(i--)] = 0;
        if (i < 0) break;
        ++r.nodes_expanded;
        const Cost c = evaluate(net, y);
        if (c < r.best_cost) {
            r.best_cost = c;
            r.best = y;
        }
    }
    return r;
}

/// Network plus -margin on every value that differs from y (loss-augmented
/// problem for the Hamming-loss hinge).
inline CostFunctionNetwork hamming_augmented(const CostFunctionNetwork& net, const Assignment& y, Cost margin) {
    if (margin < 0.0) throw StructuralError("margin must be non-negative");
    net.validate(y);
    CostFunctionNetwork aug = net;
    if (margin == 0.0) return aug;
    for (int i = 0; i < net.size(); ++i) {
        std::vector<Cost> u(static_cast<std::size_t>(net.domain_size(i)), -margin);
        u[static_cast<std::size_t>(y[static_cast<std::size_t>(i)])] = 0.0;
        aug.add_unary(i, u);
    }
    return aug;
}

/// Minimizer of cost(t) - margin * Hamming(y, t).
inline SolveResult hinge_argmin(const CostFunctionNetwork& net, const Assignment& y, Cost margin,
                                const SolverConfig& cfg = {}) {
    return solve(hamming_augmented(net, y, margin), cfg);
}

inline int hamming(const Assignment& a, const Assignment& b) {
    int h = 0;
    for (std::size_t i = 0; i < a.size(); ++i) h += a[i] != b[i];
    return h;
}

} // namespace cfnlearn
