#pragma once

// Pseudo-likelihood losses on a predicted pairwise network, with analytic
// gradients with respect to every stored cost entry.
//
// For variable i and observed assignment y, the message vector is
//   m_i(v) = unary_i(v) + sum_{j not in {i} u M_i} C[i,j](v, y_j)
// and P(v | context) = softmax(-m_i)(v). The NPLL sums -log P(y_i | context)
// over all variables with empty exclusion sets M_i; the masked variant draws a
// random exclusion set per variable.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "cfnlearn/cfn.hpp"
#include "cfnlearn/rng.hpp"
#include "cfnlearn/solver.hpp"

namespace cfnlearn {

/// Per-variable exclusion sets, each sorted ascending.
struct MaskPlan {
    std::vector<std::vector<int>> excluded;

    static MaskPlan none(int n) { return {std::vector<std::vector<int>>(static_cast<std::size_t>(n))}; }
    static MaskPlan all(int n) {
        MaskPlan p = none(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (j != i) p.excluded[static_cast<std::size_t>(i)].push_back(j);
        return p;
    }

    friend bool operator==(const MaskPlan&, const MaskPlan&) = default;
};

enum class MaskMode { Count, Percent };

/// Where a mask's randomness comes from: one plan per (seed, epoch, sample).
struct MaskSeed {
    std::uint64_t seed = 0;
    std::uint64_t epoch = 0;
    std::uint64_t sample = 0;
};

inline int mask_size(int n, int k, MaskMode mode) {
    if (mode == MaskMode::Count) {
        if (k < 0 || k > std::max(0, n - 1))
            throw StructuralError("mask size k=" + std::to_string(k) + " out of range for n=" + std::to_string(n));
        return k;
    }
    if (k < 0 || k > 100) throw StructuralError("mask percentage must be in [0, 100]");
    return static_cast<int>(std::lround(static_cast<double>(k) / 100.0 * std::max(0, n - 1)));
}

/// Samples |M_i| neighbours uniformly without replacement for every variable,
/// each variable from its own derived stream.
inline MaskPlan sample_mask(int n, int k, const MaskSeed& seed, MaskMode mode = MaskMode::Count) {
    const int size = mask_size(n, k, mode);
    MaskPlan plan = MaskPlan::none(n);
    if (size == 0) return plan;
    std::vector<int> pool;
    for (int i = 0; i < n; ++i) {
        Rng rng(derive_seed(seed.seed, "mask", seed.epoch, seed.sample, static_cast<std::uint64_t>(i)));
        pool.clear();
        for (int j = 0; j < n; ++j)
            if (j != i) pool.push_back(j);
        // partial Fisher-Yates: the first `size` slots are the sample
        for (int s = 0; s < size; ++s) {
            const auto r = s + static_cast<int>(rng.below(static_cast<std::uint64_t>(pool.size() - s)));
            std::swap(pool[static_cast<std::size_t>(s)], pool[static_cast<std::size_t>(r)]);
        }
        auto& out = plan.excluded[static_cast<std::size_t>(i)];
        out.assign(pool.begin(), pool.begin() + size);
        std::sort(out.begin(), out.end());
    }
    return plan;
}

/// m_i(v) for every value v of variable i.
inline std::vector<Cost> messages(const CostFunctionNetwork& net, const Assignment& y, int i,
                                  const std::vector<int>& excluded = {}) {
    const Cost top = net.top();
    const int d = net.domain_size(i);
    std::vector<Cost> m(static_cast<std::size_t>(d), 0.0);
    for (int v = 0; v < d; ++v) m[static_cast<std::size_t>(v)] = net.unary_cost(i, v);
    std::vector<char> skip(static_cast<std::size_t>(net.size()), 0);
    for (int j : excluded) skip[static_cast<std::size_t>(j)] = 1;
    for (int j = 0; j < net.size(); ++j) {
        if (j == i || skip[static_cast<std::size_t>(j)] || !net.has_pair(i, j)) continue;
        const int yj = y[static_cast<std::size_t>(j)];
        for (int v = 0; v < d; ++v)
            m[static_cast<std::size_t>(v)] = add_saturating(m[static_cast<std::size_t>(v)], net.pair_cost(i, j, v, yj), top);
    }
    return m;
}

namespace detail {

struct Softmax {
    std::vector<double> p;
    double log_z_shift = 0.0; ///< log sum_v exp(-(m_v - min m))
    Cost min_message = 0.0;
};

inline Softmax softmax_neg(const std::vector<Cost>& m, Cost top) {
    Softmax s;
    s.min_message = *std::min_element(m.begin(), m.end());
    s.p.resize(m.size());
    double z = 0.0;
    for (std::size_t v = 0; v < m.size(); ++v) {
        const double e = is_top(m[v], top) ? 0.0 : std::exp(-(m[v] - s.min_message));
        s.p[v] = e;
        z += e;
    }
    for (double& x : s.p) x /= z;
    s.log_z_shift = std::log(z);
    return s;
}

} // namespace detail

/// softmax(-m_i): conditional distribution of variable i given the
/// non-excluded observed neighbours.
inline std::vector<double> conditional_distribution(const CostFunctionNetwork& net, const Assignment& y, int i,
                                                    const std::vector<int>& excluded = {}) {
    return detail::softmax_neg(messages(net, y, i, excluded), net.top()).p;
}

struct LossReport {
    double value = 0.0;
    std::vector<CostMatrix> grad_pairs;       ///< aligned with net.pairs()
    std::vector<std::vector<double>> grad_unaries; ///< per variable; empty when the variable has no unary
};

namespace detail {

inline LossReport zero_report(const CostFunctionNetwork& net) {
    LossReport r;
    r.grad_pairs.assign(net.pairs().begin(), net.pairs().end());
    for (auto& g : r.grad_pairs) std::fill(g.values().begin(), g.values().end(), 0.0);
    r.grad_unaries.resize(static_cast<std::size_t>(net.size()));
    for (int i = 0; i < net.size(); ++i)
        if (const auto* u = net.unary(i)) r.grad_unaries[static_cast<std::size_t>(i)].assign(u->size(), 0.0);
    return r;
}

inline bool contains_sorted(const std::vector<int>& v, int x) { return std::binary_search(v.begin(), v.end(), x); }

} // namespace detail

/// Masked negative pseudo-loglikelihood. Variable i's term ignores the pairs
/// towards plan.excluded[i]; `skip_vars` (optional, per variable) drops whole
/// terms from the sum.
inline LossReport e_npll(const CostFunctionNetwork& net, const Assignment& y, const MaskPlan& plan,
                         const std::vector<char>* skip_vars = nullptr) {
    net.validate(y);
    if (static_cast<int>(plan.excluded.size()) != net.size()) throw StructuralError("mask plan size mismatch");
    LossReport r = detail::zero_report(net);
    const Cost top = net.top();
    for (int i = 0; i < net.size(); ++i) {
        if (skip_vars && (*skip_vars)[static_cast<std::size_t>(i)]) continue;
        const auto& excl = plan.excluded[static_cast<std::size_t>(i)];
        const auto m = messages(net, y, i, excl);
        const auto sm = detail::softmax_neg(m, top);
        const int yi = y[static_cast<std::size_t>(i)];
        r.value += (m[static_cast<std::size_t>(yi)] - sm.min_message) + sm.log_z_shift;

        // d/d m_i(v) of the term is 1(v = y_i) - P(v)
        const int d = net.domain_size(i);
        std::vector<double> dm(static_cast<std::size_t>(d));
        for (int v = 0; v < d; ++v) dm[static_cast<std::size_t>(v)] = (v == yi ? 1.0 : 0.0) - sm.p[static_cast<std::size_t>(v)];

        if (!r.grad_unaries[static_cast<std::size_t>(i)].empty())
            for (int v = 0; v < d; ++v) r.grad_unaries[static_cast<std::size_t>(i)][static_cast<std::size_t>(v)] += dm[static_cast<std::size_t>(v)];

        for (int j = 0; j < net.size(); ++j) {
            if (j == i || detail::contains_sorted(excl, j)) continue;
            const int s = net.pair_slot(i, j);
            if (s < 0) continue;
            auto& g = r.grad_pairs[static_cast<std::size_t>(s)];
            const int yj = y[static_cast<std::size_t>(j)];
            if (i < j) {
                for (int v = 0; v < d; ++v) g(v, yj) += dm[static_cast<std::size_t>(v)];
            } else {
                for (int v = 0; v < d; ++v) g(yj, v) += dm[static_cast<std::size_t>(v)];
            }
        }
    }
    return r;
}

inline LossReport npll(const CostFunctionNetwork& net, const Assignment& y,
                       const std::vector<char>* skip_vars = nullptr) {
    return e_npll(net, y, MaskPlan::none(net.size()), skip_vars);
}

/// Structured hinge with Hamming loss scaled by `margin`:
///   cost(y) - min_t [cost(t) - margin * Hamming(y, t)].
/// Gradient is +1 on the pair entries selected by y and -1 on those selected by
/// the loss-augmented minimizer.
inline LossReport hinge(const CostFunctionNetwork& net, const Assignment& y, Cost margin,
                        const SolverConfig& cfg = {}, Assignment* argmin_out = nullptr) {
    net.validate(y);
    const SolveResult sr = hinge_argmin(net, y, margin, cfg);
    if (!sr.proven_optimal) throw SearchAborted("loss-augmented problem hit the node limit");
    const Assignment& ym = sr.best;
    LossReport r = detail::zero_report(net);
    r.value = evaluate(net, y) - (evaluate(net, ym) - margin * hamming(y, ym));
    for (std::size_t s = 0; s < net.pairs().size(); ++s) {
        const auto& m = net.pairs()[s];
        auto& g = r.grad_pairs[s];
        g(y[static_cast<std::size_t>(m.i())], y[static_cast<std::size_t>(m.j())]) += 1.0;
        g(ym[static_cast<std::size_t>(m.i())], ym[static_cast<std::size_t>(m.j())]) -= 1.0;
    }
    for (int i = 0; i < net.size(); ++i) {
        auto& gu = r.grad_unaries[static_cast<std::size_t>(i)];
        if (gu.empty()) continue;
        gu[static_cast<std::size_t>(y[static_cast<std::size_t>(i)])] += 1.0;
        gu[static_cast<std::size_t>(ym[static_cast<std::size_t>(i)])] -= 1.0;
    }
    if (argmin_out) *argmin_out = ym;
    return r;
}

} // namespace cfnlearn
