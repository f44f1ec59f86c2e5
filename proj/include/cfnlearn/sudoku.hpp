#pragma once

// Sudoku as a pairwise cost function network: rule networks, pair features,
// puzzle generation, CSV datasets and analysis of learned rules.
//
// Cells are numbered row-major; cell values are 0-based digits (digit - 1).

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "cfnlearn/cfn.hpp"
#include "cfnlearn/rng.hpp"
#include "cfnlearn/solver.hpp"

namespace cfnlearn::sudoku {

inline int box_side(int size) {
    if (size == 4) return 2;
    if (size == 9) return 3;
    throw StructuralError("unsupported sudoku size " + std::to_string(size) + " (expected 4 or 9)");
}

inline int cell_count(int size) { return size * size; }
inline int row_of(int size, int cell) { return cell / size; }
inline int col_of(int size, int cell) { return cell % size; }
inline int box_of(int size, int cell) {
    const int b = box_side(size);
    return (row_of(size, cell) / b) * b + col_of(size, cell) / b;
}

inline bool shares_unit(int size, int a, int b) {
    return a != b && (row_of(size, a) == row_of(size, b) || col_of(size, a) == col_of(size, b) ||
                      box_of(size, a) == box_of(size, b));
}

/// All canonical pairs (i < j) in lexicographic order. Pair features, predicted
/// matrices and reports all use this indexing.
inline std::vector<std::pair<int, int>> pair_list(int size) {
    const int n = cell_count(size);
    std::vector<std::pair<int, int>> out;
    out.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) out.emplace_back(i, j);
    return out;
}

inline int feature_dim(int size) { return 6 * size; }

/// One column per canonical pair: one-hot row, column and box of cell i,
/// followed by the same for cell j.
inline Eigen::MatrixXd pair_features(int size) {
    const auto pairs = pair_list(size);
    Eigen::MatrixXd f = Eigen::MatrixXd::Zero(feature_dim(size), static_cast<Eigen::Index>(pairs.size()));
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        const auto col = static_cast<Eigen::Index>(p);
        int base = 0;
        for (int cell : {pairs[p].first, pairs[p].second}) {
            f(base + row_of(size, cell), col) = 1.0;
            f(base + size + col_of(size, cell), col) = 1.0;
            f(base + 2 * size + box_of(size, cell), col) = 1.0;
            base += 3 * size;
        }
    }
    return f;
}

/// Hard rule network: TOP on the diagonal of every pair sharing a row,
/// column or box.
inline CostFunctionNetwork true_rules(int size, Cost top = kDefaultTop) {
    box_side(size);
    const int n = cell_count(size);
    auto net = CostFunctionNetwork::uniform(n, size, top);
    for (const auto& [i, j] : pair_list(size)) {
        if (!shares_unit(size, i, j)) continue;
        CostMatrix& m = net.pair(i, j);
        for (int v = 0; v < size; ++v) m(v, v) = top;
    }
    return net;
}

inline bool is_valid_solution(int size, const Assignment& grid) {
    const int n = cell_count(size);
    if (static_cast<int>(grid.size()) != n) return false;
    for (int v : grid)
        if (v < 0 || v >= size) return false;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (shares_unit(size, i, j) && grid[static_cast<std::size_t>(i)] == grid[static_cast<std::size_t>(j)])
                return false;
    return true;
}

struct SudokuSample {
    int size = 4;
    std::vector<int> hints;            ///< per cell: digit value, or -1 when empty
    std::vector<Assignment> solutions; ///< at least one; every one extends the hints

    int hint_count() const {
        return static_cast<int>(std::count_if(hints.begin(), hints.end(), [](int h) { return h >= 0; }));
    }

    Evidence evidence() const {
        Evidence e;
        for (std::size_t c = 0; c < hints.size(); ++c)
            if (hints[c] >= 0) e.emplace_back(static_cast<int>(c), hints[c]);
        return e;
    }

    bool is_solution(const Assignment& y) const {
        return std::find(solutions.begin(), solutions.end(), y) != solutions.end();
    }

    friend bool operator==(const SudokuSample&, const SudokuSample&) = default;
};

// ---------------------------------------------------------------------------
// CSV datasets: "puzzle,solution" per line, n^2 digits each, '0' or '.' for an
// empty cell. Consecutive lines with the same puzzle form one sample.

inline std::string grid_to_string(const std::vector<int>& cells) {
    std::string s;
    s.reserve(cells.size());
    for (int v : cells) s.push_back(v < 0 ? '0' : static_cast<char>('1' + v));
    return s;
}

namespace detail {

inline int size_from_length(std::size_t len, std::size_t line) {
    if (len == 16) return 4;
    if (len == 81) return 9;
    throw ParseError("grid has " + std::to_string(len) + " cells; expected 16 or 81", line);
}

inline std::vector<int> parse_cells(const std::string& s, int size, bool allow_empty, std::size_t line) {
    std::vector<int> cells;
    cells.reserve(s.size());
    for (char ch : s) {
        if ((ch == '0' || ch == '.') && allow_empty) {
            cells.push_back(-1);
        } else if (ch >= '1' && ch < '1' + size) {
            cells.push_back(ch - '1');
        } else {
            throw ParseError(std::string("invalid digit '") + ch + "'", line);
        }
    }
    return cells;
}

inline std::string trim(std::string s) {
    const auto ws = " \t\r\n";
    s.erase(0, s.find_first_not_of(ws));
    s.erase(s.find_last_not_of(ws) + 1);
    return s;
}

} // namespace detail

inline std::vector<SudokuSample> parse_dataset(std::istream& in) {
    std::vector<SudokuSample> out;
    std::string line;
    std::string last_puzzle;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = detail::trim(line);
        if (line.empty()) continue;
        if (lineno == 1 && std::isalpha(static_cast<unsigned char>(line[0]))) continue; // header
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw ParseError("expected 'puzzle,solution'", lineno);
        const std::string puzzle = detail::trim(line.substr(0, comma));
        const std::string solution = detail::trim(line.substr(comma + 1));
        const int size = detail::size_from_length(puzzle.size(), lineno);
        if (solution.size() != puzzle.size())
            throw ParseError("puzzle and solution lengths differ", lineno);
        auto hints = detail::parse_cells(puzzle, size, true, lineno);
        auto sol = detail::parse_cells(solution, size, false, lineno);
        for (std::size_t c = 0; c < hints.size(); ++c)
            if (hints[c] >= 0 && hints[c] != sol[c])
                throw ParseError("solution contradicts hint at cell " + std::to_string(c), lineno);
        if (!is_valid_solution(size, sol)) throw ParseError("solution violates the sudoku rules", lineno);
        if (!out.empty() && puzzle == last_puzzle) {
            out.back().solutions.push_back(std::move(sol));
        } else {
            out.push_back({size, std::move(hints), {std::move(sol)}});
            last_puzzle = puzzle;
        }
    }
    return out;
}

inline std::vector<SudokuSample> load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open dataset " + path);
    return parse_dataset(in);
}

inline void write_dataset(std::ostream& out, const std::vector<SudokuSample>& samples) {
    for (const auto& s : samples) {
        const std::string puzzle = grid_to_string(s.hints);
        for (const auto& sol : s.solutions) out << puzzle << ',' << grid_to_string(sol) << '\n';
    }
}

inline void save_dataset(const std::vector<SudokuSample>& samples, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write dataset " + path);
    write_dataset(out, samples);
}

// ---------------------------------------------------------------------------
// Generation

/// All solutions of the rules under the given hints, up to `cap`.
inline EnumerationResult solutions_of(int size, const std::vector<int>& hints, std::size_t cap) {
    static thread_local std::map<int, CostFunctionNetwork> rules_cache;
    auto it = rules_cache.find(size);
    if (it == rules_cache.end()) it = rules_cache.emplace(size, true_rules(size)).first;
    SudokuSample tmp{size, hints, {}};
    SolverConfig cfg;
    cfg.enumeration_bound = 0.0;
    cfg.max_solutions = cap;
    cfg.variable_order = VariableOrder::MinDomain;
    cfg.node_limit = 0;
    return enumerate(condition(it->second, tmp.evidence()), cfg);
}

namespace detail {

inline bool fill_grid(int size, std::vector<int>& grid, Rng& rng) {
    const int n = cell_count(size);
    int best = -1;
    std::vector<int> best_vals;
    for (int c = 0; c < n; ++c) {
        if (grid[static_cast<std::size_t>(c)] >= 0) continue;
        std::vector<int> vals;
        for (int v = 0; v < size; ++v) {
            bool ok = true;
            for (int o = 0; o < n && ok; ++o)
                if (grid[static_cast<std::size_t>(o)] == v && shares_unit(size, c, o)) ok = false;
            if (ok) vals.push_back(v);
        }
        if (best < 0 || vals.size() < best_vals.size()) {
            best = c;
            best_vals = std::move(vals);
            if (best_vals.empty()) return false;
        }
    }
    if (best < 0) return true;
    rng.shuffle(best_vals);
    for (int v : best_vals) {
        grid[static_cast<std::size_t>(best)] = v;
        if (fill_grid(size, grid, rng)) return true;
    }
    grid[static_cast<std::size_t>(best)] = -1;
    return false;
}

} // namespace detail

/// Uniformly shuffled complete grid, by randomized backtracking.
inline Assignment random_solution(int size, Rng& rng) {
    std::vector<int> grid(static_cast<std::size_t>(cell_count(size)), -1);
    if (!detail::fill_grid(size, grid, rng)) throw StructuralError("failed to fill a sudoku grid");
    return grid;
}

struct GenerateOptions {
    int max_hints_accepted = -1;    ///< retry while the reached hint count exceeds this (-1: accept any)
    int min_solutions = 1;          ///< non-unique mode: retry until this many solutions
    int max_solutions = 1;          ///< non-unique mode: retry if more solutions than this
    std::size_t store_solutions = 1000; ///< cap on stored solutions
    int max_attempts = 200;
};

/// Removes cells of a random full grid in random order down to `hint_count`.
/// In unique mode a removal is undone whenever it would allow a second
/// solution, so the result can stop above `hint_count` (local minimum).
inline SudokuSample generate(int size, int hint_count, Rng& rng, bool require_unique,
                             const GenerateOptions& opt = {}) {
    const int n = cell_count(size);
    if (hint_count < 0 || hint_count > n) throw StructuralError("hint count out of range");
    if (require_unique && hint_count < (size == 9 ? 17 : 4))
        throw StructuralError("no unique puzzle has fewer than " + std::to_string(size == 9 ? 17 : 4) + " hints");
    for (int attempt = 0; attempt < opt.max_attempts; ++attempt) {
        const Assignment full = random_solution(size, rng);
        std::vector<int> hints(full.begin(), full.end());
        std::vector<int> order(static_cast<std::size_t>(n));
        for (int c = 0; c < n; ++c) order[static_cast<std::size_t>(c)] = c;
        rng.shuffle(order);
        int remaining = n;
        for (int c : order) {
            if (remaining <= hint_count) break;
            const int saved = hints[static_cast<std::size_t>(c)];
            hints[static_cast<std::size_t>(c)] = -1;
            if (require_unique && solutions_of(size, hints, 2).solutions.size() > 1) {
                hints[static_cast<std::size_t>(c)] = saved;
                continue;
            }
            --remaining;
        }
        if (opt.max_hints_accepted >= 0 && remaining > opt.max_hints_accepted) continue;
        SudokuSample s{size, hints, {}};
        if (require_unique) {
            s.solutions = {full};
            return s;
        }
        auto all = solutions_of(size, hints, std::max<std::size_t>(opt.store_solutions, static_cast<std::size_t>(opt.max_solutions) + 1));
        const auto count = static_cast<int>(all.solutions.size());
        if (count < opt.min_solutions || (opt.max_solutions > 0 && count > opt.max_solutions)) continue;
        for (auto& [sol, cost] : all.solutions) {
            if (s.solutions.size() >= opt.store_solutions) break;
            s.solutions.push_back(std::move(sol));
        }
        return s;
    }
    throw StructuralError("could not generate a puzzle matching the request after " +
                          std::to_string(opt.max_attempts) + " attempts");
}

/// `count` puzzles with a hint target drawn uniformly from [hint_lo, hint_hi].
inline std::vector<SudokuSample> generate_dataset(int size, std::size_t count, int hint_lo, int hint_hi, Rng& rng,
                                                  bool require_unique, const GenerateOptions& opt = {}) {
    if (hint_lo > hint_hi) throw StructuralError("empty hint range");
    std::vector<SudokuSample> out;
    out.reserve(count);
    const auto span = static_cast<std::uint64_t>(hint_hi - hint_lo + 1);
    for (std::size_t s = 0; s < count; ++s)
        out.push_back(generate(size, hint_lo + static_cast<int>(rng.below(span)), rng, require_unique, opt));
    return out;
}

// ---------------------------------------------------------------------------
// Rule analysis

enum class PairClass { Difference, Zero, Other };

inline const char* to_string(PairClass c) {
    switch (c) {
    case PairClass::Difference: return "difference";
    case PairClass::Zero: return "zero";
    case PairClass::Other: return "other";
    }
    return "?";
}

struct PairRule {
    int i = 0, j = 0;
    bool in_rules = false; ///< the pair shares a row, column or box
    PairClass cls = PairClass::Zero;
    Cost min_diag = 0.0;
    Cost max_offdiag = 0.0; ///< max |entry| off the diagonal
};

struct RuleReport {
    int size = 4;
    Cost tau_on = 1.0;
    Cost tau_off = 0.1;
    std::vector<PairRule> pairs;
    int difference = 0, zero = 0, other = 0;
    int recovered = 0;             ///< rule pairs classified as difference constraints
    int spurious = 0;              ///< non-rule pairs classified as difference constraints
    int unconstrained_nonzero = 0; ///< non-rule pairs not classified as zero
    Cost min_rule_diag = 0.0;      ///< smallest min-diagonal over rule pairs
    Cost max_free_diag = 0.0;      ///< largest min-diagonal over non-rule pairs
    Cost separation() const { return min_rule_diag - max_free_diag; }
};

/// Classifies every canonical pair of a predicted network. Pairs absent from
/// the network are read as zero matrices.
inline RuleReport analyze_rules(const CostFunctionNetwork& predicted, int size, Cost tau_on = 1.0,
                                Cost tau_off = 0.1) {
    if (predicted.size() != cell_count(size)) throw StructuralError("network size does not match the grid");
    RuleReport r;
    r.size = size;
    r.tau_on = tau_on;
    r.tau_off = tau_off;
    bool first_rule = true, first_free = true;
    for (const auto& [i, j] : pair_list(size)) {
        PairRule p;
        p.i = i;
        p.j = j;
        p.in_rules = shares_unit(size, i, j);
        p.min_diag = predicted.top();
        Cost max_abs = 0.0;
        for (int a = 0; a < size; ++a)
            for (int b = 0; b < size; ++b) {
                const Cost c = predicted.pair_cost(i, j, a, b);
                max_abs = std::max(max_abs, std::abs(c));
                if (a == b) p.min_diag = std::min(p.min_diag, c);
                else p.max_offdiag = std::max(p.max_offdiag, std::abs(c));
            }
        if (p.min_diag > tau_on && p.max_offdiag < tau_off) p.cls = PairClass::Difference;
        else if (max_abs < tau_off) p.cls = PairClass::Zero;
        else p.cls = PairClass::Other;

        switch (p.cls) {
        case PairClass::Difference: ++r.difference; break;
        case PairClass::Zero: ++r.zero; break;
        case PairClass::Other: ++r.other; break;
        }
        if (p.in_rules) {
            r.recovered += p.cls == PairClass::Difference;
            r.min_rule_diag = first_rule ? p.min_diag : std::min(r.min_rule_diag, p.min_diag);
            first_rule = false;
        } else {
            r.spurious += p.cls == PairClass::Difference;
            r.unconstrained_nonzero += p.cls != PairClass::Zero;
            r.max_free_diag = first_free ? p.min_diag : std::max(r.max_free_diag, p.min_diag);
            first_free = false;
        }
        r.pairs.push_back(p);
    }
    return r;
}

inline void write_rule_csv(std::ostream& out, const RuleReport& r) {
    out << "pair_i,pair_j,class,min_diag,max_offdiag\n";
    out.precision(10);
    for (const auto& p : r.pairs)
        out << p.i << ',' << p.j << ',' << to_string(p.cls) << ',' << p.min_diag << ',' << p.max_offdiag << '\n';
}

/// Binned min-diagonal costs, split by rule / non-rule pairs. Values at or
/// above TOP are clamped into the last bin.
inline void write_histogram_csv(std::ostream& out, const RuleReport& r, int bins = 40, Cost top = kDefaultTop) {
    Cost lo = 0.0, hi = 0.0;
    bool any = false;
    for (const auto& p : r.pairs) {
        if (p.min_diag >= top) continue;
        lo = any ? std::min(lo, p.min_diag) : p.min_diag;
        hi = any ? std::max(hi, p.min_diag) : p.min_diag;
        any = true;
    }
    if (!any || hi <= lo) hi = lo + 1.0;
    const double width = (hi - lo) / bins;
    std::vector<int> rule(static_cast<std::size_t>(bins), 0), free(static_cast<std::size_t>(bins), 0);
    for (const auto& p : r.pairs) {
        int b = p.min_diag >= top ? bins - 1 : static_cast<int>((p.min_diag - lo) / width);
        b = std::clamp(b, 0, bins - 1);
        (p.in_rules ? rule : free)[static_cast<std::size_t>(b)]++;
    }
    out << "bin_lo,bin_hi,constrained,unconstrained\n";
    out.precision(10);
    for (int b = 0; b < bins; ++b)
        out << lo + b * width << ',' << lo + (b + 1) * width << ',' << rule[static_cast<std::size_t>(b)] << ','
            << free[static_cast<std::size_t>(b)] << '\n';
}

inline nlohmann::json rule_summary(const RuleReport& r) {
    return {{"size", r.size},
            {"tau_on", r.tau_on},
            {"tau_off", r.tau_off},
            {"pairs", r.pairs.size()},
            {"difference", r.difference},
            {"zero", r.zero},
            {"other", r.other},
            {"rule_pairs", r.size == 9 ? 810 : 56},
            {"recovered", r.recovered},
            {"spurious", r.spurious},
            {"unconstrained_nonzero", r.unconstrained_nonzero},
            {"min_rule_diag", r.min_rule_diag},
            {"max_free_diag", r.max_free_diag},
            {"separation", r.separation()}};
}

/// Hard network containing only the given rule pairs as difference constraints.
inline CostFunctionNetwork rules_subset(int size, const std::vector<std::pair<int, int>>& pairs,
                                        Cost top = kDefaultTop) {
    auto net = CostFunctionNetwork::uniform(cell_count(size), size, top);
    for (const auto& [i, j] : pairs) {
        CostMatrix& m = net.pair(i, j);
        for (int v = 0; v < size; ++v) m(v, v) = top;
    }
    return net;
}

/// Number of complete grids satisfying a hard network, counting up to cap + 1.
inline std::size_t count_grids(const CostFunctionNetwork& hard, std::size_t cap) {
    SolverConfig cfg;
    cfg.enumeration_bound = 0.0;
    cfg.max_solutions = cap;
    cfg.variable_order = VariableOrder::MinDomain;
    cfg.node_limit = 0;
    const auto r = enumerate(hard, cfg);
    return r.solutions.size() + (r.truncated ? 1 : 0);
}

inline constexpr std::size_t kGrids4x4 = 288;

/// True when the given difference constraints admit exactly the valid 4x4
/// grids (a subset of the rules can only admit more).
inline bool defines_rules_4x4(const std::vector<std::pair<int, int>>& pairs) {
    return count_grids(rules_subset(4, pairs), kGrids4x4) == kGrids4x4;
}

/// Greedy redundancy elimination for 4x4: drops each rule pair in turn when
/// the remaining set still admits exactly the valid grids. Returns the kept,
/// irredundant set.
inline std::vector<std::pair<int, int>> irredundant_rules_4x4() {
    std::vector<std::pair<int, int>> kept;
    for (const auto& p : pair_list(4))
        if (shares_unit(4, p.first, p.second)) kept.push_back(p);
    for (std::size_t k = 0; k < kept.size();) {
        auto trial = kept;
        trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(k));
        if (defines_rules_4x4(trial)) kept = std::move(trial);
        else ++k;
    }
    return kept;
}

} // namespace cfnlearn::sudoku
