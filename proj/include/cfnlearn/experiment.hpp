#pragma once

// Training and evaluation of pair-feature MLPs that predict Sudoku rule
// networks, plus the experiment drivers built on them.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "cfnlearn/cfn.hpp"
#include "cfnlearn/checkpoint.hpp"
#include "cfnlearn/losses.hpp"
#include "cfnlearn/mlp.hpp"
#include "cfnlearn/rng.hpp"
#include "cfnlearn/solver.hpp"
#include "cfnlearn/sudoku.hpp"

namespace cfnlearn {

enum class LossKind { Npll, ENpll, Hinge };

inline const char* to_string(LossKind k) {
    switch (k) {
    case LossKind::Npll: return "npll";
    case LossKind::ENpll: return "e-npll";
    case LossKind::Hinge: return "hinge";
    }
    return "?";
}

inline LossKind parse_loss(const std::string& s) {
    if (s == "npll") return LossKind::Npll;
    if (s == "e-npll" || s == "enpll") return LossKind::ENpll;
    if (s == "hinge") return LossKind::Hinge;
    throw StructuralError("unknown loss '" + s + "' (expected npll, e-npll or hinge)");
}

struct TrainConfig {
    LossKind loss = LossKind::ENpll;
    int k = 10;
    MaskMode k_mode = MaskMode::Count;
    int size = 9;

    double lr = 1e-3;
    double weight_decay = 1e-4;
    bool decoupled_decay = true;
    double l1_lambda = 2e-4;

    int max_epochs = 100;
    int patience = 10;
    int validate_every = 1;
    bool stop_at_perfect = false; ///< stop as soon as validation accuracy reaches 100%
    std::uint64_t seed = 0;

    int hidden_width = 128;
    int hidden_layers = 10;
    int residual_period = 2;
    double output_init_gain = 1.0;

    bool exclude_hint_terms = false;

    double hinge_margin = 1.0;
    int hinge_floor_start = 20; ///< free variables at epoch 0 of the hinge curriculum
    int hinge_floor_step = 2;   ///< extra free variables per epoch

    std::uint64_t eval_node_limit = 10'000'000;
    int threads = 1;
    bool deterministic = true; ///< single-threaded, no timing fields in the log

    /// Defaults for a grid size: 9x9 mirrors the published protocol, 4x4 is the
    /// scaled-down analogue.
    static TrainConfig defaults(int size) {
        TrainConfig c;
        c.size = size;
        if (size == 4) {
            c.k = 3;
            c.hidden_width = 64;
            c.hidden_layers = 4;
            c.hinge_floor_start = 8;
            c.validate_every = 1;
            c.patience = 30;
        } else {
            c.validate_every = 5;
        }
        return c;
    }

    MlpConfig mlp() const {
        return {sudoku::feature_dim(size), hidden_width, hidden_layers, residual_period, size * size};
    }
};

inline nlohmann::json to_json(const TrainConfig& c) {
    return {{"loss", to_string(c.loss)},
            {"k", c.k},
            {"k_percent", c.k_mode == MaskMode::Percent},
            {"size", c.size},
            {"lr", c.lr},
            {"weight_decay", c.weight_decay},
            {"decoupled_decay", c.decoupled_decay},
            {"l1_lambda", c.l1_lambda},
            {"max_epochs", c.max_epochs},
            {"patience", c.patience},
            {"validate_every", c.validate_every},
            {"stop_at_perfect", c.stop_at_perfect},
            {"seed", c.seed},
            {"hidden_width", c.hidden_width},
            {"hidden_layers", c.hidden_layers},
            {"residual_period", c.residual_period},
            {"output_init_gain", c.output_init_gain},
            {"exclude_hint_terms", c.exclude_hint_terms},
            {"hinge_margin", c.hinge_margin},
            {"hinge_floor_start", c.hinge_floor_start},
            {"hinge_floor_step", c.hinge_floor_step},
            {"eval_node_limit", c.eval_node_limit},
            {"threads", c.threads},
            {"deterministic", c.deterministic}};
}

/// Overlays the keys present in `j` onto `base`.
inline TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig c) {
    try {
        if (j.contains("loss")) c.loss = parse_loss(j.at("loss").get<std::string>());
        if (j.contains("k_percent")) c.k_mode = j.at("k_percent").get<bool>() ? MaskMode::Percent : MaskMode::Count;
        auto get = [&](const char* key, auto& field) {
            if (j.contains(key)) field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
        };
        get("k", c.k);
        get("size", c.size);
        get("lr", c.lr);
        get("weight_decay", c.weight_decay);
        get("decoupled_decay", c.decoupled_decay);
        get("l1_lambda", c.l1_lambda);
        get("max_epochs", c.max_epochs);
        get("patience", c.patience);
        get("validate_every", c.validate_every);
        get("stop_at_perfect", c.stop_at_perfect);
        get("seed", c.seed);
        get("hidden_width", c.hidden_width);
        get("hidden_layers", c.hidden_layers);
        get("residual_period", c.residual_period);
        get("output_init_gain", c.output_init_gain);
        get("exclude_hint_terms", c.exclude_hint_terms);
        get("hinge_margin", c.hinge_margin);
        get("hinge_floor_start", c.hinge_floor_start);
        get("hinge_floor_step", c.hinge_floor_step);
        get("eval_node_limit", c.eval_node_limit);
        get("threads", c.threads);
        get("deterministic", c.deterministic);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad training configuration: ") + e.what());
    }
    return c;
}

// ---------------------------------------------------------------------------
// Prediction

/// Network of predicted pairwise matrices; `outputs` has one column per
/// canonical pair, each holding the row-major d x d matrix.
inline CostFunctionNetwork assemble_network(int size, const Eigen::MatrixXd& outputs) {
    const auto pairs = sudoku::pair_list(size);
    if (outputs.cols() != static_cast<Eigen::Index>(pairs.size()) || outputs.rows() != size * size)
        throw StructuralError("prediction shape does not match the grid");
    auto net = CostFunctionNetwork::uniform(sudoku::cell_count(size), size);
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        CostMatrix m(pairs[p].first, pairs[p].second, size, size);
        const double* col = outputs.col(static_cast<Eigen::Index>(p)).data();
        std::copy(col, col + size * size, m.values().begin());
        net.set_pair(std::move(m));
    }
    return net;
}

inline int size_from_checkpoint(const Checkpoint& ck) {
    const int d = static_cast<int>(std::lround(std::sqrt(ck.mlp.output_dim)));
    sudoku::box_side(d);
    if (ck.mlp.input_dim != sudoku::feature_dim(d)) throw StructuralError("checkpoint input size does not match grid");
    return d;
}

inline CostFunctionNetwork predict_network(const Checkpoint& ck) {
    const int size = size_from_checkpoint(ck);
    const Mlp<double> mlp(ck.mlp);
    return assemble_network(size, mlp.forward(ck.params, sudoku::pair_features(size)));
}

// ---------------------------------------------------------------------------
// Evaluation

enum class EvalMode { Single, AnyOfKnown };

struct GridOutcome {
    bool solved = false;
    bool node_limit_hit = false;
    Assignment predicted;
    Cost cost = 0.0;
};

struct EvalReport {
    int grids_total = 0;
    int grids_solved = 0;
    int node_limit_hits = 0;
    std::vector<GridOutcome> grids;
    double seconds = 0.0;
    int epochs_run = 0;

    double accuracy() const { return grids_total ? static_cast<double>(grids_solved) / grids_total : 0.0; }
};

inline GridOutcome solve_grid(const CostFunctionNetwork& predicted, const sudoku::SudokuSample& s, EvalMode mode,
                              std::uint64_t node_limit) {
    SolverConfig cfg;
    cfg.node_limit = node_limit;
    cfg.variable_order = VariableOrder::MinDomain;
    const auto r = solve(condition(predicted, s.evidence()), cfg);
    GridOutcome g;
    g.predicted = r.best;
    g.cost = r.best_cost;
    g.node_limit_hit = !r.proven_optimal;
    if (!g.node_limit_hit) g.solved = mode == EvalMode::Single ? r.best == s.solutions.front() : s.is_solution(r.best);
    return g;
}

/// Conditions the predicted network on each grid's hints and solves it
/// exactly. Grids are independent; with threads > 1 they are split across
/// workers, each writing only its own slots.
inline EvalReport evaluate_grids(const CostFunctionNetwork& predicted, const std::vector<sudoku::SudokuSample>& data,
                                 EvalMode mode, std::uint64_t node_limit = 10'000'000, int threads = 1) {
    const auto t0 = std::chrono::steady_clock::now();
    EvalReport rep;
    rep.grids_total = static_cast<int>(data.size());
    rep.grids.resize(data.size());
    for (const auto& s : data)
        if (s.size * s.size != predicted.size()) throw StructuralError("dataset grid size does not match the model");
    const int workers = std::max(1, std::min<int>(threads, static_cast<int>(data.size())));
    if (workers == 1) {
        for (std::size_t g = 0; g < data.size(); ++g) rep.grids[g] = solve_grid(predicted, data[g], mode, node_limit);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                for (std::size_t g = static_cast<std::size_t>(w); g < data.size(); g += static_cast<std::size_t>(workers))
                    rep.grids[g] = solve_grid(predicted, data[g], mode, node_limit);
            });
        for (auto& t : pool) t.join();
    }
    for (const auto& g : rep.grids) {
        rep.grids_solved += g.solved;
        rep.node_limit_hits += g.node_limit_hit;
    }
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

inline EvalReport evaluate(const Checkpoint& ck, const std::vector<sudoku::SudokuSample>& data, EvalMode mode,
                           std::uint64_t node_limit = 10'000'000, int threads = 1) {
    return evaluate_grids(predict_network(ck), data, mode, node_limit, threads);
}

// ---------------------------------------------------------------------------
// Training

struct EpochLog {
    int epoch = 0;
    double loss = 0.0;
    std::optional<double> val_accuracy;
    double wall_clock = 0.0;
};

inline std::string to_log_line(const EpochLog& e, bool with_time) {
    nlohmann::json j;
    j["epoch"] = e.epoch;
    j["loss"] = e.loss;
    j["val_accuracy"] = e.val_accuracy ? nlohmann::json(*e.val_accuracy) : nlohmann::json(nullptr);
    if (with_time) j["wall_clock"] = e.wall_clock;
    return j.dump();
}

struct TrainResult {
    Checkpoint best;
    std::vector<EpochLog> log;
    int epochs_run = 0;
    int best_epoch = -1;
    double best_val_accuracy = -1.0;
    double seconds = 0.0;
};

class NonFiniteLoss : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

/// Hints plus extra cells revealed from y so that at most `free_target` cells
/// stay unassigned.
inline Evidence curriculum_evidence(const sudoku::SudokuSample& s, const Assignment& y, int free_target, Rng& rng) {
    Evidence ev = s.evidence();
    std::vector<int> empty;
    for (std::size_t c = 0; c < s.hints.size(); ++c)
        if (s.hints[c] < 0) empty.push_back(static_cast<int>(c));
    if (static_cast<int>(empty.size()) <= free_target) return ev;
    rng.shuffle(empty);
    for (std::size_t t = static_cast<std::size_t>(std::max(0, free_target)); t < empty.size(); ++t)
        ev.emplace_back(empty[t], y[static_cast<std::size_t>(empty[t])]);
    return ev;
}

} // namespace detail

/// Per-sample training with early stopping on validation grid accuracy. The
/// returned checkpoint holds the parameters of the best validation epoch.
inline TrainResult train(const TrainConfig& cfg, const std::vector<sudoku::SudokuSample>& train_set,
                         const std::vector<sudoku::SudokuSample>& valid_set, std::ostream* log_out = nullptr) {
    const auto t0 = std::chrono::steady_clock::now();
    const int size = cfg.size;
    const int n = sudoku::cell_count(size);
    for (const auto& s : train_set)
        if (s.size != size) throw StructuralError("training grid size does not match the configuration");
    const int mask_k = cfg.loss == LossKind::Npll ? 0 : mask_size(n, cfg.k, cfg.k_mode);

    const Mlp<double> mlp(cfg.mlp());
    ParamStore<double> params = mlp.init(cfg.seed, cfg.output_init_gain);
    const Eigen::MatrixXd features = sudoku::pair_features(size);
    const AdamConfig adam{cfg.lr, 0.9, 0.999, 1e-8, cfg.weight_decay, cfg.decoupled_decay};

    Rng shuffle_rng(derive_seed(cfg.seed, "shuffle"));
    auto make_checkpoint = [&](const ParamStore<double>& p) {
        Checkpoint ck;
        ck.mlp = mlp.config();
        ck.params = p;
        ck.rng_state = rng_state_string(shuffle_rng);
        ck.metadata = {{"train_config", to_json(cfg)}};
        return ck;
    };

    TrainResult res;
    res.best = make_checkpoint(params);
    int since_best = 0;

    std::vector<std::size_t> order(train_set.size());
    for (std::size_t s = 0; s < order.size(); ++s) order[s] = s;

    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        double epoch_loss = 0.0;
        for (std::size_t idx : order) {
            const auto& sample = train_set[idx];
            Rng pick(derive_seed(cfg.seed, "solution", static_cast<std::uint64_t>(epoch), idx));
            const Assignment& y = sample.solutions[pick.below(sample.solutions.size())];

            auto non_finite = [&](const char* what) {
                std::ostringstream msg;
                msg << "non-finite " << what << " at epoch " << epoch << ", sample " << idx << ": puzzle "
                    << sudoku::grid_to_string(sample.hints) << " solution " << sudoku::grid_to_string(y);
                return NonFiniteLoss(msg.str());
            };

            typename Mlp<double>::Cache cache;
            const Eigen::MatrixXd out = mlp.forward(params, features, &cache);
            if (!out.allFinite()) throw non_finite("network output");
            const CostFunctionNetwork predicted = assemble_network(size, out);

            LossReport rep;
            if (cfg.loss == LossKind::Hinge) {
                const int free_target = cfg.hinge_floor_start + cfg.hinge_floor_step * epoch;
                Rng reveal(derive_seed(cfg.seed, "curriculum", static_cast<std::uint64_t>(epoch), idx));
                const auto ev = detail::curriculum_evidence(sample, y, free_target, reveal);
                SolverConfig scfg;
                scfg.node_limit = cfg.eval_node_limit;
                scfg.variable_order = VariableOrder::MinDomain;
                rep = hinge(condition(predicted, ev), y, cfg.hinge_margin, scfg);
            } else {
                const CostFunctionNetwork conditioned = condition(predicted, sample.evidence());
                const MaskPlan plan = mask_k == 0
                    ? MaskPlan::none(n)
                    : sample_mask(n, mask_k, {derive_seed(cfg.seed, "mask"), static_cast<std::uint64_t>(epoch), idx});
                std::vector<char> skip;
                if (cfg.exclude_hint_terms) {
                    skip.assign(static_cast<std::size_t>(n), 0);
                    for (const auto& [c, v] : sample.evidence()) skip[static_cast<std::size_t>(c)] = 1;
                }
                rep = e_npll(conditioned, y, plan, cfg.exclude_hint_terms ? &skip : nullptr);
            }

            const double l1 = l1_norm(predicted);
            const double total = rep.value + cfg.l1_lambda * l1;
            if (!std::isfinite(total)) throw non_finite("loss");
            epoch_loss += total;

            Eigen::MatrixXd upstream(out.rows(), out.cols());
            for (std::size_t p = 0; p < rep.grad_pairs.size(); ++p) {
                const auto g = rep.grad_pairs[p].values();
                for (Eigen::Index r = 0; r < out.rows(); ++r) {
                    const double c = out(r, static_cast<Eigen::Index>(p));
                    upstream(r, static_cast<Eigen::Index>(p)) =
                        g[static_cast<std::size_t>(r)] + cfg.l1_lambda * static_cast<double>((c > 0.0) - (c < 0.0));
                }
            }
            adam_step(params, mlp.backward(params, cache, upstream), adam);
        }

        EpochLog entry;
        entry.epoch = epoch;
        entry.loss = train_set.empty() ? 0.0 : epoch_loss / static_cast<double>(train_set.size());
        const bool validate = (epoch + 1) % std::max(1, cfg.validate_every) == 0 || epoch + 1 == cfg.max_epochs;
        bool improved = false;
        if (validate) {
            Checkpoint current = make_checkpoint(params);
            const double acc = valid_set.empty()
                ? 0.0
                : evaluate(current, valid_set, EvalMode::AnyOfKnown, cfg.eval_node_limit, cfg.deterministic ? 1 : cfg.threads)
                      .accuracy();
            entry.val_accuracy = acc;
            // ties refresh the kept checkpoint but do not reset patience
            improved = acc > res.best_val_accuracy;
            if (improved || (acc == res.best_val_accuracy && res.best_epoch >= 0)) {
                res.best_val_accuracy = acc;
                res.best_epoch = epoch;
                res.best = std::move(current);
            }
        }
        entry.wall_clock = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        res.log.push_back(entry);
        res.epochs_run = epoch + 1;
        if (log_out) *log_out << to_log_line(entry, !cfg.deterministic) << '\n' << std::flush;

        if (validate) {
            since_best = improved ? 0 : since_best + std::max(1, cfg.validate_every);
            if (cfg.stop_at_perfect && res.best_val_accuracy >= 1.0) break;
            if (since_best >= cfg.patience) break;
        }
    }
    if (res.best_epoch < 0) res.best = make_checkpoint(params);
    res.best.metadata["epochs_run"] = res.epochs_run;
    res.best.metadata["best_epoch"] = res.best_epoch;
    res.best.metadata["best_val_accuracy"] = res.best_val_accuracy;
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

// ---------------------------------------------------------------------------
// k sweep

struct SweepRow {
    int k = 0;
    std::uint64_t seed = 0;
    int epochs = 0;
    int best_epoch = 0;
    double seconds = 0.0;
    double test_accuracy = 0.0;
    bool solved_all = false;
    int recovered = 0;
    int spurious = 0;
    std::string error;
};

struct Datasets {
    std::vector<sudoku::SudokuSample> train, valid, test;
};

/// Called after each successful sweep run with its row and predicted network.
using SweepModelHook = std::function<void(const SweepRow&, const CostFunctionNetwork&)>;

/// Trains one model per (k, seed) and scores it on the test set. A failing run
/// is recorded and the sweep continues. `logs`, when given, receives the
/// concatenated training logs.
inline std::vector<SweepRow> sweep_k(const TrainConfig& base, const std::vector<int>& ks,
                                     const std::vector<std::uint64_t>& seeds, const Datasets& data,
                                     std::ostream* logs = nullptr, const SweepModelHook& on_model = {}) {
    std::vector<SweepRow> rows;
    for (int k : ks) {
        for (std::uint64_t seed : seeds) {
            SweepRow row;
            row.k = k;
            row.seed = seed;
            try {
                TrainConfig cfg = base;
                cfg.k = k;
                cfg.seed = seed;
                if (cfg.loss != LossKind::Hinge) cfg.loss = k == 0 ? LossKind::Npll : LossKind::ENpll;
                if (logs) *logs << "{\"run\":{\"k\":" << k << ",\"seed\":" << seed << "}}\n";
                const TrainResult tr = train(cfg, data.train, data.valid, logs);
                const CostFunctionNetwork predicted = predict_network(tr.best);
                const EvalReport ev = evaluate_grids(predicted, data.test, EvalMode::AnyOfKnown, cfg.eval_node_limit,
                                                     cfg.deterministic ? 1 : cfg.threads);
                const auto rules = sudoku::analyze_rules(predicted, cfg.size);
                row.epochs = tr.epochs_run;
                row.best_epoch = tr.best_epoch;
                row.seconds = tr.seconds;
                row.test_accuracy = ev.accuracy();
                row.solved_all = ev.grids_total > 0 && ev.grids_solved == ev.grids_total;
                row.recovered = rules.recovered;
                row.spurious = rules.spurious;
                if (on_model) on_model(row, predicted);
            } catch (const std::exception& e) {
                row.error = e.what();
            }
            rows.push_back(row);
        }
    }
    return rows;
}

inline void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows, bool with_time = true) {
    out << "k,seed,epochs,best_epoch,train_seconds,test_accuracy,solved_all,recovered,spurious,error\n";
    for (const auto& r : rows) {
        out << r.k << ',' << r.seed << ',' << r.epochs << ',' << r.best_epoch << ',';
        if (with_time) out << r.seconds;
        out << ',' << r.test_accuracy << ',' << (r.solved_all ? 1 : 0) << ',' << r.recovered << ',' << r.spurious
            << ",\"" << r.error << "\"\n";
    }
}

/// Aggregate per k: mean/sd of epochs and training time, and the fraction of
/// runs that solved every test grid.
inline void write_sweep_summary_csv(std::ostream& out, const std::vector<SweepRow>& rows, bool with_time = true) {
    out << "k,runs,epochs_mean,epochs_sd,seconds_mean,seconds_sd,runs_solved_fraction\n";
    std::vector<int> ks;
    for (const auto& r : rows)
        if (std::find(ks.begin(), ks.end(), r.k) == ks.end()) ks.push_back(r.k);
    for (int k : ks) {
        std::vector<double> ep, sec;
        int solved = 0, runs = 0;
        for (const auto& r : rows) {
            if (r.k != k) continue;
            ++runs;
            solved += r.solved_all;
            ep.push_back(r.epochs);
            sec.push_back(r.seconds);
        }
        auto mean_sd = [](const std::vector<double>& v) {
            double m = 0.0, s = 0.0;
            for (double x : v) m += x;
            m /= static_cast<double>(v.size());
            for (double x : v) s += (x - m) * (x - m);
            return std::pair{m, v.size() > 1 ? std::sqrt(s / static_cast<double>(v.size() - 1)) : 0.0};
        };
        const auto [em, es] = mean_sd(ep);
        const auto [sm, ss] = mean_sd(sec);
        out << k << ',' << runs << ',' << em << ',' << es << ',';
        if (with_time) out << sm << ',' << ss;
        else out << ',';
        out << ',' << static_cast<double>(solved) / runs << '\n';
    }
}

// ---------------------------------------------------------------------------
// Enumeration of learned rules

struct SetComparison {
    bool equal = false;
    std::size_t expected = 0;
    std::size_t found = 0;
    std::vector<Assignment> missing; ///< valid completions not produced
    std::vector<Assignment> extra;   ///< produced assignments that are not valid completions
    bool partial = false;            ///< an enumeration was truncated
};

/// Half the median diagonal cost over the pairs whose whole diagonal exceeds
/// `tau_on`; `tau_on` itself when no pair qualifies.
inline Cost default_enumeration_tau(const CostFunctionNetwork& predicted, Cost tau_on = 1.0) {
    std::vector<Cost> diag;
    for (const auto& m : predicted.pairs()) {
        const int d = std::min(m.rows(), m.cols());
        bool on = d > 0;
        for (int v = 0; v < d && on; ++v) on = m(v, v) > tau_on;
        if (!on) continue;
        for (int v = 0; v < d; ++v) diag.push_back(m(v, v));
    }
    if (diag.empty()) return tau_on;
    const auto mid = diag.begin() + static_cast<std::ptrdiff_t>(diag.size() / 2);
    std::nth_element(diag.begin(), mid, diag.end());
    return *mid / 2.0;
}

/// Thresholds the predicted network into a hard one, conditions it on the
/// hints and enumerates its zero-cost assignments; compares them with the
/// completions admitted by the true rules.
inline SetComparison enumerate_learned(const CostFunctionNetwork& predicted, const sudoku::SudokuSample& sample,
                                       Cost tau, std::size_t max_solutions = 10000) {
    const auto hard = condition(threshold_to_boolean(predicted, tau), sample.evidence());
    SolverConfig cfg;
    cfg.enumeration_bound = 0.0;
    cfg.max_solutions = max_solutions;
    cfg.variable_order = VariableOrder::MinDomain;
    cfg.node_limit = 0;
    const auto got = enumerate(hard, cfg);
    const auto want = sudoku::solutions_of(sample.size, sample.hints, max_solutions);

    SetComparison cmp;
    cmp.partial = got.truncated || want.truncated;
    cmp.found = got.solutions.size();
    cmp.expected = want.solutions.size();
    std::size_t a = 0, b = 0;
    while (a < got.solutions.size() || b < want.solutions.size()) {
        if (b == want.solutions.size() || (a < got.solutions.size() && got.solutions[a].first < want.solutions[b].first)) {
            cmp.extra.push_back(got.solutions[a++].first);
        } else if (a == got.solutions.size() || want.solutions[b].first < got.solutions[a].first) {
            cmp.missing.push_back(want.solutions[b++].first);
        } else {
            ++a;
            ++b;
        }
    }
    cmp.equal = !cmp.partial && cmp.missing.empty() && cmp.extra.empty();
    return cmp;
}

} // namespace cfnlearn
