// cfnlearn command line: data generation, training, evaluation, k sweeps,
// rule analysis, enumeration and direct solving of cost function networks.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "cfnlearn/cfn_json.hpp"
#include "cfnlearn/experiment.hpp"

using namespace cfnlearn;
using nlohmann::json;

namespace {

// Opens `path` for writing, or returns std::cout for "-" / empty.
class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty() && path != "-") {
            file_.open(path);
            if (!file_) throw ParseError("cannot write " + path);
        }
    }
    std::ostream& get() { return file_.is_open() ? file_ : std::cout; }

private:
    std::ofstream file_;
};

// --- training configuration ------------------------------------------------

struct ConfigFlags {
    std::string config_path;
    std::optional<int> size, k, max_epochs, patience, validate_every, threads, hinge_floor, hinge_floor_step;
    std::optional<int> width, layers, residual_period;
    std::optional<std::string> loss;
    std::optional<double> lr, weight_decay, l1, hinge_margin, output_gain;
    std::optional<std::uint64_t> seed, node_limit;
    bool k_percent = false;
    bool deterministic = false;
    bool nondeterministic = false;
    std::string train_path, valid_path, test_path;

    void add(CLI::App* cmd) {
        cmd->add_option("-c,--config", config_path, "JSON configuration file");
        cmd->add_option("--size", size, "Grid size (4 or 9)");
        cmd->add_option("--loss", loss, "npll, e-npll or hinge");
        cmd->add_option("-k", k, "Masked neighbours per variable");
        cmd->add_flag("--k-percent", k_percent, "Read k as a percentage of n-1");
        cmd->add_option("--lr", lr, "Adam learning rate");
        cmd->add_option("--weight-decay", weight_decay, "Weight decay");
        cmd->add_option("--l1", l1, "L1 weight on predicted costs");
        cmd->add_option("--max-epochs", max_epochs, "Epoch cap");
        cmd->add_option("--patience", patience, "Epochs without validation gain before stopping");
        cmd->add_option("--validate-every", validate_every, "Validation period in epochs");
        cmd->add_option("--seed", seed, "Seed for every random stream");
        cmd->add_option("--width", width, "Hidden width");
        cmd->add_option("--layers", layers, "Hidden layers");
        cmd->add_option("--residual-period", residual_period, "Layers between skip connections (0: none)");
        cmd->add_option("--output-gain", output_gain, "Scale of the output layer initialisation");
        cmd->add_option("--hinge-margin", hinge_margin, "Hamming margin of the hinge loss");
        cmd->add_option("--hinge-floor", hinge_floor, "Free variables at the first hinge epoch");
        cmd->add_option("--hinge-floor-step", hinge_floor_step, "Extra free variables per hinge epoch");
        cmd->add_option("--node-limit", node_limit, "Solver node limit (0: none)");
        cmd->add_option("--threads", threads, "Evaluation threads when not deterministic");
        cmd->add_flag("--deterministic", deterministic, "Single-threaded, no timing in logs (default)");
        cmd->add_flag("--no-deterministic", nondeterministic, "Allow threads and log wall-clock time");
        cmd->add_option("--train", train_path, "Training CSV");
        cmd->add_option("--valid", valid_path, "Validation CSV");
        cmd->add_option("--test", test_path, "Test CSV");
    }

    TrainConfig resolve() {
        json file = json::object();
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw ParseError("cannot open " + config_path);
            try {
                in >> file;
            } catch (const json::exception& e) {
                throw ParseError(config_path + ": " + e.what());
            }
        }
        const int grid = size.value_or(file.value("size", 4));
        TrainConfig c = train_config_from_json(file, TrainConfig::defaults(grid));
        c.size = grid;
        if (train_path.empty()) train_path = file.value("train", "");
        if (valid_path.empty()) valid_path = file.value("valid", "");
        if (test_path.empty()) test_path = file.value("test", "");
        if (loss) c.loss = parse_loss(*loss);
        if (k) c.k = *k;
        if (k_percent) c.k_mode = MaskMode::Percent;
        if (lr) c.lr = *lr;
        if (weight_decay) c.weight_decay = *weight_decay;
        if (l1) c.l1_lambda = *l1;
        if (max_epochs) c.max_epochs = *max_epochs;
        if (patience) c.patience = *patience;
        if (validate_every) c.validate_every = *validate_every;
        if (seed) c.seed = *seed;
        if (width) c.hidden_width = *width;
        if (layers) c.hidden_layers = *layers;
        if (residual_period) c.residual_period = *residual_period;
        if (output_gain) c.output_init_gain = *output_gain;
        if (hinge_margin) c.hinge_margin = *hinge_margin;
        if (hinge_floor) c.hinge_floor_start = *hinge_floor;
        if (hinge_floor_step) c.hinge_floor_step = *hinge_floor_step;
        if (node_limit) c.eval_node_limit = *node_limit;
        if (threads) c.threads = *threads;
        if (deterministic) c.deterministic = true;
        if (nondeterministic) c.deterministic = false;
        return c;
    }
};

std::vector<sudoku::SudokuSample> load_required(const std::string& path, const char* what) {
    if (path.empty()) throw StructuralError(std::string("missing --") + what + " dataset");
    return sudoku::load_dataset(path);
}

EvalMode parse_mode(const std::string& s) {
    if (s == "single") return EvalMode::Single;
    if (s == "any" || s == "any-of-known") return EvalMode::AnyOfKnown;
    throw StructuralError("unknown mode '" + s + "' (expected single or any-of-known)");
}

void write_grid_report(std::ostream& out, const std::vector<sudoku::SudokuSample>& data, const EvalReport& rep) {
    out << "grid,hints,puzzle,solved,node_limit_hit,cost,predicted\n";
    out.precision(10);
    for (std::size_t g = 0; g < data.size(); ++g) {
        const auto& o = rep.grids[g];
        out << g << ',' << data[g].hint_count() << ',' << sudoku::grid_to_string(data[g].hints) << ',' << (o.solved ? 1 : 0)
            << ',' << (o.node_limit_hit ? 1 : 0) << ',' << o.cost << ',' << sudoku::grid_to_string(o.predicted) << '\n';
    }
}

json eval_summary(const EvalReport& rep) {
    return {{"grids_total", rep.grids_total},
            {"grids_solved", rep.grids_solved},
            {"accuracy", rep.accuracy()},
            {"node_limit_hits", rep.node_limit_hits},
            {"seconds", rep.seconds}};
}

Evidence parse_evidence(const std::string& text) {
    Evidence ev;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw ParseError("evidence item '" + item + "' is not var=value");
        try {
            ev.emplace_back(std::stoi(item.substr(0, eq)), std::stoi(item.substr(eq + 1)));
        } catch (const std::logic_error&) {
            throw ParseError("evidence item '" + item + "' is not var=value");
        }
    }
    return ev;
}

json assignment_line(const Assignment& y, Cost cost, const CostFunctionNetwork& net) {
    json j = {{"assignment", y}, {"cost", cost}};
    if (cost >= net.top()) j["infeasible"] = true;
    return j;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Learning pairwise cost function networks from solved examples"};
    app.require_subcommand(1);

    // generate-data
    auto* gen = app.add_subcommand("generate-data", "Generate a Sudoku CSV dataset");
    int gen_size = 4, gen_lo = 4, gen_hi = 8, gen_min_sol = 1, gen_max_sol = 1, gen_max_hints = -1, gen_attempts = 200;
    std::size_t gen_count = 200, gen_store = 5;
    std::uint64_t gen_seed = 0;
    bool gen_multi = false;
    std::string gen_out;
    gen->add_option("--size", gen_size, "Grid size (4 or 9)");
    gen->add_option("--count", gen_count, "Number of puzzles");
    gen->add_option("--hint-lo", gen_lo, "Smallest hint target");
    gen->add_option("--hint-hi", gen_hi, "Largest hint target");
    gen->add_option("--seed", gen_seed, "Random seed");
    gen->add_flag("--multi", gen_multi, "Allow several solutions per puzzle");
    gen->add_option("--min-solutions", gen_min_sol, "Multi mode: fewest solutions");
    gen->add_option("--max-solutions", gen_max_sol, "Multi mode: most solutions (0: no limit)");
    gen->add_option("--store-solutions", gen_store, "Multi mode: solutions written per puzzle");
    gen->add_option("--max-hints-accepted", gen_max_hints, "Retry puzzles that end above this many hints");
    gen->add_option("--max-attempts", gen_attempts, "Attempts per puzzle");
    gen->add_option("-o,--out", gen_out, "Output CSV (default stdout)");

    // train
    auto* tr = app.add_subcommand("train", "Train a model");
    ConfigFlags tr_flags;
    tr_flags.add(tr);
    std::string tr_out = "checkpoint.json", tr_log, tr_report, tr_mode = "any-of-known";
    tr->add_option("-o,--out", tr_out, "Checkpoint path");
    tr->add_option("--log", tr_log, "JSON-lines training log (default stdout)");
    tr->add_option("--report", tr_report, "Per-grid CSV on the test set");
    tr->add_option("--mode", tr_mode, "Test scoring: single or any-of-known");
    tr->add_flag("--print-config", "Print the resolved configuration and exit");

    // evaluate
    auto* ev = app.add_subcommand("evaluate", "Score a checkpoint on a dataset");
    std::string ev_ck, ev_data, ev_mode = "any-of-known", ev_report;
    std::uint64_t ev_limit = 10'000'000;
    int ev_threads = 1;
    ev->add_option("checkpoint", ev_ck, "Checkpoint JSON")->required();
    ev->add_option("dataset", ev_data, "Dataset CSV")->required();
    ev->add_option("--mode", ev_mode, "single or any-of-known");
    ev->add_option("--node-limit", ev_limit, "Solver node limit per grid (0: none)");
    ev->add_option("--threads", ev_threads, "Worker threads");
    ev->add_option("--report", ev_report, "Per-grid CSV");

    // sweep-k
    auto* sw = app.add_subcommand("sweep-k", "Train one model per (k, seed) and tabulate");
    ConfigFlags sw_flags;
    sw_flags.add(sw);
    std::vector<int> sw_ks = {0, 2, 3, 12};
    std::vector<std::uint64_t> sw_seeds = {0, 1, 2, 3, 4};
    std::string sw_out, sw_summary, sw_log;
    sw->add_option("--ks", sw_ks, "k values")->delimiter(',');
    sw->add_option("--seeds", sw_seeds, "Seeds")->delimiter(',');
    sw->add_option("-o,--out", sw_out, "Per-run CSV (default stdout)");
    sw->add_option("--summary", sw_summary, "Per-k summary CSV");
    sw->add_option("--log", sw_log, "Concatenated JSON-lines training logs");

    // solve
    auto* so = app.add_subcommand("solve", "Minimise a cost function network");
    std::string so_net, so_evidence, so_order = "degree";
    std::optional<double> so_bound;
    std::size_t so_max = 1000;
    std::uint64_t so_limit = 100'000'000;
    so->add_option("network", so_net, "Network JSON")->required();
    so->add_option("--evidence", so_evidence, "Fixed values, var=value,...");
    so->add_option("--enumerate", so_bound, "List every assignment with cost <= BOUND");
    so->add_option("--max-solutions", so_max, "Enumeration cap");
    so->add_option("--node-limit", so_limit, "Node limit (0: none)");
    so->add_option("--order", so_order, "Variable order: degree or min-domain");

    // analyze-rules
    auto* an = app.add_subcommand("analyze-rules", "Classify the predicted pairwise matrices");
    std::string an_ck, an_rules, an_hist, an_net;
    double an_on = 1.0, an_off = 0.1;
    int an_bins = 40;
    bool an_toulbar2 = false;
    an->add_option("checkpoint", an_ck, "Checkpoint JSON")->required();
    an->add_option("--tau-on", an_on, "Diagonal threshold");
    an->add_option("--tau-off", an_off, "Off-diagonal threshold");
    an->add_option("--rules", an_rules, "Per-pair CSV");
    an->add_option("--histogram", an_hist, "Min-diagonal histogram CSV");
    an->add_option("--bins", an_bins, "Histogram bins");
    an->add_option("--network", an_net, "Write the predicted network");
    an->add_flag("--toulbar2", an_toulbar2, "Write the network in toulbar2's JSON format");

    // enumerate-learned
    auto* en = app.add_subcommand("enumerate-learned", "Compare thresholded learned rules with the true solution sets");
    std::string en_ck, en_data, en_report;
    std::optional<double> en_tau;
    std::size_t en_max = 10000;
    en->add_option("checkpoint", en_ck, "Checkpoint JSON")->required();
    en->add_option("dataset", en_data, "Dataset CSV")->required();
    en->add_option("--tau", en_tau, "Threshold (default: half the median learned diagonal)");
    en->add_option("--max-solutions", en_max, "Enumeration cap per puzzle");
    en->add_option("--report", en_report, "Per-puzzle CSV");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            Rng rng(gen_seed);
            sudoku::GenerateOptions opt;
            opt.max_hints_accepted = gen_max_hints;
            opt.min_solutions = gen_min_sol;
            opt.max_solutions = gen_max_sol;
            opt.store_solutions = gen_multi ? gen_store : 1;
            opt.max_attempts = gen_attempts;
            const auto data = sudoku::generate_dataset(gen_size, gen_count, gen_lo, gen_hi, rng, !gen_multi, opt);
            Output out(gen_out);
            sudoku::write_dataset(out.get(), data);
        } else if (tr->parsed()) {
            const TrainConfig cfg = tr_flags.resolve();
            if (tr->count("--print-config")) {
                std::cout << to_json(cfg).dump(2) << '\n';
                return 0;
            }
            const auto train_set = load_required(tr_flags.train_path, "train");
            const auto valid_set = load_required(tr_flags.valid_path, "valid");
            Output log(tr_log);
            const auto res = train(cfg, train_set, valid_set, &log.get());
            save_checkpoint(res.best, tr_out);
            json summary = {{"checkpoint", tr_out},
                            {"epochs_run", res.epochs_run},
                            {"best_epoch", res.best_epoch},
                            {"best_val_accuracy", res.best_val_accuracy}};
            if (!cfg.deterministic) summary["seconds"] = res.seconds;
            if (!tr_flags.test_path.empty()) {
                const auto test = sudoku::load_dataset(tr_flags.test_path);
                const auto rep = evaluate(res.best, test, parse_mode(tr_mode), cfg.eval_node_limit,
                                          cfg.deterministic ? 1 : cfg.threads);
                summary["test"] = eval_summary(rep);
                if (cfg.deterministic) summary["test"].erase("seconds");
                if (!tr_report.empty()) {
                    Output out(tr_report);
                    write_grid_report(out.get(), test, rep);
                }
            }
            std::cerr << summary.dump() << '\n';
        } else if (ev->parsed()) {
            const auto ck = load_checkpoint(ev_ck);
            const auto data = sudoku::load_dataset(ev_data);
            auto rep = evaluate(ck, data, parse_mode(ev_mode), ev_limit, ev_threads);
            rep.epochs_run = ck.metadata.value("epochs_run", 0);
            auto j = eval_summary(rep);
            j["epochs_run"] = rep.epochs_run;
            std::cout << j.dump() << '\n';
            if (!ev_report.empty()) {
                Output out(ev_report);
                write_grid_report(out.get(), data, rep);
            }
        } else if (sw->parsed()) {
            const TrainConfig cfg = sw_flags.resolve();
            Datasets data{load_required(sw_flags.train_path, "train"), load_required(sw_flags.valid_path, "valid"),
                          load_required(sw_flags.test_path, "test")};
            std::optional<Output> log;
            if (!sw_log.empty()) log.emplace(sw_log);
            const auto rows = sweep_k(cfg, sw_ks, sw_seeds, data, log ? &log->get() : nullptr);
            Output out(sw_out);
            write_sweep_csv(out.get(), rows, !cfg.deterministic);
            if (!sw_summary.empty()) {
                Output s(sw_summary);
                write_sweep_summary_csv(s.get(), rows, !cfg.deterministic);
            }
        } else if (so->parsed()) {
            const auto net = load_network(so_net);
            const auto conditioned = condition(net, parse_evidence(so_evidence));
            SolverConfig cfg;
            cfg.node_limit = so_limit;
            cfg.max_solutions = so_max;
            if (so_order == "min-domain") cfg.variable_order = VariableOrder::MinDomain;
            else if (so_order != "degree") throw StructuralError("unknown order '" + so_order + "'");
            if (so_bound) {
                cfg.enumeration_bound = *so_bound;
                const auto r = enumerate(conditioned, cfg);
                for (const auto& [y, c] : r.solutions) std::cout << assignment_line(y, c, net).dump() << '\n';
                if (r.truncated || !r.complete)
                    std::cout << json{{"truncated", r.truncated}, {"complete", r.complete}}.dump() << '\n';
            } else {
                const auto r = solve(conditioned, cfg);
                auto j = assignment_line(r.best, r.best_cost, net);
                j["optimal"] = r.proven_optimal;
                j["nodes"] = r.nodes_expanded;
                std::cout << j.dump() << '\n';
            }
        } else if (an->parsed()) {
            const auto ck = load_checkpoint(an_ck);
            const auto net = predict_network(ck);
            const int size = size_from_checkpoint(ck);
            const auto rep = sudoku::analyze_rules(net, size, an_on, an_off);
            std::cout << sudoku::rule_summary(rep).dump() << '\n';
            if (!an_rules.empty()) {
                Output out(an_rules);
                sudoku::write_rule_csv(out.get(), rep);
            }
            if (!an_hist.empty()) {
                Output out(an_hist);
                sudoku::write_histogram_csv(out.get(), rep, an_bins);
            }
            if (!an_net.empty()) save_network(net, an_net, an_toulbar2);
        } else if (en->parsed()) {
            const auto ck = load_checkpoint(en_ck);
            const auto net = predict_network(ck);
            const auto data = sudoku::load_dataset(en_data);
            const Cost tau = en_tau.value_or(default_enumeration_tau(net));
            std::optional<Output> out;
            if (!en_report.empty()) {
                out.emplace(en_report);
                out->get() << "puzzle,expected,found,missing,extra,equal,partial\n";
            }
            int equal = 0, partial = 0;
            for (std::size_t g = 0; g < data.size(); ++g) {
                const auto cmp = enumerate_learned(net, data[g], tau, en_max);
                equal += cmp.equal;
                partial += cmp.partial;
                if (out)
                    out->get() << g << ',' << cmp.expected << ',' << cmp.found << ',' << cmp.missing.size() << ','
                               << cmp.extra.size() << ',' << (cmp.equal ? 1 : 0) << ',' << (cmp.partial ? 1 : 0) << '\n';
            }
            std::cout << json{{"tau", tau},
                              {"puzzles", data.size()},
                              {"equal", equal},
                              {"partial", partial},
                              {"equal_fraction", data.empty() ? 0.0 : static_cast<double>(equal) / data.size()}}
                             .dump()
                      << '\n';
        }
    } catch (const NonFiniteLoss& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
