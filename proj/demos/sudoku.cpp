// Generates a 4x4 puzzle, solves it with the hand-written rules and lists the
// completions of a puzzle with several solutions.

#include <iostream>

#include "cfnlearn/sudoku.hpp"

using namespace cfnlearn;

namespace {

void print_grid(const std::vector<int>& cells) {
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) {
            const int v = cells[static_cast<std::size_t>(4 * r + c)];
            std::cout << (v < 0 ? '.' : static_cast<char>('1' + v)) << (c == 1 ? " | " : " ");
        }
        std::cout << '\n' << (r == 1 ? "----+----\n" : "");
    }
}

} // namespace

int main() {
    Rng rng(2024);
    const auto puzzle = sudoku::generate(4, 4, rng, true);
    std::cout << "puzzle with " << puzzle.hint_count() << " hints:\n";
    print_grid(puzzle.hints);

    SolverConfig cfg;
    cfg.variable_order = VariableOrder::MinDomain;
    const auto r = solve(condition(sudoku::true_rules(4), puzzle.evidence()), cfg);
    std::cout << "\nsolution (cost " << r.best_cost << ", " << r.nodes_expanded << " nodes):\n";
    print_grid({r.best.begin(), r.best.end()});

    sudoku::GenerateOptions opt;
    opt.min_solutions = 2;
    opt.max_solutions = 4;
    const auto open = sudoku::generate(4, 6, rng, false, opt);
    std::cout << "\npuzzle with " << open.solutions.size() << " solutions:\n";
    print_grid(open.hints);
    for (const auto& s : open.solutions) std::cout << "  " << sudoku::grid_to_string({s.begin(), s.end()}) << '\n';
}
