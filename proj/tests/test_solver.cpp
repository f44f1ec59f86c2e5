#include <catch_amalgamated.hpp>

#include <set>

#include "cfnlearn/solver.hpp"
#include "cfnlearn/sudoku.hpp"
#include "oracles.hpp"

using namespace cfnlearn;
using Catch::Approx;

namespace {

CostFunctionNetwork four_variable_example() {
    auto net = CostFunctionNetwork::uniform(4, 2);
    const Cost T = net.top();
    net.set_pair(0, 1, {{T, 0}, {0, T}});
    net.set_pair(1, 2, {{T, T}, {T, 0}});
    net.set_pair(2, 3, {{T, 0}, {0, T}});
    return net;
}

std::vector<Assignment> assignments_of(const EnumerationResult& r) {
    std::vector<Assignment> out;
    for (const auto& s : r.solutions) out.push_back(s.first);
    return out;
}

} // namespace

TEST_CASE("solve on trivial networks") {
    const CostFunctionNetwork empty({3, 2, 2});
    const auto r = solve(empty);
    CHECK(r.best == Assignment{0, 0, 0});
    CHECK(r.best_cost == 0);
    CHECK(r.proven_optimal);
    CHECK(brute_force(empty).best == Assignment{0, 0, 0});

    CostFunctionNetwork dead({2, 2});
    const std::vector<Cost> all_top{dead.top(), dead.top()};
    dead.add_unary(1, all_top);
    CHECK(solve(dead).best_cost == dead.top());
    CHECK(brute_force(dead).best_cost == dead.top());
}

TEST_CASE("solve matches exhaustive search on random networks") {
    Rng rng(11);
    for (int t = 0; t < 150; ++t) {
        const int n = 1 + static_cast<int>(rng.below(8));
        const int d = 1 + static_cast<int>(rng.below(3));
        const auto net = oracle::random_net(rng, n, d, 0, 5, 0.1, rng.bernoulli(0.5), true);
        const auto want = oracle::exhaustive_min(net.domain_sizes(), [&](const Assignment& y) { return oracle::naive_cost(net, y); });
        for (auto order : {VariableOrder::StaticDegree, VariableOrder::MinDomain}) {
            SolverConfig cfg;
            cfg.variable_order = order;
            const auto got = solve(net, cfg);
            REQUIRE(got.proven_optimal);
            if (want.cost >= net.top()) {
                REQUIRE(got.best_cost == net.top());
            } else {
                REQUIRE(got.best_cost == Approx(want.cost).epsilon(1e-12));
                REQUIRE(evaluate(net, got.best) == got.best_cost);
            }
        }
        const auto bf = brute_force(net);
        REQUIRE(bf.best_cost == Approx(want.cost >= net.top() ? net.top() : want.cost).epsilon(1e-12));
        if (want.cost < net.top()) REQUIRE(bf.best == want.best);
    }
}

TEST_CASE("signed costs keep the bound admissible") {
    Rng rng(12);
    for (int t = 0; t < 60; ++t) {
        const auto net = oracle::random_net(rng, 6, 3, -3, 3, 0.05, true);
        const auto want = oracle::exhaustive_min(net.domain_sizes(), [&](const Assignment& y) { return oracle::naive_cost(net, y); });
        REQUIRE(solve(net).best_cost == Approx(want.cost).epsilon(1e-12));
    }
}

TEST_CASE("solution is no worse than any assignment") {
    Rng rng(13);
    const auto net = oracle::random_net(rng, 7, 3, 0, 5, 0.1);
    const auto r = solve(net);
    for (int s = 0; s < 200; ++s) CHECK(r.best_cost <= evaluate(net, oracle::random_assignment(rng, net)));
}

TEST_CASE("ties resolve to the lexicographically smallest assignment on hard networks") {
    // all solutions of the example cost 0; the smallest one must come back
    const auto net = four_variable_example();
    const auto sols = oracle::exhaustive_below(net, 0);
    REQUIRE_FALSE(sols.empty());
    CHECK(solve(net).best == sols.front());
    CHECK(brute_force(net).best == sols.front());
}

TEST_CASE("solve is deterministic and ignores explicit zero matrices") {
    Rng rng(14);
    for (int t = 0; t < 20; ++t) {
        const auto net = oracle::random_net(rng, 6, 3, 0, 4, 0.1);
        CHECK(solve(net) == solve(net));
        CostFunctionNetwork padded = net;
        CostFunctionNetwork bigger(net.domain_sizes());
        for (const auto& m : net.pairs())
            if (rng.bernoulli(0.7)) bigger.set_pair(m);
        CostFunctionNetwork with_zeros = bigger;
        for (int i = 0; i < net.size(); ++i)
            for (int j = i + 1; j < net.size(); ++j) with_zeros.pair(i, j);
        CHECK(solve(bigger).best_cost == solve(with_zeros).best_cost);
        CHECK(solve(bigger).best == solve(with_zeros).best);
    }
}

TEST_CASE("node limit stops the search") {
    Rng rng(15);
    const auto net = oracle::random_net(rng, 8, 3, 0, 5);
    SolverConfig cfg;
    cfg.node_limit = 3;
    const auto r = solve(net, cfg);
    CHECK_FALSE(r.proven_optimal);
    CHECK(r.nodes_expanded <= 3);
}

TEST_CASE("enumerate") {
    SECTION("single free binary variable") {
        const CostFunctionNetwork net({2});
        SolverConfig cfg;
        const auto r = enumerate(net, cfg);
        CHECK(assignments_of(r) == std::vector<Assignment>{{0}, {1}});
        CHECK_FALSE(r.truncated);
    }
    SECTION("four variable example at bound 0") {
        const auto net = four_variable_example();
        const auto r = enumerate(net, {});
        CHECK(assignments_of(r) == oracle::exhaustive_below(net, 0));
        for (const auto& y : assignments_of(r)) {
            CHECK(y[0] != y[1]);
            CHECK(y[1] + y[2] > 1);
            CHECK(y[2] != y[3]);
        }
    }
    SECTION("random networks under a bound") {
        Rng rng(16);
        for (int t = 0; t < 100; ++t) {
            const int n = 1 + static_cast<int>(rng.below(7));
            const auto net = oracle::random_net(rng, n, 3, 0, 3, 0.1, rng.bernoulli(0.5), true);
            SolverConfig cfg;
            cfg.enumeration_bound = rng.uniform(0, 3.0 * n);
            cfg.max_solutions = 100000;
            cfg.variable_order = rng.bernoulli(0.5) ? VariableOrder::MinDomain : VariableOrder::StaticDegree;
            const auto r = enumerate(net, cfg);
            const auto want = oracle::exhaustive_below(net, cfg.enumeration_bound);
            REQUIRE(assignments_of(r) == want);
            for (const auto& [y, c] : r.solutions) REQUIRE(c == Approx(oracle::naive_cost(net, y)).epsilon(1e-12));
        }
    }
    SECTION("bound equal to the optimum contains the solve result") {
        Rng rng(17);
        for (int t = 0; t < 30; ++t) {
            const auto net = oracle::random_net(rng, 5, 3, 0, 4, 0.1);
            const auto best = solve(net);
            if (best.best_cost >= net.top()) continue;
            SolverConfig cfg;
            cfg.enumeration_bound = best.best_cost;
            const auto sols = assignments_of(enumerate(net, cfg));
            CHECK(std::find(sols.begin(), sols.end(), best.best) != sols.end());
        }
    }
    SECTION("truncation flag") {
        const CostFunctionNetwork net({2, 2, 2});
        SolverConfig cfg;
        cfg.max_solutions = 5;
        const auto r = enumerate(net, cfg);
        CHECK(r.truncated);
        CHECK(r.solutions.size() == 5);
        CHECK(std::is_sorted(r.solutions.begin(), r.solutions.end()));
    }
}

TEST_CASE("brute force refuses huge spaces") {
    CHECK_THROWS_AS(brute_force(CostFunctionNetwork::uniform(30, 3)), StructuralError);
}

TEST_CASE("loss augmented minimisation") {
    Rng rng(18);
    SECTION("margin 0 is plain solve") {
        for (int t = 0; t < 20; ++t) {
            const auto net = oracle::random_net(rng, 6, 3, 0, 3, 0.1);
            const auto y = oracle::random_assignment(rng, net);
            CHECK(hinge_argmin(net, y, 0.0) == solve(net));
        }
    }
    SECTION("zero network drives every value away from y") {
        const auto net = CostFunctionNetwork::uniform(5, 3);
        const Assignment y(5, 0);
        const auto r = hinge_argmin(net, y, 1.0);
        CHECK(hamming(r.best, y) == 5);
        CHECK(r.best_cost == Approx(-5.0));
    }
    SECTION("matches exhaustive minimisation of cost minus scaled Hamming") {
        for (int t = 0; t < 30; ++t) {
            const auto net = oracle::random_net(rng, 6, 3, 0, 3, 0.05);
            const auto y = oracle::random_assignment(rng, net);
            const auto want = oracle::exhaustive_min(net.domain_sizes(), [&](const Assignment& a) {
                const Cost c = oracle::naive_cost(net, a);
                return c >= net.top() ? c : c - 0.5 * hamming(a, y);
            });
            const auto got = hinge_argmin(net, y, 0.5);
            REQUIRE(got.best_cost == Approx(want.cost).epsilon(1e-12));
        }
    }
    SECTION("negative margin rejected") {
        const CostFunctionNetwork net({2});
        CHECK_THROWS_AS(hinge_argmin(net, {0}, -1.0), StructuralError);
    }
}

TEST_CASE("sudoku rules conditioned on a unique puzzle give its solution") {
    Rng rng(19);
    for (int t = 0; t < 30; ++t) {
        const auto s = sudoku::generate(4, 4, rng, true);
        SolverConfig cfg;
        cfg.variable_order = VariableOrder::MinDomain;
        const auto r = solve(condition(sudoku::true_rules(4), s.evidence()), cfg);
        CHECK(r.best == s.solutions.front());
        CHECK(r.best_cost == 0);
        cfg.max_solutions = 2;
        CHECK(enumerate(condition(sudoku::true_rules(4), s.evidence()), cfg).solutions.size() == 1);
    }
}

TEST_CASE("9x9 rules with a sparse puzzle solve to the generating grid") {
    Rng rng(20);
    const auto s = sudoku::generate(9, 17, rng, true);
    SolverConfig cfg;
    cfg.variable_order = VariableOrder::MinDomain;
    const auto net = condition(sudoku::true_rules(9), s.evidence());
    const auto r = solve(net, cfg);
    REQUIRE(r.proven_optimal);
    CHECK(r.best == s.solutions.front());
    cfg.max_solutions = 2;
    CHECK(enumerate(net, cfg).solutions.size() == 1);
}
