#include <catch_amalgamated.hpp>

#include <algorithm>
#include <set>
#include <sstream>

#include "cfnlearn/sudoku.hpp"

using namespace cfnlearn;
using namespace cfnlearn::sudoku;
using Catch::Approx;

namespace {

// Unit membership computed from coordinates, not from the library helpers.
bool peers(int size, int a, int b) {
    const int box = size == 4 ? 2 : 3;
    const int ra = a / size, ca = a % size, rb = b / size, cb = b % size;
    return a != b && (ra == rb || ca == cb || (ra / box == rb / box && ca / box == cb / box));
}

bool valid_grid(int size, const Assignment& g) {
    for (int a = 0; a < size * size; ++a)
        for (int b = a + 1; b < size * size; ++b)
            if (peers(size, a, b) && g[static_cast<std::size_t>(a)] == g[static_cast<std::size_t>(b)]) return false;
    return true;
}

// Counts 4x4 grids as stacks of row permutations.
std::size_t count_4x4_by_rows() {
    std::vector<std::vector<int>> perms;
    std::vector<int> p{0, 1, 2, 3};
    do perms.push_back(p);
    while (std::next_permutation(p.begin(), p.end()));
    std::size_t count = 0;
    for (const auto& r0 : perms)
        for (const auto& r1 : perms)
            for (const auto& r2 : perms)
                for (const auto& r3 : perms) {
                    Assignment g;
                    for (const auto* r : {&r0, &r1, &r2, &r3}) g.insert(g.end(), r->begin(), r->end());
                    count += valid_grid(4, g);
                }
    return count;
}

// Backtracking count of 4x4 assignments respecting the given "different"
// pairs, stopping once it passes cap.
std::size_t count_with_pairs(const std::vector<std::pair<int, int>>& pairs, std::size_t cap) {
    std::vector<std::vector<int>> earlier(16);
    for (auto [i, j] : pairs) earlier[static_cast<std::size_t>(std::max(i, j))].push_back(std::min(i, j));
    Assignment g(16, -1);
    std::size_t count = 0;
    auto rec = [&](auto&& self, int cell) -> void {
        if (count > cap) return;
        if (cell == 16) {
            ++count;
            return;
        }
        for (int v = 0; v < 4; ++v) {
            bool ok = true;
            for (int e : earlier[static_cast<std::size_t>(cell)]) ok = ok && g[static_cast<std::size_t>(e)] != v;
            if (!ok) continue;
            g[static_cast<std::size_t>(cell)] = v;
            self(self, cell + 1);
        }
        g[static_cast<std::size_t>(cell)] = -1;
    };
    rec(rec, 0);
    return count;
}

std::size_t lines_of(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

} // namespace

TEST_CASE("geometry") {
    CHECK(box_side(4) == 2);
    CHECK(box_side(9) == 3);
    CHECK_THROWS_AS(box_side(5), StructuralError);
    for (int size : {4, 9}) {
        const int n = size * size;
        int rule_pairs = 0;
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                REQUIRE(shares_unit(size, a, b) == peers(size, a, b));
                if (a < b) rule_pairs += peers(size, a, b);
            }
        // each cell has 3(size-1) - 2(box-1) peers
        const int box = size == 4 ? 2 : 3;
        CHECK(rule_pairs == n * (3 * (size - 1) - 2 * (box - 1)) / 2);
        CHECK(pair_list(size).size() == static_cast<std::size_t>(n * (n - 1) / 2));
    }
    CHECK(pair_list(4).size() == 120);
}

TEST_CASE("rule pair counts") {
    auto count = [](int size) {
        int c = 0;
        for (auto [i, j] : pair_list(size)) c += shares_unit(size, i, j);
        return c;
    };
    CHECK(count(4) == 56);
    CHECK(count(9) == 810);
}

TEST_CASE("pair features") {
    for (int size : {4, 9}) {
        const auto f = pair_features(size);
        CHECK(f.rows() == feature_dim(size));
        CHECK(f.cols() == static_cast<Eigen::Index>(pair_list(size).size()));
        std::set<std::vector<double>> distinct;
        for (Eigen::Index c = 0; c < f.cols(); ++c) {
            REQUIRE(f.col(c).sum() == 6.0);
            distinct.insert(std::vector<double>(f.col(c).data(), f.col(c).data() + f.rows()));
        }
        CHECK(distinct.size() == static_cast<std::size_t>(f.cols()));
    }
    CHECK(feature_dim(4) == 24);
    CHECK(feature_dim(9) == 54);
    // pair (0, 5) in 4x4: cells (r0,c0,b0) and (r1,c1,b0)
    const auto f = pair_features(4);
    const auto pairs = pair_list(4);
    const auto idx = static_cast<Eigen::Index>(std::find(pairs.begin(), pairs.end(), std::pair{0, 5}) - pairs.begin());
    std::vector<int> hot;
    for (int r = 0; r < 24; ++r)
        if (f(r, idx) == 1.0) hot.push_back(r);
    CHECK(hot == std::vector<int>{0, 4, 8, 12 + 1, 12 + 4 + 1, 12 + 8 + 0});
}

TEST_CASE("true rules") {
    Rng rng(31);
    for (int size : {4, 9}) {
        const auto rules = true_rules(size);
        for (int t = 0; t < 20; ++t) {
            const auto g = random_solution(size, rng);
            REQUIRE(valid_grid(size, g));
            REQUIRE(is_valid_solution(size, g));
            REQUIRE(evaluate(rules, g) == 0.0);
            // copy a peer's value into a cell
            auto bad = g;
            const int a = static_cast<int>(rng.below(static_cast<std::uint64_t>(size * size)));
            int b = a;
            while (!peers(size, a, b)) b = static_cast<int>(rng.below(static_cast<std::uint64_t>(size * size)));
            bad[static_cast<std::size_t>(a)] = bad[static_cast<std::size_t>(b)];
            REQUIRE(evaluate(rules, bad) == rules.top());
            REQUIRE_FALSE(is_valid_solution(size, bad));
        }
    }
    CHECK_FALSE(is_valid_solution(4, Assignment(15, 0)));
    CHECK_FALSE(is_valid_solution(4, Assignment(16, 7)));
}

TEST_CASE("there are 288 4x4 grids") {
    const std::size_t oracle = count_4x4_by_rows();
    CHECK(oracle == 288);
    CHECK(count_grids(true_rules(4), 1000) == oracle);
    CHECK(kGrids4x4 == oracle);
    CHECK(solutions_of(4, std::vector<int>(16, -1), 1000).solutions.size() == oracle);
}

TEST_CASE("csv datasets") {
    SECTION("header, blanks and grouping") {
        std::istringstream in("quizzes,solutions\n"
                              "1..4....2..3....,1234341221434321\n"
                              "\n"
                              "1234000000000000,1234341221434321\n"
                              "1234000000000000,1234341223414123\n");
        const auto d = parse_dataset(in);
        REQUIRE(d.size() == 2);
        CHECK(d[0].size == 4);
        CHECK(d[0].hint_count() == 4);
        CHECK(d[0].hints[0] == 0);
        CHECK(d[0].hints[1] == -1);
        CHECK(d[0].hints[3] == 3);
        CHECK(d[1].solutions.size() == 2);
        CHECK(d[1].evidence() == Evidence{{0, 0}, {1, 1}, {2, 2}, {3, 3}});
    }
    SECTION("errors carry the line number") {
        auto fails = [](const std::string& text) {
            std::istringstream in(text);
            try {
                parse_dataset(in);
            } catch (const ParseError& e) {
                return std::string(e.what());
            }
            return std::string();
        };
        CHECK_THAT(fails("1234341221434321\n"), Catch::Matchers::ContainsSubstring("line 1"));
        CHECK_FALSE(fails("123,123\n").empty());                               // not a square grid
        CHECK_FALSE(fails("1234000000000000,123434122143432\n").empty());      // length mismatch
        CHECK_FALSE(fails("2000000000000000,1234341221434321\n").empty());     // contradicts hint
        CHECK_FALSE(fails("0000000000000000,1111111111111111\n").empty());     // invalid grid
        CHECK_THAT(fails("0000000000000000,1234341221434321\nx000000000000000,1234341221434321\n"), Catch::Matchers::ContainsSubstring("invalid digit"));
        CHECK_THAT(fails("0000000000000000,1234341221434321\n0000000000000000,123434122143432x\n"),
                   Catch::Matchers::ContainsSubstring("line 2"));
        CHECK_FALSE(fails("0000000000000000,1234341221434321\n5000000000000000,1234341221434321\n").empty());
    }
    SECTION("round trip") {
        Rng rng(32);
        std::vector<SudokuSample> samples;
        GenerateOptions opt;
        opt.min_solutions = 1;
        opt.max_solutions = 6;
        opt.store_solutions = 4;
        while (samples.size() < 500) samples.push_back(generate(4, 4 + static_cast<int>(rng.below(6)), rng, false, opt));
        std::ostringstream out;
        write_dataset(out, samples);
        std::istringstream in(out.str());
        const auto back = parse_dataset(in);
        // consecutive duplicates of the same puzzle would merge; the generator
        // does not produce any here
        REQUIRE(back.size() == samples.size());
        CHECK(back == samples);

        const std::string path = "test_sudoku_roundtrip.csv";
        save_dataset(samples, path);
        CHECK(load_dataset(path) == samples);
        std::remove(path.c_str());
        CHECK_THROWS_AS(load_dataset("no_such_dataset.csv"), ParseError);
    }
}

TEST_CASE("generation") {
    Rng rng(33);
    SECTION("unique puzzles") {
        for (int t = 0; t < 40; ++t) {
            const int target = 4 + static_cast<int>(rng.below(6));
            const auto s = generate(4, target, rng, true);
            REQUIRE(s.solutions.size() == 1);
            REQUIRE(s.hint_count() >= target);
            REQUIRE(valid_grid(4, s.solutions[0]));
            for (std::size_t c = 0; c < 16; ++c)
                if (s.hints[c] >= 0) REQUIRE(s.hints[c] == s.solutions[0][c]);
            REQUIRE(solutions_of(4, s.hints, 5).solutions.size() == 1);
        }
        CHECK_THROWS_AS(generate(4, 3, rng, true), StructuralError);
        CHECK_THROWS_AS(generate(4, 17, rng, true), StructuralError);
    }
    SECTION("multi-solution puzzles") {
        GenerateOptions opt;
        opt.min_solutions = 2;
        opt.max_solutions = 6;
        opt.store_solutions = 5;
        for (int t = 0; t < 40; ++t) {
            const auto s = generate(4, 5, rng, false, opt);
            const auto all = solutions_of(4, s.hints, 100).solutions;
            REQUIRE(all.size() >= 2);
            REQUIRE(all.size() <= 6);
            REQUIRE(s.solutions.size() == std::min<std::size_t>(all.size(), 5));
            for (const auto& y : s.solutions) {
                REQUIRE(valid_grid(4, y));
                for (std::size_t c = 0; c < 16; ++c)
                    if (s.hints[c] >= 0) REQUIRE(s.hints[c] == y[c]);
            }
        }
    }
    SECTION("full and empty grids") {
        const auto full = generate(4, 16, rng, true);
        CHECK(full.hint_count() == 16);
        CHECK(full.hints == std::vector<int>(full.solutions[0].begin(), full.solutions[0].end()));
        GenerateOptions opt;
        opt.max_solutions = 0;
        const auto empty = generate(4, 0, rng, false, opt);
        CHECK(empty.hint_count() == 0);
        CHECK(empty.solutions.size() == 288);
    }
    SECTION("max_hints_accepted filters local minima") {
        GenerateOptions opt;
        opt.max_hints_accepted = 5;
        for (int t = 0; t < 10; ++t) CHECK(generate(4, 4, rng, true, opt).hint_count() <= 5);
    }
    SECTION("datasets are reproducible") {
        Rng a(5), b(5);
        CHECK(generate_dataset(4, 20, 4, 8, a, true) == generate_dataset(4, 20, 4, 8, b, true));
        CHECK_THROWS_AS(generate_dataset(4, 1, 8, 4, a, true), StructuralError);
    }
}

TEST_CASE("rule analysis") {
    SECTION("hard rules") {
        const auto r = analyze_rules(true_rules(4), 4);
        CHECK(r.pairs.size() == 120);
        CHECK(r.recovered == 56);
        CHECK(r.spurious == 0);
        CHECK(r.zero == 64);
        CHECK(r.other == 0);
        CHECK(r.unconstrained_nonzero == 0);
        CHECK(r.max_free_diag == 0.0);
    }
    SECTION("soft rules with finite diagonals") {
        auto net = CostFunctionNetwork::uniform(16, 4);
        for (auto [i, j] : pair_list(4)) {
            if (!peers(4, i, j)) continue;
            auto& m = net.pair(i, j);
            for (int v = 0; v < 4; ++v) m(v, v) = 3.0 + 0.01 * v;
        }
        const auto r = analyze_rules(net, 4);
        CHECK(r.recovered == 56);
        CHECK(r.min_rule_diag == Approx(3.0));
        CHECK(r.separation() == Approx(3.0));
        // off-diagonal noise above tau_off demotes a pair
        net.pair(0, 1)(0, 1) = 0.2;
        CHECK(analyze_rules(net, 4).recovered == 55);
        CHECK(analyze_rules(net, 4).other == 1);
        // a spurious difference pair among free cells
        const int free_j = 6; // (0,6): row 0 vs row 1, different boxes
        REQUIRE_FALSE(peers(4, 0, free_j));
        for (int v = 0; v < 4; ++v) net.pair(0, free_j)(v, v) = 2.0;
        const auto r2 = analyze_rules(net, 4);
        CHECK(r2.spurious == 1);
        CHECK(r2.max_free_diag == Approx(2.0));
    }
    SECTION("zero network") {
        const auto r = analyze_rules(CostFunctionNetwork::uniform(16, 4), 4);
        CHECK(r.zero == 120);
        CHECK(r.recovered == 0);
        CHECK(r.separation() == 0.0);
        CHECK_THROWS_AS(analyze_rules(CostFunctionNetwork::uniform(15, 4), 4), StructuralError);
    }
    SECTION("csv reports") {
        const auto r = analyze_rules(true_rules(4), 4);
        std::ostringstream rules, hist;
        write_rule_csv(rules, r);
        write_histogram_csv(hist, r, 10);
        CHECK(lines_of(rules.str()) == 121);
        CHECK(rules.str().starts_with("pair_i,pair_j,class,min_diag,max_offdiag\n0,1,difference,"));
        CHECK(lines_of(hist.str()) == 11);
        std::istringstream in(hist.str());
        std::string line;
        std::getline(in, line);
        CHECK(line == "bin_lo,bin_hi,constrained,unconstrained");
        int rule = 0, free = 0;
        while (std::getline(in, line)) {
            std::istringstream ls(line);
            std::string lo, hi, a, b;
            std::getline(ls, lo, ',');
            std::getline(ls, hi, ',');
            std::getline(ls, a, ',');
            std::getline(ls, b, ',');
            rule += std::stoi(a);
            free += std::stoi(b);
        }
        CHECK(rule == 56);
        CHECK(free == 64);
        const auto j = rule_summary(r);
        CHECK(j["recovered"] == 56);
        CHECK(j["rule_pairs"] == 56);
    }
}

TEST_CASE("irredundant rule set") {
    const auto kept = irredundant_rules_4x4();
    CHECK(kept.size() == 40);
    for (auto [i, j] : kept) REQUIRE(peers(4, i, j));
    CHECK(count_with_pairs(kept, 288) == 288);
    CHECK(defines_rules_4x4(kept));
    // every kept pair is needed
    for (std::size_t k = 0; k < kept.size(); ++k) {
        auto trial = kept;
        trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(k));
        REQUIRE(count_with_pairs(trial, 288) > 288);
    }
    std::vector<std::pair<int, int>> all;
    for (auto [i, j] : pair_list(4))
        if (peers(4, i, j)) all.push_back({i, j});
    CHECK(count_with_pairs(all, 288) == 288);
}
