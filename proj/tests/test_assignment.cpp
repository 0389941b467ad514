#include <doctest.h>

#include <set>

#include "oracles.hpp"
#include "pedcross/assignment.hpp"
#include "pedcross/rng.hpp"

using namespace pedcross;

namespace {

// Costs on a 1/16 lattice make permutation sums exact in double, so oracle
// comparisons are exact equality.
Eigen::MatrixXd lattice_matrix(Rng& rng, int rows, int cols, int levels = 64) {
    Eigen::MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            m(r, c) = static_cast<double>(rng.bounded(static_cast<std::uint64_t>(levels))) / 16.0;
        }
    }
    return m;
}

}  // namespace

TEST_CASE("two by two examples") {
    Eigen::MatrixXd a(2, 2);
    a << 1, 2, 2, 1;
    Assignment r = assign(a, 10.0);
    CHECK(r.matches == std::vector<std::pair<int, int>>{{0, 0}, {1, 1}});
    CHECK(r.total_cost == doctest::Approx(2.0));

    Eigen::MatrixXd b(2, 2);
    b << 2, 1, 1, 2;
    Assignment rb = assign(b, 10.0);
    CHECK(rb.matches == std::vector<std::pair<int, int>>{{0, 1}, {1, 0}});
    CHECK(rb.total_cost == doctest::Approx(2.0));
}

TEST_CASE("total cost equals brute force on random matrices") {
    Rng rng(321);
    for (int trial = 0; trial < 200; ++trial) {
        const int rows = 1 + static_cast<int>(rng.bounded(6));
        const int cols = 1 + static_cast<int>(rng.bounded(6));
        Eigen::MatrixXd cost = lattice_matrix(rng, rows, cols);
        auto oracle = test_oracles::brute_force_assignment(cost);

        double total = 0.0;
        auto pairs = solve_assignment(cost);
        for (auto [r, c] : pairs) total += cost(r, c);
        CHECK(pairs.size() == static_cast<std::size_t>(std::min(rows, cols)));
        CHECK(total == oracle.best_cost);
        CHECK(min_assignment_cost(cost) == oracle.best_cost);
    }
}

TEST_CASE("rectangular 6x4 matches the oracle") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::MatrixXd cost = lattice_matrix(rng, 6, 4);
        auto oracle = test_oracles::brute_force_assignment(cost);
        double total = 0.0;
        for (auto [r, c] : solve_assignment(cost)) total += cost(r, c);
        CHECK(total == oracle.best_cost);
    }
}

TEST_CASE("ties resolve to the lexicographically smallest optimal pairing") {
    Rng rng(55);
    for (int trial = 0; trial < 120; ++trial) {
        const int rows = 1 + static_cast<int>(rng.bounded(4));
        const int cols = 1 + static_cast<int>(rng.bounded(4));
        // Few distinct cost levels force frequent ties.
        Eigen::MatrixXd cost = lattice_matrix(rng, rows, cols, 3);
        auto oracle = test_oracles::brute_force_assignment(cost);
        CHECK(solve_assignment(cost) == test_oracles::lexicographically_smallest(oracle));
    }
}

TEST_CASE("assignment is one-to-one") {
    Rng rng(77);
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::MatrixXd cost = lattice_matrix(rng, 5, 5);
        std::set<int> rows_seen, cols_seen;
        for (auto [r, c] : solve_assignment(cost)) {
            CHECK(rows_seen.insert(r).second);
            CHECK(cols_seen.insert(c).second);
        }
    }
}

TEST_CASE("gate removes expensive pairs post hoc") {
    Eigen::MatrixXd cost(2, 2);
    cost << 0.1, 5.0, 5.0, 3.0;
    Assignment r = assign(cost, 1.0);
    CHECK(r.matches == std::vector<std::pair<int, int>>{{0, 0}});
    CHECK(r.unmatched_rows == std::vector<int>{1});
    CHECK(r.unmatched_cols == std::vector<int>{1});
    CHECK(r.total_cost == doctest::Approx(0.1));
}

TEST_CASE("per-pair gates") {
    Eigen::MatrixXd cost(2, 2);
    cost << 0.5, 2.0, 2.0, 0.5;
    Eigen::MatrixXd gates(2, 2);
    gates << 0.2, 3.0, 3.0, 0.6;  // (0,0) fails its own gate
    Assignment r = assign_gated(cost, gates);
    CHECK(r.matches == std::vector<std::pair<int, int>>{{1, 1}});
    CHECK(r.unmatched_rows == std::vector<int>{0});
    CHECK(r.unmatched_cols == std::vector<int>{0});
}

TEST_CASE("empty matrices") {
    Eigen::MatrixXd empty(0, 3);
    Assignment r = assign(empty, 1.0);
    CHECK(r.matches.empty());
    CHECK(r.unmatched_cols == std::vector<int>{0, 1, 2});
}
