#pragma once

// Test-only brute-force oracles, kept independent of the library
// implementations they check.

#include <Eigen/Dense>
#include <limits>
#include <utility>
#include <vector>

namespace test_oracles {

struct BruteForceAssignment {
    double best_cost = std::numeric_limits<double>::infinity();
    // Every optimal maximum matching, each sorted by row index.
    std::vector<std::vector<std::pair<int, int>>> optima;
};

inline void brute_force_recurse(const Eigen::MatrixXd& cost, int row, int matched,
                                std::vector<char>& used_col,
                                std::vector<std::pair<int, int>>& current, double so_far,
                                BruteForceAssignment& out) {
    const int n = static_cast<int>(cost.rows());
    const int m = static_cast<int>(cost.cols());
    const int target = std::min(n, m);
    if (row == n) {
        if (matched != target) return;
        if (so_far < out.best_cost) {
            out.best_cost = so_far;
            out.optima.clear();
        }
        if (so_far == out.best_cost) out.optima.push_back(current);
        return;
    }
    // Skip this row if enough rows remain to reach a maximum matching.
    if (n - row - 1 >= target - matched) {
        brute_force_recurse(cost, row + 1, matched, used_col, current, so_far, out);
    }
    for (int c = 0; c < m; ++c) {
        if (used_col[static_cast<std::size_t>(c)]) continue;
        used_col[static_cast<std::size_t>(c)] = 1;
        current.emplace_back(row, c);
        brute_force_recurse(cost, row + 1, matched + 1, used_col, current, so_far + cost(row, c),
                            out);
        current.pop_back();
        used_col[static_cast<std::size_t>(c)] = 0;
    }
}

inline BruteForceAssignment brute_force_assignment(const Eigen::MatrixXd& cost) {
    BruteForceAssignment out;
    std::vector<char> used_col(static_cast<std::size_t>(cost.cols()), 0);
    std::vector<std::pair<int, int>> current;
    brute_force_recurse(cost, 0, 0, used_col, current, 0.0, out);
    return out;
}

inline std::vector<std::pair<int, int>> lexicographically_smallest(
    const BruteForceAssignment& result) {
    std::vector<std::pair<int, int>> best;
    for (const auto& candidate : result.optima) {
        if (best.empty() || candidate < best) best = candidate;
    }
    return best;
}

}  // namespace test_oracles
