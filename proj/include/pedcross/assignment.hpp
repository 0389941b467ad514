#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

namespace pedcross {

/// Result of a gated linear assignment between rows (tracks) and columns
/// (detections).
struct Assignment {
    std::vector<std::pair<int, int>> matches;  // (row, col), sorted by row
    std::vector<int> unmatched_rows;
    std::vector<int> unmatched_cols;
    double total_cost = 0.0;  // cost of the surviving matches
};

/// Minimum total cost of a maximum (size min(n, m)) one-to-one assignment.
/// Costs must be finite.
double min_assignment_cost(const Eigen::MatrixXd& cost);

/// Minimum-cost maximum assignment. Among equal-cost optima the result is the
/// one whose sorted (row, col) pair list is lexicographically smallest, so the
/// output is reproducible across runs and platforms.
std::vector<std::pair<int, int>> solve_assignment(const Eigen::MatrixXd& cost);

/// solve_assignment plus gating: any matched pair with cost > gate is dropped
/// after the solve and both sides are reported unmatched.
Assignment assign(const Eigen::MatrixXd& cost, double gate);

/// Same, with one gate per (row, col) pair.
Assignment assign_gated(const Eigen::MatrixXd& cost, const Eigen::MatrixXd& gates);

}  // namespace pedcross
