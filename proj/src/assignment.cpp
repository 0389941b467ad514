#include "pedcross/assignment.hpp"

#include <algorithm>
#include <limits>

namespace pedcross {

namespace {

// Potential-based Hungarian method, O(n^2 m) with n <= m.
// Returns the minimum total cost of a size-n matching; fills row_to_col if
// requested. Costs must be finite.
double hungarian_min_cost(const Eigen::MatrixXd& a, std::vector<int>* row_to_col) {
    const int n = static_cast<int>(a.rows());
    const int m = static_cast<int>(a.cols());
    if (row_to_col) row_to_col->assign(static_cast<std::size_t>(n), -1);
    if (n == 0 || m == 0) return 0.0;

    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<double> v(static_cast<std::size_t>(m) + 1, 0.0);
    std::vector<int> p(static_cast<std::size_t>(m) + 1, 0);    // column -> row (1-based)
    std::vector<int> way(static_cast<std::size_t>(m) + 1, 0);

    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(static_cast<std::size_t>(m) + 1, inf);
        std::vector<char> used(static_cast<std::size_t>(m) + 1, 0);
        do {
            used[static_cast<std::size_t>(j0)] = 1;
            int i0 = p[static_cast<std::size_t>(j0)];
            int j1 = -1;
            double delta = inf;
            for (int j = 1; j <= m; ++j) {
                if (used[static_cast<std::size_t>(j)]) continue;
                double cur = a(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] -
                             v[static_cast<std::size_t>(j)];
                if (cur < minv[static_cast<std::size_t>(j)]) {
                    minv[static_cast<std::size_t>(j)] = cur;
                    way[static_cast<std::size_t>(j)] = j0;
                }
                if (minv[static_cast<std::size_t>(j)] < delta) {
                    delta = minv[static_cast<std::size_t>(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= m; ++j) {
                if (used[static_cast<std::size_t>(j)]) {
                    u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
                    v[static_cast<std::size_t>(j)] -= delta;
                } else {
                    minv[static_cast<std::size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (p[static_cast<std::size_t>(j0)] != 0);
        do {
            int j1 = way[static_cast<std::size_t>(j0)];
            p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
            j0 = j1;
        } while (j0 != 0);
    }

    double total = 0.0;
    for (int j = 1; j <= m; ++j) {
        int row = p[static_cast<std::size_t>(j)];
        if (row == 0) continue;
        total += a(row - 1, j - 1);
        if (row_to_col) (*row_to_col)[static_cast<std::size_t>(row) - 1] = j - 1;
    }
    return total;
}

double min_cost_any_shape(const Eigen::MatrixXd& cost) {
    if (cost.rows() <= cost.cols()) return hungarian_min_cost(cost, nullptr);
    Eigen::MatrixXd t = cost.transpose();
    return hungarian_min_cost(t, nullptr);
}

Eigen::MatrixXd submatrix(const Eigen::MatrixXd& cost, int first_row,
                          const std::vector<int>& cols) {
    Eigen::MatrixXd sub(cost.rows() - first_row, static_cast<Eigen::Index>(cols.size()));
    for (Eigen::Index r = 0; r < sub.rows(); ++r) {
        for (std::size_t c = 0; c < cols.size(); ++c) {
            sub(r, static_cast<Eigen::Index>(c)) = cost(first_row + r, cols[c]);
        }
    }
    return sub;
}

}  // namespace

double min_assignment_cost(const Eigen::MatrixXd& cost) {
    return min_cost_any_shape(cost);
}

std::vector<std::pair<int, int>> solve_assignment(const Eigen::MatrixXd& cost) {
    const int n = static_cast<int>(cost.rows());
    const int m = static_cast<int>(cost.cols());
    std::vector<std::pair<int, int>> matches;
    if (n == 0 || m == 0) return matches;

    // Fix rows in ascending order: for each row pick the smallest column (or
    // skip, when more rows than columns remain) that still completes to an
    // optimal maximum matching. This yields the lexicographically smallest
    // optimal pairing.
    std::vector<int> cols(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) cols[static_cast<std::size_t>(j)] = j;

    for (int i = 0; i < n && !cols.empty(); ++i) {
        const int rows_left = n - i;
        const bool may_skip = rows_left - 1 >= static_cast<int>(cols.size());

        double best_val = std::numeric_limits<double>::infinity();
        std::size_t best_idx = 0;
        for (std::size_t idx = 0; idx < cols.size(); ++idx) {
            std::vector<int> rest = cols;
            rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(idx));
            double val = cost(i, cols[idx]) + min_cost_any_shape(submatrix(cost, i + 1, rest));
            if (val < best_val) {
                best_val = val;
                best_idx = idx;
            }
        }
        if (may_skip) {
            double skip_val = min_cost_any_shape(submatrix(cost, i + 1, cols));
            if (skip_val < best_val) continue;  // tie prefers matching the row
        }
        matches.emplace_back(i, cols[best_idx]);
        cols.erase(cols.begin() + static_cast<std::ptrdiff_t>(best_idx));
    }
    return matches;
}

Assignment assign(const Eigen::MatrixXd& cost, double gate) {
    Eigen::MatrixXd gates = Eigen::MatrixXd::Constant(cost.rows(), cost.cols(), gate);
    return assign_gated(cost, gates);
}

Assignment assign_gated(const Eigen::MatrixXd& cost, const Eigen::MatrixXd& gates) {
    Assignment out;
    auto pairs = solve_assignment(cost);
    std::vector<char> row_matched(static_cast<std::size_t>(cost.rows()), 0);
    std::vector<char> col_matched(static_cast<std::size_t>(cost.cols()), 0);
    for (auto [r, c] : pairs) {
        if (cost(r, c) > gates(r, c)) continue;  // gated out post-hoc
        out.matches.emplace_back(r, c);
        out.total_cost += cost(r, c);
        row_matched[static_cast<std::size_t>(r)] = 1;
        col_matched[static_cast<std::size_t>(c)] = 1;
    }
    for (int r = 0; r < cost.rows(); ++r) {
        if (!row_matched[static_cast<std::size_t>(r)]) out.unmatched_rows.push_back(r);
    }
    for (int c = 0; c < cost.cols(); ++c) {
        if (!col_matched[static_cast<std::size_t>(c)]) out.unmatched_cols.push_back(c);
    }
    return out;
}

}  // namespace pedcross
