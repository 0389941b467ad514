#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pedcross/label.hpp"

namespace pedcross {

// Row-major so a sample row is contiguous in memory.
using FeatureMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct TreeNode {
    int feature = -1;        // -1 marks a leaf
    float threshold = 0.0f;  // x[feature] <= threshold goes left
    int left = -1;
    int right = -1;
    std::uint32_t count_nc = 0;  // leaf training counts
    std::uint32_t count_c = 0;

    bool is_leaf() const { return feature < 0; }
    bool operator==(const TreeNode&) const = default;
};

struct DecisionTree {
    std::vector<TreeNode> nodes;  // preorder, root at 0

    /// Fraction of class C at the leaf reached by x.
    double leaf_fraction(std::span<const float> x) const;
    int depth() const;
    bool operator==(const DecisionTree&) const = default;
};

struct ForestModel {
    int n_trees = 0;
    int max_depth = 0;
    int feature_dim = 0;
    std::uint64_t seed = 0;
    std::vector<DecisionTree> trees;

    bool operator==(const ForestModel&) const = default;
};

struct TrainOptions {
    int workers = 1;
    bool out_of_bag = false;
    // Optional stable id per row (a permutation of 0..n-1). Bootstrap draws
    // are made in id space, so permuting the rows together with this map
    // reproduces the same forest.
    std::vector<int> stable_ids;
};

struct TrainResult {
    ForestModel model;
    std::optional<double> oob_accuracy;
};

/// Grow a forest of bagged Gini trees: each tree sees a bootstrap sample of
/// the rows and sqrt(d) candidate features per split, splits only on a strict
/// impurity decrease, and stops at purity, max_depth, or node size < 2.
/// Deterministic given the seed, independent of worker count.
TrainResult train_forest(const FeatureMatrix& x, std::span<const CrossLabel> y, int n_trees,
                         int max_depth, std::uint64_t seed, const TrainOptions& options = {});

/// Mean over trees of the reached leaf's class-C fraction, in [0, 1].
double predict_proba(const ForestModel& model, std::span<const float> x);

/// C iff predict_proba strictly exceeds the threshold.
CrossLabel classify(const ForestModel& model, std::span<const float> x, double threshold = 0.5);

std::string serialize_forest(const ForestModel& model);
ForestModel deserialize_forest(const std::string& text);
void save_forest(const std::filesystem::path& path, const ForestModel& model);
ForestModel load_forest(const std::filesystem::path& path);

struct GridSpec {
    std::vector<int> tree_counts = {100, 200, 300, 400, 500};
    std::vector<int> depths = {7, 15, 21, 30};
    int folds = 5;
};

struct GridSearchEntry {
    int n_trees = 0;
    int max_depth = 0;
    double mean_accuracy = 0.0;
};

struct GridSearchResult {
    int best_n_trees = 0;
    int best_max_depth = 0;
    std::vector<GridSearchEntry> table;  // one row per config, grid order
};

/// Stratified k-fold cross validation over the full tree-count x depth grid.
/// Best config by mean fold accuracy; ties prefer fewer trees, then smaller
/// depth.
GridSearchResult grid_search_cv(const FeatureMatrix& x, std::span<const CrossLabel> y,
                                const GridSpec& grid, std::uint64_t seed, int workers = 1);

/// Stratified fold ids (0..folds-1) per row; per class the fold sizes differ
/// by at most one.
std::vector<int> stratified_folds(std::span<const CrossLabel> y, int folds, std::uint64_t seed);

}  // namespace pedcross
