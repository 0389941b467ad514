#include <doctest.h>

#include <cmath>

#include "pedcross/random_forest.hpp"
#include "pedcross/rng.hpp"

using namespace pedcross;

namespace {

// Two Gaussian blobs, separable by construction.
void make_blobs(Rng& rng, int n_per_class, double separation, FeatureMatrix& x,
                std::vector<CrossLabel>& y) {
    x.resize(2 * n_per_class, 2);
    y.clear();
    for (int i = 0; i < 2 * n_per_class; ++i) {
        const bool is_c = i % 2 == 1;
        const double cx = is_c ? separation : 0.0;
        x(i, 0) = static_cast<float>(rng.gaussian(cx, 0.5));
        x(i, 1) = static_cast<float>(rng.gaussian(is_c ? separation : 0.0, 0.5));
        y.push_back(is_c ? CrossLabel::C : CrossLabel::NC);
    }
}

std::vector<float> row_of(const FeatureMatrix& x, Eigen::Index r) {
    std::vector<float> out(static_cast<std::size_t>(x.cols()));
    for (Eigen::Index c = 0; c < x.cols(); ++c) out[static_cast<std::size_t>(c)] = x(r, c);
    return out;
}

}  // namespace

TEST_CASE("separable blobs reach perfect training accuracy") {
    Rng rng(1);
    FeatureMatrix x;
    std::vector<CrossLabel> y;
    make_blobs(rng, 100, 8.0, x, y);
    TrainResult r = train_forest(x, y, 50, 10, 7);
    int correct = 0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        if (classify(r.model, row_of(x, i)) == y[static_cast<std::size_t>(i)]) ++correct;
    }
    CHECK(correct == x.rows());
}

TEST_CASE("training is deterministic given the seed") {
    Rng rng(2);
    FeatureMatrix x;
    std::vector<CrossLabel> y;
    make_blobs(rng, 60, 3.0, x, y);
    TrainResult a = train_forest(x, y, 20, 8, 99);
    TrainResult b = train_forest(x, y, 20, 8, 99);
    CHECK(serialize_forest(a.model) == serialize_forest(b.model));

    TrainResult c = train_forest(x, y, 20, 8, 100);
    CHECK(serialize_forest(a.model) != serialize_forest(c.model));
}

TEST_CASE("training is independent of worker count") {
    Rng rng(3);
    FeatureMatrix x;
    std::vector<CrossLabel> y;
    make_blobs(rng, 60, 3.0, x, y);
    TrainOptions serial;
    serial.workers = 1;
    TrainOptions parallel;
    parallel.workers = 8;
    CHECK(serialize_forest(train_forest(x, y, 30, 8, 5, serial).model) ==
          serialize_forest(train_forest(x, y, 30, 8, 5, parallel).model));
}

TEST_CASE("single-class and empty input are rejected") {
    FeatureMatrix x(4, 2);
    x.setZero();
    std::vector<CrossLabel> y(4, CrossLabel::C);
    CHECK_THROWS_AS(train_forest(x, y, 10, 5, 1), SingleClassTraining);

    FeatureMatrix empty(0, 2);
    std::vector<CrossLabel> no_labels;
    CHECK_THROWS_AS(train_forest(empty, no_labels, 10, 5, 1), EmptyData);
}

TEST_CASE("hand-built stump probabilities") {
    // Single depth-1 stump on x0 <= 0.5 trained from {(0, NC), (1, C)}.
    ForestModel model;
    model.n_trees = 1;
    model.max_depth = 1;
    model.feature_dim = 1;
    DecisionTree tree;
    tree.nodes.push_back({0, 0.5f, 1, 2, 0, 0});
    tree.nodes.push_back({-1, 0.0f, -1, -1, 1, 0});  // left: pure NC
    tree.nodes.push_back({-1, 0.0f, -1, -1, 0, 1});  // right: pure C
    model.trees.push_back(tree);

    std::vector<float> low = {0.2f};
    std::vector<float> high = {0.9f};
    CHECK(predict_proba(model, low) == doctest::Approx(0.0));
    CHECK(predict_proba(model, high) == doctest::Approx(1.0));
    CHECK(classify(model, high) == CrossLabel::C);
    CHECK(classify(model, low) == CrossLabel::NC);
}

TEST_CASE("probability averages tree votes and thresholds strictly") {
    ForestModel model;
    model.n_trees = 2;
    model.max_depth = 1;
    model.feature_dim = 1;
    DecisionTree votes_c;
    votes_c.nodes.push_back({-1, 0.0f, -1, -1, 0, 10});
    DecisionTree votes_nc;
    votes_nc.nodes.push_back({-1, 0.0f, -1, -1, 10, 0});
    model.trees = {votes_c, votes_nc};

    std::vector<float> x = {0.0f};
    CHECK(predict_proba(model, x) == doctest::Approx(0.5));
    // p == threshold is NC by the strict comparison.
    CHECK(classify(model, x, 0.5) == CrossLabel::NC);
    CHECK(classify(model, x, 0.49) == CrossLabel::C);
    CHECK(classify(model, x, 0.9) == CrossLabel::NC);

    model.trees = {votes_c, votes_c};
    CHECK(predict_proba(model, x) == doctest::Approx(1.0));

    std::vector<float> wrong_dim = {0.0f, 1.0f};
    CHECK_THROWS_AS(predict_proba(model, wrong_dim), DimensionMismatch);
}

TEST_CASE("probabilities stay in [0,1] on random inputs") {
    Rng rng(4);
    FeatureMatrix x;
    std::vector<CrossLabel> y;
    make_blobs(rng, 80, 1.0, x, y);  // overlapping blobs
    TrainResult r = train_forest(x, y, 25, 6, 3);
    for (int i = 0; i < 200; ++i) {
        std::vector<float> probe = {static_cast<float>(rng.uniform(-5, 5)),
                                    static_cast<float>(rng.uniform(-5, 5))};
        const double p = predict_proba(r.model, probe);
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
    }
}

TEST_CASE("serialization round-trips bit-exactly") {
    Rng rng(6);
    FeatureMatrix x;
    std::vector<CrossLabel> y;
    make_blobs(rng, 50, 2.0, x, y);
    TrainResult r = train_forest(x, y, 15, 9, 11);

    const std::string text = serialize_forest(r.model);
    ForestModel back = deserialize_forest(text);
    CHECK(back == r.model);
    CHECK(serialize_forest(back) == text);

    for (int i = 0; i < 1000; ++i) {
        std::vector<float> probe = {static_cast<float>(rng.uniform(-6, 6)),
                                    static_cast<float>(rng.uniform(-6, 6))};
        CHECK(predict_proba(r.model, probe) == predict_proba(back, probe));
    }
}

TEST_CASE("row permutation with stable-id bootstrap reproduces the forest") {
    Rng rng(14);
    FeatureMatrix x;
    std::vector<CrossLabel> y;
    make_blobs(rng, 70, 1.5, x, y);
    const std::size_t n = static_cast<std::size_t>(x.rows());

    TrainResult original = train_forest(x, y, 12, 7, 31);

    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    rng.shuffle(perm);
    FeatureMatrix xp(x.rows(), x.cols());
    std::vector<CrossLabel> yp(n);
    TrainOptions options;
    options.stable_ids.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        xp.row(static_cast<Eigen::Index>(j)) = x.row(static_cast<Eigen::Index>(perm[j]));
        yp[j] = y[perm[j]];
        options.stable_ids[j] = static_cast<int>(perm[j]);
    }
    TrainResult permuted = train_forest(xp, yp, 12, 7, 31, options);
    CHECK(serialize_forest(permuted.model) == serialize_forest(original.model));
    for (int i = 0; i < 100; ++i) {
        std::vector<float> probe = {static_cast<float>(rng.uniform(-4, 6)),
                                    static_cast<float>(rng.uniform(-4, 6))};
        CHECK(predict_proba(original.model, probe) == predict_proba(permuted.model, probe));
    }
}

TEST_CASE("trees respect the depth cap") {
    Rng rng(8);
    FeatureMatrix x;
    std::vector<CrossLabel> y;
    make_blobs(rng, 100, 0.5, x, y);
    TrainResult r = train_forest(x, y, 10, 3, 21);
    for (const DecisionTree& tree : r.model.trees) CHECK(tree.depth() <= 3);
}

TEST_CASE("out-of-bag estimate tracks held-out accuracy") {
    Rng rng(9);
    FeatureMatrix x;
    std::vector<CrossLabel> y;
    make_blobs(rng, 1200, 1.2, x, y);

    FeatureMatrix train_x = x.topRows(2000);
    std::vector<CrossLabel> train_y(y.begin(), y.begin() + 2000);
    TrainOptions options;
    options.out_of_bag = true;
    TrainResult r = train_forest(train_x, train_y, 60, 10, 13, options);
    REQUIRE(r.oob_accuracy.has_value());

    int correct = 0;
    for (Eigen::Index i = 2000; i < x.rows(); ++i) {
        if (classify(r.model, row_of(x, i)) == y[static_cast<std::size_t>(i)]) ++correct;
    }
    const double held_out = static_cast<double>(correct) / static_cast<double>(x.rows() - 2000);
    CHECK(std::abs(*r.oob_accuracy - held_out) < 0.05);
}

TEST_CASE("stratified folds balance both classes") {
    std::vector<CrossLabel> y;
    for (int i = 0; i < 23; ++i) y.push_back(CrossLabel::C);
    for (int i = 0; i < 17; ++i) y.push_back(CrossLabel::NC);
    std::vector<int> folds = stratified_folds(y, 5, 77);

    std::vector<int> c_count(5, 0), nc_count(5, 0);
    for (std::size_t i = 0; i < y.size(); ++i) {
        (y[i] == CrossLabel::C ? c_count : nc_count)[static_cast<std::size_t>(folds[i])] += 1;
    }
    auto spread = [](const std::vector<int>& v) {
        return *std::max_element(v.begin(), v.end()) - *std::min_element(v.begin(), v.end());
    };
    CHECK(spread(c_count) <= 1);
    CHECK(spread(nc_count) <= 1);
}

TEST_CASE("grid search covers the full grid and prefers the smallest tied config") {
    Rng rng(10);
    FeatureMatrix x;
    std::vector<CrossLabel> y;
    make_blobs(rng, 40, 10.0, x, y);  // trivially separable

    GridSpec grid;
    grid.tree_counts = {5, 10};
    grid.depths = {3, 6};
    grid.folds = 4;
    GridSearchResult r = grid_search_cv(x, y, grid, 21);
    CHECK(r.table.size() == 4);
    for (const auto& entry : r.table) CHECK(entry.mean_accuracy == doctest::Approx(1.0));
    CHECK(r.best_n_trees == 5);
    CHECK(r.best_max_depth == 3);
}

TEST_CASE("paper-sized grid evaluates exactly 20 configurations") {
    GridSpec grid;
    CHECK(grid.tree_counts.size() * grid.depths.size() == 20);
    CHECK(grid.folds == 5);
}

TEST_CASE("grid search rejects data too small for stratification") {
    FeatureMatrix x(4, 1);
    x << 0, 1, 2, 3;
    std::vector<CrossLabel> y = {CrossLabel::C, CrossLabel::C, CrossLabel::NC, CrossLabel::NC};
    GridSpec grid;
    grid.folds = 5;
    CHECK_THROWS_AS(grid_search_cv(x, y, grid, 1), InsufficientData);
}
