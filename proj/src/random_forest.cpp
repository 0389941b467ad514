#include "pedcross/random_forest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pedcross/errors.hpp"
#include "pedcross/parallel.hpp"
#include "pedcross/rng.hpp"

namespace pedcross {

double DecisionTree::leaf_fraction(std::span<const float> x) const {
    int idx = 0;
    for (;;) {
        const TreeNode& node = nodes[static_cast<std::size_t>(idx)];
        if (node.is_leaf()) {
            const double total = static_cast<double>(node.count_nc) + node.count_c;
            return node.count_c / total;
        }
        idx = x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right;
    }
}

int DecisionTree::depth() const {
    // Iterative depth over the preorder layout.
    std::vector<std::pair<int, int>> stack{{0, 0}};
    int best = 0;
    while (!stack.empty()) {
        auto [idx, d] = stack.back();
        stack.pop_back();
        best = std::max(best, d);
        const TreeNode& node = nodes[static_cast<std::size_t>(idx)];
        if (!node.is_leaf()) {
            stack.emplace_back(node.left, d + 1);
            stack.emplace_back(node.right, d + 1);
        }
    }
    return best;
}

namespace {

struct SplitChoice {
    int feature = -1;
    float threshold = 0.0f;
    double gain = 0.0;
};

double gini(std::uint64_t nc, std::uint64_t c) {
    const double total = static_cast<double>(nc + c);
    if (total == 0.0) return 0.0;
    const double p_nc = nc / total;
    const double p_c = c / total;
    return 1.0 - p_nc * p_nc - p_c * p_c;
}

class TreeBuilder {
public:
    TreeBuilder(const FeatureMatrix& x, std::span<const CrossLabel> y, int max_depth, Rng rng)
        : x_(x), y_(y), max_depth_(max_depth), rng_(rng) {
        n_candidates_ = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(x.cols())))));
        feature_pool_.resize(static_cast<std::size_t>(x.cols()));
        for (std::size_t i = 0; i < feature_pool_.size(); ++i) feature_pool_[i] = i;
    }

    DecisionTree build(std::vector<int> bootstrap) {
        DecisionTree tree;
        grow(tree, std::move(bootstrap), 0);
        return tree;
    }

private:
    // Returns the index of the created node (preorder).
    int grow(DecisionTree& tree, std::vector<int> samples, int depth) {
        std::uint64_t nc = 0;
        std::uint64_t c = 0;
        for (int row : samples) {
            if (y_[static_cast<std::size_t>(row)] == CrossLabel::C) ++c; else ++nc;
        }

        const int node_idx = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();

        const bool stop = depth >= max_depth_ || samples.size() < 2 || nc == 0 || c == 0;
        SplitChoice split;
        if (!stop) split = best_split(samples, nc, c);
        if (stop || split.feature < 0) {
            tree.nodes[static_cast<std::size_t>(node_idx)].count_nc = static_cast<std::uint32_t>(nc);
            tree.nodes[static_cast<std::size_t>(node_idx)].count_c = static_cast<std::uint32_t>(c);
            return node_idx;
        }

        std::vector<int> left;
        std::vector<int> right;
        left.reserve(samples.size());
        right.reserve(samples.size());
        for (int row : samples) {
            (x_(row, split.feature) <= split.threshold ? left : right).push_back(row);
        }
        samples.clear();
        samples.shrink_to_fit();

        tree.nodes[static_cast<std::size_t>(node_idx)].feature = split.feature;
        tree.nodes[static_cast<std::size_t>(node_idx)].threshold = split.threshold;
        const int left_idx = grow(tree, std::move(left), depth + 1);
        const int right_idx = grow(tree, std::move(right), depth + 1);
        tree.nodes[static_cast<std::size_t>(node_idx)].left = left_idx;
        tree.nodes[static_cast<std::size_t>(node_idx)].right = right_idx;
        return node_idx;
    }

    // Partial Fisher-Yates over a persistent pool, undone afterwards so no
    // per-node allocation is needed.
    void draw_features() {
        drawn_.clear();
        swaps_.clear();
        const std::size_t n = feature_pool_.size();
        for (std::size_t i = 0; i < n_candidates_; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng_.bounded(n - i));
            std::swap(feature_pool_[i], feature_pool_[j]);
            swaps_.push_back(j);
            drawn_.push_back(feature_pool_[i]);
        }
        for (std::size_t i = n_candidates_; i-- > 0;) {
            std::swap(feature_pool_[i], feature_pool_[swaps_[i]]);
        }
    }

    SplitChoice best_split(const std::vector<int>& samples, std::uint64_t nc, std::uint64_t c) {
        const double parent_impurity = gini(nc, c);
        const double total = static_cast<double>(samples.size());
        SplitChoice best;

        draw_features();
        std::vector<std::pair<float, CrossLabel>>& column = column_;
        column.reserve(samples.size());
        for (std::size_t feature : drawn_) {
            column.clear();
            for (int row : samples) {
                column.emplace_back(x_(row, static_cast<Eigen::Index>(feature)),
                                    y_[static_cast<std::size_t>(row)]);
            }
            std::sort(column.begin(), column.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });

            std::uint64_t left_nc = 0;
            std::uint64_t left_c = 0;
            for (std::size_t i = 0; i + 1 < column.size(); ++i) {
                if (column[i].second == CrossLabel::C) ++left_c; else ++left_nc;
                if (column[i].first == column[i + 1].first) continue;  // not a boundary

                const std::uint64_t right_nc = nc - left_nc;
                const std::uint64_t right_c = c - left_c;
                const double n_left = static_cast<double>(left_nc + left_c);
                const double n_right = total - n_left;
                const double child =
                    (n_left * gini(left_nc, left_c) + n_right * gini(right_nc, right_c)) / total;
                const double gain = parent_impurity - child;
                if (gain > best.gain) {
                    const float lo = column[i].first;
                    const float hi = column[i + 1].first;
                    float mid = static_cast<float>(
                        (static_cast<double>(lo) + static_cast<double>(hi)) / 2.0);
                    if (mid >= hi) mid = lo;  // keep the boundary between lo and hi
                    best.gain = gain;
                    best.feature = static_cast<int>(feature);
                    best.threshold = mid;
                }
            }
        }
        return best;
    }

    const FeatureMatrix& x_;
    std::span<const CrossLabel> y_;
    int max_depth_;
    std::size_t n_candidates_;
    Rng rng_;
    std::vector<std::size_t> feature_pool_;
    std::vector<std::size_t> drawn_;
    std::vector<std::size_t> swaps_;
    std::vector<std::pair<float, CrossLabel>> column_;
};

Rng tree_rng(std::uint64_t seed, std::size_t tree_index) {
    // splitmix64 of (seed xor tree index): independent per-tree streams.
    return Rng(mix64(seed ^ static_cast<std::uint64_t>(tree_index)));
}

}  // namespace

TrainResult train_forest(const FeatureMatrix& x, std::span<const CrossLabel> y, int n_trees,
                         int max_depth, std::uint64_t seed, const TrainOptions& options) {
    const std::size_t n = static_cast<std::size_t>(x.rows());
    if (n == 0 || x.cols() == 0) throw EmptyData("train_forest: empty feature matrix");
    if (y.size() != n) throw DimensionMismatch("train_forest: label count != row count");
    if (n_trees < 1 || max_depth < 1) throw EmptyData("train_forest: n_trees and max_depth must be >= 1");
    const std::size_t n_c = static_cast<std::size_t>(
        std::count(y.begin(), y.end(), CrossLabel::C));
    if (n_c == 0 || n_c == n) {
        throw SingleClassTraining("train_forest: both classes must be present");
    }

    std::vector<int> id_to_row;
    if (!options.stable_ids.empty()) {
        if (options.stable_ids.size() != n) {
            throw DimensionMismatch("train_forest: stable_ids size != row count");
        }
        id_to_row.assign(n, -1);
        for (std::size_t row = 0; row < n; ++row) {
            const int id = options.stable_ids[row];
            if (id < 0 || static_cast<std::size_t>(id) >= n || id_to_row[static_cast<std::size_t>(id)] != -1) {
                throw DimensionMismatch("train_forest: stable_ids must be a permutation of 0..n-1");
            }
            id_to_row[static_cast<std::size_t>(id)] = static_cast<int>(row);
        }
    }

    TrainResult result;
    result.model.n_trees = n_trees;
    result.model.max_depth = max_depth;
    result.model.feature_dim = static_cast<int>(x.cols());
    result.model.seed = seed;
    result.model.trees.resize(static_cast<std::size_t>(n_trees));

    std::vector<std::vector<char>> in_bag;
    if (options.out_of_bag) {
        in_bag.assign(static_cast<std::size_t>(n_trees), std::vector<char>(n, 0));
    }

    parallel_for(static_cast<std::size_t>(n_trees), options.workers, [&](std::size_t t) {
        Rng rng = tree_rng(seed, t);
        std::vector<int> bootstrap(n);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t draw = static_cast<std::size_t>(rng.bounded(n));
            bootstrap[i] = id_to_row.empty() ? static_cast<int>(draw) : id_to_row[draw];
            if (options.out_of_bag) in_bag[t][static_cast<std::size_t>(bootstrap[i])] = 1;
        }
        TreeBuilder builder(x, y, max_depth, rng);
        result.model.trees[t] = builder.build(std::move(bootstrap));
    });

    if (options.out_of_bag) {
        std::size_t correct = 0;
        std::size_t counted = 0;
        std::vector<float> row(static_cast<std::size_t>(x.cols()));
        for (std::size_t i = 0; i < n; ++i) {
            double sum = 0.0;
            int votes = 0;
            for (Eigen::Index f = 0; f < x.cols(); ++f) {
                row[static_cast<std::size_t>(f)] = x(static_cast<Eigen::Index>(i), f);
            }
            for (std::size_t t = 0; t < static_cast<std::size_t>(n_trees); ++t) {
                if (in_bag[t][i]) continue;
                sum += result.model.trees[t].leaf_fraction(row);
                ++votes;
            }
            if (votes == 0) continue;
            const CrossLabel pred = sum / votes > 0.5 ? CrossLabel::C : CrossLabel::NC;
            if (pred == y[i]) ++correct;
            ++counted;
        }
        if (counted > 0) result.oob_accuracy = static_cast<double>(correct) / counted;
    }
    return result;
}

double predict_proba(const ForestModel& model, std::span<const float> x) {
    if (static_cast<int>(x.size()) != model.feature_dim) {
        throw DimensionMismatch("predict_proba: expected " + std::to_string(model.feature_dim) +
                                " features, got " + std::to_string(x.size()));
    }
    double sum = 0.0;
    for (const DecisionTree& tree : model.trees) sum += tree.leaf_fraction(x);
    return sum / static_cast<double>(model.trees.size());
}

CrossLabel classify(const ForestModel& model, std::span<const float> x, double threshold) {
    return predict_proba(model, x) > threshold ? CrossLabel::C : CrossLabel::NC;
}

namespace {

void append_float(std::string& out, float value) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    out.append(buf, res.ptr);
}

float parse_float(const std::string& token, long line_no) {
    float value = 0.0f;
    auto res = std::from_chars(token.data(), token.data() + token.size(), value);
    if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
        throw ParseError("bad float: " + token, line_no);
    }
    return value;
}

}  // namespace

std::string serialize_forest(const ForestModel& model) {
    std::string out;
    out += "pedcross_forest 1\n";
    out += "n_trees " + std::to_string(model.n_trees) + "\n";
    out += "max_depth " + std::to_string(model.max_depth) + "\n";
    out += "feature_dim " + std::to_string(model.feature_dim) + "\n";
    out += "seed " + std::to_string(model.seed) + "\n";
    out += "classes NC C\n";
    for (std::size_t t = 0; t < model.trees.size(); ++t) {
        const DecisionTree& tree = model.trees[t];
        out += "tree " + std::to_string(t) + " " + std::to_string(tree.nodes.size()) + "\n";
        for (const TreeNode& node : tree.nodes) {
            out += std::to_string(node.feature);
            out += ' ';
            append_float(out, node.threshold);
            out += ' ';
            out += std::to_string(node.left);
            out += ' ';
            out += std::to_string(node.right);
            out += ' ';
            out += std::to_string(node.count_nc);
            out += ' ';
            out += std::to_string(node.count_c);
            out += '\n';
        }
    }
    out += "end\n";
    return out;
}

ForestModel deserialize_forest(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    long line_no = 0;
    auto next_line = [&]() -> std::string {
        if (!std::getline(in, line)) throw ParseError("unexpected end of model file", line_no);
        ++line_no;
        return line;
    };

    std::istringstream header(next_line());
    std::string magic;
    int version = 0;
    header >> magic >> version;
    if (magic != "pedcross_forest") throw SchemaVersionMismatch("not a forest model file");
    if (version != 1) throw SchemaVersionMismatch("unsupported forest model version");

    ForestModel model;
    auto read_kv = [&](const std::string& key) -> std::string {
        std::istringstream ls(next_line());
        std::string k;
        std::string v;
        ls >> k >> v;
        if (k != key) throw ParseError("expected key " + key, line_no);
        return v;
    };
    model.n_trees = std::stoi(read_kv("n_trees"));
    model.max_depth = std::stoi(read_kv("max_depth"));
    model.feature_dim = std::stoi(read_kv("feature_dim"));
    model.seed = std::stoull(read_kv("seed"));
    {
        std::istringstream ls(next_line());
        std::string k;
        std::string a;
        std::string b;
        ls >> k >> a >> b;
        if (k != "classes" || a != "NC" || b != "C") throw ParseError("bad class mapping", line_no);
    }

    model.trees.reserve(static_cast<std::size_t>(model.n_trees));
    for (int t = 0; t < model.n_trees; ++t) {
        std::istringstream ls(next_line());
        std::string k;
        int index = 0;
        std::size_t n_nodes = 0;
        ls >> k >> index >> n_nodes;
        if (k != "tree" || index != t) throw ParseError("bad tree header", line_no);
        DecisionTree tree;
        tree.nodes.reserve(n_nodes);
        for (std::size_t i = 0; i < n_nodes; ++i) {
            std::istringstream ns(next_line());
            TreeNode node;
            std::string threshold;
            ns >> node.feature >> threshold >> node.left >> node.right >> node.count_nc >>
                node.count_c;
            if (ns.fail()) throw ParseError("bad node record", line_no);
            node.threshold = parse_float(threshold, line_no);
            tree.nodes.push_back(node);
        }
        model.trees.push_back(std::move(tree));
    }
    if (next_line() != "end") throw ParseError("missing end marker", line_no);
    return model;
}

void save_forest(const std::filesystem::path& path, const ForestModel& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << serialize_forest(model);
    if (!out) throw IoError("write failed for " + path.string());
}

ForestModel load_forest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return deserialize_forest(buf.str());
}

std::vector<int> stratified_folds(std::span<const CrossLabel> y, int folds, std::uint64_t seed) {
    if (folds < 2) throw InsufficientData("stratified_folds: need at least 2 folds");
    std::vector<std::size_t> c_idx;
    std::vector<std::size_t> nc_idx;
    for (std::size_t i = 0; i < y.size(); ++i) {
        (y[i] == CrossLabel::C ? c_idx : nc_idx).push_back(i);
    }
    if (c_idx.size() < static_cast<std::size_t>(folds) ||
        nc_idx.size() < static_cast<std::size_t>(folds)) {
        throw InsufficientData("stratified_folds: every fold needs both classes");
    }
    std::vector<int> fold_of(y.size(), 0);
    Rng rng(mix64(seed ^ 0x466f6c6473ULL));
    int counter = 0;
    for (auto* cls : {&c_idx, &nc_idx}) {
        rng.shuffle(*cls);
        for (std::size_t i = 0; i < cls->size(); ++i) {
            fold_of[(*cls)[i]] = counter % folds;
            ++counter;
        }
        counter = 0;
    }
    return fold_of;
}

GridSearchResult grid_search_cv(const FeatureMatrix& x, std::span<const CrossLabel> y,
                                const GridSpec& grid, std::uint64_t seed, int workers) {
    if (grid.tree_counts.empty() || grid.depths.empty()) {
        throw InsufficientData("grid_search_cv: empty grid axis");
    }
    if (x.rows() < grid.folds) throw InsufficientData("grid_search_cv: fewer rows than folds");
    const std::vector<int> fold_of = stratified_folds(y, grid.folds, seed);

    // Materialize per-fold train/test splits once.
    struct FoldData {
        FeatureMatrix train_x;
        std::vector<CrossLabel> train_y;
        std::vector<std::size_t> test_rows;
    };
    std::vector<FoldData> fold_data(static_cast<std::size_t>(grid.folds));
    for (int f = 0; f < grid.folds; ++f) {
        FoldData& fd = fold_data[static_cast<std::size_t>(f)];
        std::vector<std::size_t> train_rows;
        for (std::size_t i = 0; i < y.size(); ++i) {
            if (fold_of[i] == f) fd.test_rows.push_back(i); else train_rows.push_back(i);
        }
        fd.train_x.resize(static_cast<Eigen::Index>(train_rows.size()), x.cols());
        fd.train_y.reserve(train_rows.size());
        for (std::size_t r = 0; r < train_rows.size(); ++r) {
            fd.train_x.row(static_cast<Eigen::Index>(r)) =
                x.row(static_cast<Eigen::Index>(train_rows[r]));
            fd.train_y.push_back(y[train_rows[r]]);
        }
    }

    GridSearchResult result;
    std::vector<float> row(static_cast<std::size_t>(x.cols()));
    std::size_t cfg_index = 0;
    for (int n_trees : grid.tree_counts) {
        for (int depth : grid.depths) {
            double acc_sum = 0.0;
            for (int f = 0; f < grid.folds; ++f) {
                const FoldData& fd = fold_data[static_cast<std::size_t>(f)];
                const std::uint64_t fold_seed =
                    mix64(seed ^ mix64((cfg_index << 8) | static_cast<std::size_t>(f)));
                TrainOptions opts;
                opts.workers = workers;
                TrainResult trained =
                    train_forest(fd.train_x, fd.train_y, n_trees, depth, fold_seed, opts);
                std::size_t correct = 0;
                for (std::size_t test_row : fd.test_rows) {
                    for (Eigen::Index c = 0; c < x.cols(); ++c) {
                        row[static_cast<std::size_t>(c)] =
                            x(static_cast<Eigen::Index>(test_row), c);
                    }
                    if (classify(trained.model, row) == y[test_row]) ++correct;
                }
                acc_sum += static_cast<double>(correct) / static_cast<double>(fd.test_rows.size());
            }
            result.table.push_back({n_trees, depth, acc_sum / grid.folds});
            ++cfg_index;
        }
    }

    const GridSearchEntry* best = &result.table.front();
    for (const GridSearchEntry& entry : result.table) {
        if (entry.mean_accuracy > best->mean_accuracy ||
            (entry.mean_accuracy == best->mean_accuracy &&
             (entry.n_trees < best->n_trees ||
              (entry.n_trees == best->n_trees && entry.max_depth < best->max_depth)))) {
            best = &entry;
        }
    }
    result.best_n_trees = best->n_trees;
    result.best_max_depth = best->max_depth;
    return result;
}

}  // namespace pedcross
