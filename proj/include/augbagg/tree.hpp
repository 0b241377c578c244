#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "augbagg/errors.hpp"
#include "augbagg/rng.hpp"

namespace augbagg {

struct TreeConfig {
    int mtry = 0;                                       // features eligible per split
    int min_node_size = 5;
    int max_depth = std::numeric_limits<int>::max();    // max() = unlimited

    void validate(int feature_count) const {
        if (mtry < 1 || mtry > feature_count) throw argument_error("TreeConfig: need 1 <= mtry <= feature count");
        if (min_node_size < 1) throw argument_error("TreeConfig: min_node_size must be positive");
        if (max_depth < 1) throw argument_error("TreeConfig: max_depth must be positive");
    }
};

struct TreeNode {
    int feature = -1;     // -1 = leaf
    double value = 0.0;   // split threshold, or leaf mean
    int left = -1;
    int right = -1;

    bool is_leaf() const { return feature < 0; }
};

// Greedy CART regression tree.  Immutable once fitted; safe for concurrent
// prediction.
class RegressionTree {
  public:
    RegressionTree(std::vector<TreeNode> nodes, TreeConfig config, std::uint64_t rng_seed, int feature_count)
        : nodes_(std::move(nodes)), config_(config), rng_seed_(rng_seed), feature_count_(feature_count) {}

    const std::vector<TreeNode>& nodes() const { return nodes_; }
    const TreeConfig& config() const { return config_; }
    std::uint64_t rng_seed() const { return rng_seed_; }
    int feature_count() const { return feature_count_; }

    double predict(const double* x) const {
        int node = 0;
        while (!nodes_[static_cast<std::size_t>(node)].is_leaf()) {
            const TreeNode& nd = nodes_[static_cast<std::size_t>(node)];
            node = (x[nd.feature] <= nd.value) ? nd.left : nd.right;
        }
        return nodes_[static_cast<std::size_t>(node)].value;
    }

  private:
    std::vector<TreeNode> nodes_;
    TreeConfig config_;
    std::uint64_t rng_seed_;
    int feature_count_;
};

namespace detail {

// Per-fit working state.  Feature order lists are presorted once and kept
// synchronized through stable partitions, so no sorting happens below the root.
struct TreeBuilder {
    const Eigen::MatrixXd& X;
    const Eigen::VectorXd& y;
    TreeConfig config;
    Rng rng;

    int n;
    int p;
    std::vector<int> order;      // p blocks of n sample indices, each sorted by feature value
    std::vector<int> scratch;
    std::vector<std::uint8_t> goes_left;
    std::vector<int> feature_pool;
    std::vector<int> candidates;
    std::vector<TreeNode> nodes;

    TreeBuilder(const Eigen::MatrixXd& X_, const Eigen::VectorXd& y_, TreeConfig cfg, std::uint64_t seed)
        : X(X_), y(y_), config(cfg), rng(seed),
          n(static_cast<int>(X_.rows())), p(static_cast<int>(X_.cols())) {
        order.resize(static_cast<std::size_t>(n) * static_cast<std::size_t>(p));
        scratch.resize(static_cast<std::size_t>(n));
        goes_left.assign(static_cast<std::size_t>(n), 0);
        feature_pool.resize(static_cast<std::size_t>(p));
        for (int f = 0; f < p; ++f) feature_pool[static_cast<std::size_t>(f)] = f;
        for (int f = 0; f < p; ++f) {
            int* block = order.data() + static_cast<std::size_t>(f) * static_cast<std::size_t>(n);
            for (int i = 0; i < n; ++i) block[i] = i;
            const double* col = X.col(f).data();
            std::sort(block, block + n, [col](int a, int b) {
                if (col[a] != col[b]) return col[a] < col[b];
                return a < b; // value ties broken by row index for determinism
            });
        }
    }

    int* block(int feature) { return order.data() + static_cast<std::size_t>(feature) * static_cast<std::size_t>(n); }

    struct Split {
        int feature = -1;
        double threshold = 0.0;
        int left_count = 0;
    };

    // Best (feature, threshold) among mtry sampled features, maximizing
    // sum_L^2/n_L + sum_R^2/n_R.  Ties resolve to the lowest feature index,
    // then the lowest threshold (candidates scanned in ascending order).
    Split find_split(int start, int end, double node_sum) {
        const int size = end - start;
        const double node_score = node_sum * node_sum / static_cast<double>(size);

        const int mtry = std::min(config.mtry, p);
        candidates.clear();
        for (int k = 0; k < mtry; ++k) {
            const auto j = k + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(p - k)));
            std::swap(feature_pool[static_cast<std::size_t>(k)], feature_pool[static_cast<std::size_t>(j)]);
            candidates.push_back(feature_pool[static_cast<std::size_t>(k)]);
        }
        std::sort(candidates.begin(), candidates.end());

        Split best;
        double best_gain = node_score;
        for (int f : candidates) {
            const int* ord = block(f) + start;
            const double* col = X.col(f).data();
            double left_sum = 0.0;
            for (int k = 0; k + 1 < size; ++k) {
                left_sum += y(ord[k]);
                const double v = col[ord[k]];
                const double v_next = col[ord[k + 1]];
                if (v_next <= v) continue; // threshold must separate distinct values
                const int left_count = k + 1;
                const int right_count = size - left_count;
                if (left_count < config.min_node_size || right_count < config.min_node_size) continue;
                const double right_sum = node_sum - left_sum;
                const double gain = left_sum * left_sum / static_cast<double>(left_count) +
                                    right_sum * right_sum / static_cast<double>(right_count);
                if (gain > best_gain) {
                    best_gain = gain;
                    best.feature = f;
                    best.threshold = 0.5 * (v + v_next);
                    best.left_count = left_count;
                }
            }
        }
        return best;
    }

    // Stable-partition every feature block so children stay value-sorted.
    void apply_split(int start, int end, const Split& split) {
        const int* split_ord = block(split.feature) + start;
        const double* col = X.col(split.feature).data();
        const int size = end - start;
        for (int k = 0; k < size; ++k) {
            goes_left[static_cast<std::size_t>(split_ord[k])] = (col[split_ord[k]] <= split.threshold) ? 1 : 0;
        }
        for (int f = 0; f < p; ++f) {
            int* ord = block(f) + start;
            int nl = 0;
            int nr = 0;
            for (int k = 0; k < size; ++k) {
                const int s = ord[k];
                if (goes_left[static_cast<std::size_t>(s)]) ord[nl++] = s;
                else scratch[static_cast<std::size_t>(nr++)] = s;
            }
            std::copy(scratch.begin(), scratch.begin() + nr, ord + nl);
        }
    }

    void build() {
        struct Frame {
            int node;
            int start;
            int end;
            int depth;
        };
        nodes.push_back(TreeNode{});
        std::vector<Frame> stack{{0, 0, n, 0}};
        while (!stack.empty()) {
            const Frame fr = stack.back();
            stack.pop_back();
            const int size = fr.end - fr.start;
            const int* samples = block(0) + fr.start;

            double sum = 0.0;
            double ymin = y(samples[0]);
            double ymax = ymin;
            for (int k = 0; k < size; ++k) {
                const double v = y(samples[k]);
                sum += v;
                ymin = std::min(ymin, v);
                ymax = std::max(ymax, v);
            }

            const bool splittable = size >= 2 * config.min_node_size && ymin < ymax && fr.depth < config.max_depth;
            Split split;
            if (splittable) split = find_split(fr.start, fr.end, sum);
            if (!splittable || split.feature < 0) {
                nodes[static_cast<std::size_t>(fr.node)].feature = -1;
                nodes[static_cast<std::size_t>(fr.node)].value = sum / static_cast<double>(size);
                continue;
            }

            apply_split(fr.start, fr.end, split);
            const int left_id = static_cast<int>(nodes.size());
            nodes[static_cast<std::size_t>(fr.node)] =
                TreeNode{split.feature, split.threshold, left_id, left_id + 1};
            nodes.push_back(TreeNode{});
            nodes.push_back(TreeNode{});
            const int mid = fr.start + split.left_count;
            // Right pushed first so the left child is processed next (fixed DFS
            // order keeps the per-node RNG consumption deterministic).
            stack.push_back(Frame{left_id + 1, mid, fr.end, fr.depth + 1});
            stack.push_back(Frame{left_id, fr.start, mid, fr.depth + 1});
        }
    }
};

} // namespace detail

inline RegressionTree fit_tree(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const TreeConfig& config,
                               std::uint64_t seed) {
    if (X.rows() < 1) throw argument_error("fit_tree: need at least one observation");
    if (X.rows() != y.size()) throw argument_error("fit_tree: X rows must match y length");
    config.validate(static_cast<int>(X.cols()));
    detail::TreeBuilder builder(X, y, config, seed);
    builder.build();
    return RegressionTree(std::move(builder.nodes), config, seed, static_cast<int>(X.cols()));
}

inline double predict_tree(const RegressionTree& tree, const Eigen::VectorXd& x) {
    if (x.size() != tree.feature_count()) throw argument_error("predict_tree: feature count mismatch");
    return tree.predict(x.data());
}

} // namespace augbagg
