#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "augbagg/csv.hpp"
#include "augbagg/dataset.hpp"
#include "augbagg/errors.hpp"
#include "augbagg/parallel.hpp"
#include "augbagg/rng.hpp"
#include "augbagg/synth.hpp"
#include "augbagg/tree.hpp"

namespace augbagg {

// B fitted trees plus everything needed to reproduce and apply them.  When
// noise_spec is present the model was trained on an augmented design and test
// points get their noise coordinates filled in at prediction time.
struct BaggedEnsemble {
    std::vector<RegressionTree> trees;
    TreeConfig tree_config;
    bool bootstrap = true;
    std::optional<NoiseSpec> noise_spec;
    int feature_count_at_fit = 0;

    int original_feature_count() const {
        return feature_count_at_fit - (noise_spec ? noise_spec->q : 0);
    }
};

struct ErrorReport {
    double test_mse = 0.0;
    std::optional<double> relative_test_error; // test_mse / sigma2_eps when known
    int n_test = 0;
};

inline BaggedEnsemble fit_bagging(const Dataset& train, int B, const TreeConfig& config, std::uint64_t seed,
                                  bool bootstrap = true) {
    if (B < 1) throw argument_error("fit_bagging: B must be positive");
    config.validate(static_cast<int>(train.p()));
    const int n = static_cast<int>(train.n());
    const int p = static_cast<int>(train.p());

    // Stream 0 feeds the trees; stream 1 is reserved for the augmentation in
    // fit_augbagg, so the two functions share tree seeds exactly.
    const std::uint64_t seed_trees = derive_seed(seed, 0);

    BaggedEnsemble model;
    model.tree_config = config;
    model.bootstrap = bootstrap;
    model.feature_count_at_fit = p;
    model.trees.resize(static_cast<std::size_t>(B), RegressionTree({}, config, 0, 0));

    parallel_for(static_cast<std::size_t>(B), [&](std::size_t b) {
        const std::uint64_t tree_seed = derive_seed(seed_trees, b);
        Eigen::MatrixXd Xb(n, p);
        Eigen::VectorXd yb(n);
        if (bootstrap) {
            Rng boot(derive_seed(tree_seed, 0));
            std::vector<int> idx(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = static_cast<int>(boot.uniform_index(n));
            for (int j = 0; j < p; ++j) {
                const double* col = train.X().col(j).data();
                double* out = Xb.col(j).data();
                for (int i = 0; i < n; ++i) out[i] = col[idx[static_cast<std::size_t>(i)]];
            }
            for (int i = 0; i < n; ++i) yb(i) = train.y()(idx[static_cast<std::size_t>(i)]);
        } else {
            Xb = train.X();
            yb = train.y();
        }
        model.trees[b] = fit_tree(Xb, yb, config, derive_seed(tree_seed, 1));
    });
    return model;
}

// Bagging on the noise-augmented design, with every feature eligible at every
// split (mtry = p + q): the augmentation itself is the only change.
inline BaggedEnsemble fit_augbagg(const Dataset& train, const NoiseSpec& spec, int B, TreeConfig config,
                                  std::uint64_t seed) {
    AugmentedDataset augmented = augment_with_noise(train, spec, derive_seed(seed, 1));
    config.mtry = static_cast<int>(augmented.data.p());
    BaggedEnsemble model = fit_bagging(augmented.data, B, config, seed);
    model.noise_spec = augmented.spec;
    return model;
}

// Mean of the tree predictions.  X_test may carry either the full fitted
// feature count or just the original features; in the latter case the noise
// coordinates are drawn once from the recorded spec and shared by all trees.
inline Eigen::VectorXd predict_ensemble(const BaggedEnsemble& model, const Eigen::MatrixXd& X_test,
                                        std::uint64_t seed) {
    if (model.trees.empty()) throw argument_error("predict_ensemble: empty ensemble");
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows;
    if (X_test.cols() == model.feature_count_at_fit) {
        rows = X_test;
    } else if (model.noise_spec && X_test.cols() == model.original_feature_count()) {
        auto [N, resolved] = generate_noise_columns(X_test, {}, *model.noise_spec, seed);
        (void)resolved;
        rows.resize(X_test.rows(), model.feature_count_at_fit);
        rows.leftCols(X_test.cols()) = X_test;
        rows.rightCols(N.cols()) = N;
    } else {
        throw argument_error("predict_ensemble: X_test must have " + std::to_string(model.feature_count_at_fit) +
                             (model.noise_spec ? " or " + std::to_string(model.original_feature_count()) : "") +
                             " columns");
    }

    const Eigen::Index n = rows.rows();
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(n);
    for (const auto& tree : model.trees) {
        for (Eigen::Index i = 0; i < n; ++i) sum(i) += tree.predict(&rows(i, 0));
    }
    return sum / static_cast<double>(model.trees.size());
}

inline ErrorReport error_report(const BaggedEnsemble& model, const Dataset& test, std::uint64_t seed) {
    const Eigen::VectorXd pred = predict_ensemble(model, test.X(), seed);
    ErrorReport report;
    report.n_test = static_cast<int>(test.n());
    report.test_mse = (test.y() - pred).squaredNorm() / static_cast<double>(test.n());
    if (test.sigma2_eps()) report.relative_test_error = report.test_mse / *test.sigma2_eps();
    return report;
}

// Percent improvement of AugBagg over bagging, scaled by the sample response
// variance.  Positive = AugBagg better.
inline double rte_vs_bagging(double err_bagging, double err_augbagg, double sigma2_y_hat) {
    if (!(sigma2_y_hat > 0.0)) throw argument_error("rte_vs_bagging: sigma2_y_hat must be positive");
    return (err_bagging - err_augbagg) / sigma2_y_hat * 100.0;
}

namespace detail {

inline std::vector<int> dedup_sorted(std::vector<int> values) {
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    return values;
}

} // namespace detail

// q candidates p/2, p, 3p/2, 2p (rounded, deduplicated).
inline std::vector<int> tuning_q_grid(int p) {
    std::vector<int> grid;
    for (int k = 1; k <= 4; ++k) {
        grid.push_back(std::max(1, static_cast<int>(std::llround(0.5 * k * p))));
    }
    return detail::dedup_sorted(grid);
}

// Grid search over (q, r) by k-fold cross-validated MSE.  Ties break toward
// smaller q, then smaller r.
inline NoiseSpec tune_augbagg(const Dataset& train, int B, const TreeConfig& config, int folds,
                              std::uint64_t seed) {
    if (folds < 2) throw argument_error("tune_augbagg: folds must be at least 2");
    const int n = static_cast<int>(train.n());
    if (folds > n) throw argument_error("tune_augbagg: more folds than observations");

    const std::vector<int> q_grid = tuning_q_grid(static_cast<int>(train.p()));
    std::vector<double> r_grid{0.0, 0.1, 0.4, 0.7, 0.9};
    if (train.continuous_original_features().empty()) r_grid = {0.0};

    std::vector<int> perm(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
    Rng fold_rng(derive_seed(seed, 0));
    fold_rng.shuffle(perm);

    struct Cell {
        int q;
        double r;
        double cv_mse = 0.0;
    };
    std::vector<Cell> cells;
    for (int q : q_grid) {
        for (double r : r_grid) cells.push_back(Cell{q, r});
    }

    parallel_for(cells.size(), [&](std::size_t c) {
        auto& cell = cells[c];
        const NoiseSpec spec = NoiseSpec::correlated(cell.q, cell.r);
        double total_se = 0.0;
        for (int fold = 0; fold < folds; ++fold) {
            const int lo = static_cast<int>(static_cast<std::int64_t>(fold) * n / folds);
            const int hi = static_cast<int>(static_cast<std::int64_t>(fold + 1) * n / folds);
            std::vector<int> test_idx(perm.begin() + lo, perm.begin() + hi);
            std::vector<int> train_idx;
            train_idx.reserve(static_cast<std::size_t>(n - (hi - lo)));
            train_idx.insert(train_idx.end(), perm.begin(), perm.begin() + lo);
            train_idx.insert(train_idx.end(), perm.begin() + hi, perm.end());
            std::sort(test_idx.begin(), test_idx.end());
            std::sort(train_idx.begin(), train_idx.end());

            const Dataset fold_train = train.subset_rows(train_idx);
            const Dataset fold_test = train.subset_rows(test_idx);
            const std::uint64_t cell_seed = derive_seed(seed, 1 + c, static_cast<std::uint64_t>(fold));
            const BaggedEnsemble model = fit_augbagg(fold_train, spec, B, config, cell_seed);
            const Eigen::VectorXd pred = predict_ensemble(model, fold_test.X(), derive_seed(cell_seed, 2));
            total_se += (fold_test.y() - pred).squaredNorm();
        }
        cell.cv_mse = total_se / static_cast<double>(n);
    });

    const Cell* best = &cells.front();
    for (const auto& cell : cells) {
        if (cell.cv_mse < best->cv_mse) best = &cell; // grid order = smaller q, then smaller r
    }
    return NoiseSpec::correlated(best->q, best->r);
}

// ---------------------------------------------------------------------------
// Model serialization: versioned JSON, exact round-trip (shortest round-trip
// double formatting is part of the JSON library contract).
// ---------------------------------------------------------------------------

namespace detail {

inline nlohmann::json noise_spec_to_json(const NoiseSpec& spec) {
    nlohmann::json j{{"q", spec.q},
                     {"r", spec.r},
                     {"variance_rule", spec.variance_rule == VarianceRule::unit ? "unit" : "ridge-matched"}};
    if (spec.variance_rule == VarianceRule::ridge_matched) j["lambda"] = spec.lambda;
    if (spec.target_mode == TargetMode::pinned) j["targets"] = spec.targets;
    else j["targets"] = (spec.target_mode == TargetMode::independent) ? "independent" : "random";
    return j;
}

inline NoiseSpec noise_spec_from_json(const nlohmann::json& j) {
    NoiseSpec spec;
    spec.q = j.at("q").get<int>();
    spec.r = j.at("r").get<double>();
    spec.variance_rule = (j.at("variance_rule").get<std::string>() == "unit") ? VarianceRule::unit
                                                                              : VarianceRule::ridge_matched;
    if (j.contains("lambda")) spec.lambda = j.at("lambda").get<double>();
    const auto& targets = j.at("targets");
    if (targets.is_array()) {
        spec.target_mode = TargetMode::pinned;
        spec.targets = targets.get<std::vector<int>>();
    } else {
        spec.target_mode = (targets.get<std::string>() == "independent") ? TargetMode::independent
                                                                         : TargetMode::random;
    }
    return spec;
}

} // namespace detail

inline void save_ensemble(const BaggedEnsemble& model, const std::string& path) {
    nlohmann::json j;
    j["format"] = "augbagg-ensemble";
    j["version"] = 1;
    j["bootstrap"] = model.bootstrap;
    j["feature_count"] = model.feature_count_at_fit;
    j["tree_config"] = {{"mtry", model.tree_config.mtry},
                        {"min_node_size", model.tree_config.min_node_size},
                        {"max_depth", model.tree_config.max_depth}};
    if (model.noise_spec) j["noise_spec"] = detail::noise_spec_to_json(*model.noise_spec);
    else j["noise_spec"] = nullptr;
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& tree : model.trees) {
        nlohmann::json nodes = nlohmann::json::array();
        for (const auto& node : tree.nodes()) {
            nodes.push_back({node.feature, node.value, node.left, node.right});
        }
        trees.push_back({{"seed", tree.rng_seed()}, {"nodes", std::move(nodes)}});
    }
    j["trees"] = std::move(trees);
    write_file(path, j.dump());
}

inline BaggedEnsemble load_ensemble(const std::string& path) {
    nlohmann::json j = nlohmann::json::parse(read_file(path));
    if (j.value("format", "") != "augbagg-ensemble") throw format_error("load_ensemble: unrecognized format");
    if (j.value("version", 0) != 1) throw format_error("load_ensemble: unsupported version");

    BaggedEnsemble model;
    model.bootstrap = j.at("bootstrap").get<bool>();
    model.feature_count_at_fit = j.at("feature_count").get<int>();
    const auto& cfg = j.at("tree_config");
    model.tree_config.mtry = cfg.at("mtry").get<int>();
    model.tree_config.min_node_size = cfg.at("min_node_size").get<int>();
    model.tree_config.max_depth = cfg.at("max_depth").get<int>();
    if (!j.at("noise_spec").is_null()) model.noise_spec = detail::noise_spec_from_json(j.at("noise_spec"));

    for (const auto& jt : j.at("trees")) {
        std::vector<TreeNode> nodes;
        for (const auto& jn : jt.at("nodes")) {
            nodes.push_back(TreeNode{jn.at(0).get<int>(), jn.at(1).get<double>(), jn.at(2).get<int>(),
                                     jn.at(3).get<int>()});
        }
        model.trees.emplace_back(std::move(nodes), model.tree_config, jt.at("seed").get<std::uint64_t>(),
                                 model.feature_count_at_fit);
    }
    return model;
}

} // namespace augbagg
