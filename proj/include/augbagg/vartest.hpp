#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "augbagg/dataset.hpp"
#include "augbagg/ensemble.hpp"
#include "augbagg/errors.hpp"
#include "augbagg/parallel.hpp"
#include "augbagg/stats.hpp"
#include "augbagg/synth.hpp"

namespace augbagg {

enum class TestMode { drop, replace };
enum class ReplacementKind {
    independent, // iid N(0,1)
    correlated,  // r*X_target + sqrt(1-r^2)*Z columns, random continuous X0 targets
    permutation, // row-permuted originals
    matched      // drawn from the exact generating spec of the tested columns
};

struct ReplacementSpec {
    ReplacementKind kind = ReplacementKind::independent;
    double r = 0.0;                         // correlated only
    std::optional<NoiseSpec> matched_spec;  // matched only; resolved targets

    std::string label() const {
        switch (kind) {
            case ReplacementKind::independent: return "independent";
            case ReplacementKind::correlated: return "correlated(r=" + format_double(r) + ")";
            case ReplacementKind::permutation: return "permutation";
            case ReplacementKind::matched: return "matched";
        }
        return "?";
    }
};

// Which columns are under test, how the modified model is built, and the
// testing parameters.
struct ImportanceTestPlan {
    std::vector<int> x0_indices;
    std::vector<int> xtest_indices;
    TestMode mode = TestMode::drop;
    ReplacementSpec replacement;
    int B = 100;
    TreeConfig tree_config;
    double alpha_level = 0.05;
    int n1 = 500;
    int n2 = 500;

    void validate(int p_total) const {
        if (xtest_indices.empty()) throw argument_error("ImportanceTestPlan: X_test partition must be nonempty");
        if (!(alpha_level > 0.0 && alpha_level < 1.0)) {
            throw argument_error("ImportanceTestPlan: alpha_level must be in (0,1)");
        }
        std::vector<int> all = x0_indices;
        all.insert(all.end(), xtest_indices.begin(), xtest_indices.end());
        std::sort(all.begin(), all.end());
        for (int j = 0; j < p_total; ++j) {
            if (static_cast<std::size_t>(j) >= all.size() || all[static_cast<std::size_t>(j)] != j) {
                throw argument_error("ImportanceTestPlan: partition must cover all columns exactly once");
            }
        }
        if (static_cast<int>(all.size()) != p_total) {
            throw argument_error("ImportanceTestPlan: partition must cover all columns exactly once");
        }
    }
};

struct TestResult {
    double T = 0.0;
    double sigma2_hat = 0.0;
    double z = 0.0;
    double p_value = 1.0;
    bool reject = false;
    double mse_full = 0.0;
    double mse_modified = 0.0;
};

// Random substitute block for the columns in test_indices.  candidate_targets
// (for correlated mode) defaults to every non-tested column.
inline Eigen::MatrixXd generate_replacement(const Eigen::MatrixXd& X, const std::vector<int>& test_indices,
                                            const ReplacementSpec& spec, std::uint64_t seed,
                                            std::vector<int> candidate_targets = {}) {
    const Eigen::Index n = X.rows();
    const int q = static_cast<int>(test_indices.size());
    for (int j : test_indices) {
        if (j < 0 || j >= X.cols()) throw argument_error("generate_replacement: test index out of range");
    }

    if (spec.kind == ReplacementKind::matched) {
        if (!spec.matched_spec) throw argument_error("generate_replacement: matched mode needs a generating spec");
        if (spec.matched_spec->q != q) throw argument_error("generate_replacement: matched spec has wrong q");
        return generate_noise_columns(X, {}, *spec.matched_spec, seed).first;
    }
    if (spec.kind == ReplacementKind::independent) {
        return generate_noise_columns(X, {}, NoiseSpec::independent(q), seed).first;
    }
    if (spec.kind == ReplacementKind::correlated) {
        if (candidate_targets.empty()) {
            std::unordered_set<int> tested(test_indices.begin(), test_indices.end());
            for (int j = 0; j < X.cols(); ++j) {
                if (!tested.count(j)) candidate_targets.push_back(j);
            }
        }
        if (candidate_targets.empty()) {
            throw argument_error("generate_replacement: correlated mode needs a continuous X0 column");
        }
        return generate_noise_columns(X, candidate_targets, NoiseSpec::correlated(q, spec.r), seed).first;
    }

    // permutation: each tested column independently row-permuted
    Eigen::MatrixXd R(n, q);
    for (int j = 0; j < q; ++j) {
        std::vector<int> perm(static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = static_cast<int>(i);
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(j)));
        rng.shuffle(perm);
        for (Eigen::Index i = 0; i < n; ++i) R(i, j) = X(perm[static_cast<std::size_t>(i)], test_indices[j]);
    }
    return R;
}

namespace detail {

// The test statistic from the two per-observation squared-error samples.
inline TestResult mse_difference_test(const Eigen::VectorXd& sq_err_full, const Eigen::VectorXd& sq_err_modified,
                                      double alpha_level) {
    TestResult result;
    const auto n1 = static_cast<double>(sq_err_full.size());
    const auto n2 = static_cast<double>(sq_err_modified.size());
    result.mse_full = sq_err_full.mean();
    result.mse_modified = sq_err_modified.mean();
    result.T = result.mse_full - result.mse_modified;
    const double s1 = sample_variance(std::span(sq_err_full.data(), sq_err_full.size()));
    const double s2 = sample_variance(std::span(sq_err_modified.data(), sq_err_modified.size()));
    result.sigma2_hat = s1 / n1 + s2 / n2;
    if (result.sigma2_hat > 0.0) {
        result.z = result.T / std::sqrt(result.sigma2_hat);
    } else {
        result.z = result.T == 0.0 ? 0.0
                                   : std::copysign(std::numeric_limits<double>::infinity(), result.T);
    }
    result.p_value = normal_cdf(result.z); // H1: Delta < 0, reject for small z
    result.reject = result.p_value < alpha_level;
    return result;
}

inline std::uint64_t hash_row(const Eigen::MatrixXd& X, double y, Eigen::Index i) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    auto mix = [&h](double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof(bits));
        h ^= bits;
        h *= 0x100000001B3ULL;
    };
    for (Eigen::Index j = 0; j < X.cols(); ++j) mix(X(i, j));
    mix(y);
    return h;
}

// Row-identity overlap check between train and a test set (hash first, exact
// row comparison on hash hits).
inline bool rows_overlap(const Dataset& train, const Dataset& test) {
    std::unordered_multimap<std::uint64_t, Eigen::Index> index;
    index.reserve(static_cast<std::size_t>(train.n()));
    for (Eigen::Index i = 0; i < train.n(); ++i) index.emplace(hash_row(train.X(), train.y()(i), i), i);
    for (Eigen::Index i = 0; i < test.n(); ++i) {
        const auto [lo, hi] = index.equal_range(hash_row(test.X(), test.y()(i), i));
        for (auto it = lo; it != hi; ++it) {
            if (train.y()(it->second) == test.y()(i) && train.X().row(it->second) == test.X().row(i)) return true;
        }
    }
    return false;
}

inline Eigen::MatrixXd select_columns(const Eigen::MatrixXd& X, const std::vector<int>& cols) {
    Eigen::MatrixXd out(X.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = X.col(cols[j]);
    return out;
}

inline Eigen::MatrixXd replace_columns(Eigen::MatrixXd X, const std::vector<int>& cols,
                                       const Eigen::MatrixXd& block) {
    for (std::size_t j = 0; j < cols.size(); ++j) X.col(cols[j]) = block.col(static_cast<Eigen::Index>(j));
    return X;
}

} // namespace detail

// Fits a bagged ensemble on the full design and one on the modified design
// (tested columns dropped or replaced), evaluates each on its own test set,
// and applies the normal approximation to the test-MSE difference.
inline TestResult run_importance_test(const Dataset& train, const Dataset& test1, const Dataset& test2,
                                      const ImportanceTestPlan& plan, std::uint64_t seed) {
    const int p_total = static_cast<int>(train.p());
    plan.validate(p_total);
    if (test1.p() != p_total || test2.p() != p_total) {
        throw argument_error("run_importance_test: test sets must match the training design");
    }
    if (detail::rows_overlap(train, test1) || detail::rows_overlap(train, test2)) {
        throw argument_error("run_importance_test: test sets must be disjoint from the training set");
    }

    std::vector<int> x0 = plan.x0_indices;
    std::sort(x0.begin(), x0.end());

    // Full-model ensemble: plain bagging, every feature eligible.
    TreeConfig full_config = plan.tree_config;
    full_config.mtry = p_total;
    const BaggedEnsemble full_model = fit_bagging(train, plan.B, full_config, derive_seed(seed, 0));
    const Eigen::VectorXd pred1 = predict_ensemble(full_model, test1.X(), derive_seed(seed, 1));
    const Eigen::VectorXd sq1 = (test1.y() - pred1).array().square();

    // Modified design for training and for the second test set.
    Eigen::MatrixXd X_train_mod;
    Eigen::MatrixXd X_test2_mod;
    if (plan.mode == TestMode::drop) {
        X_train_mod = detail::select_columns(train.X(), x0);
        X_test2_mod = detail::select_columns(test2.X(), x0);
    } else {
        std::vector<int> continuous_x0;
        for (int j : x0) {
            if (train.feature_meta()[static_cast<std::size_t>(j)].kind == FeatureKind::continuous) {
                continuous_x0.push_back(j);
            }
        }
        const Eigen::MatrixXd block_train =
            generate_replacement(train.X(), plan.xtest_indices, plan.replacement, derive_seed(seed, 2), continuous_x0);
        const Eigen::MatrixXd block_test2 =
            generate_replacement(test2.X(), plan.xtest_indices, plan.replacement, derive_seed(seed, 3), continuous_x0);
        X_train_mod = detail::replace_columns(train.X(), plan.xtest_indices, block_train);
        X_test2_mod = detail::replace_columns(test2.X(), plan.xtest_indices, block_test2);
    }

    std::vector<FeatureMeta> meta_mod;
    if (plan.mode == TestMode::drop) {
        for (int j : x0) meta_mod.push_back(train.feature_meta()[static_cast<std::size_t>(j)]);
    } else {
        meta_mod = train.feature_meta();
    }
    const Dataset train_mod(X_train_mod, train.y(), meta_mod, train.sigma2_eps());

    TreeConfig mod_config = plan.tree_config;
    mod_config.mtry = static_cast<int>(train_mod.p());
    const BaggedEnsemble mod_model = fit_bagging(train_mod, plan.B, mod_config, derive_seed(seed, 4));
    const Eigen::VectorXd pred2 = predict_ensemble(mod_model, X_test2_mod, derive_seed(seed, 5));
    const Eigen::VectorXd sq2 = (test2.y() - pred2).array().square();

    return detail::mse_difference_test(sq1, sq2, plan.alpha_level);
}

// ---------------------------------------------------------------------------
// Rejection-rate sweeps over (snr, q, mode/replacement) grids.
// ---------------------------------------------------------------------------

struct SweepCombo {
    TestMode mode = TestMode::drop;
    ReplacementSpec replacement; // ignored in drop mode
};

struct SweepConfig {
    std::vector<double> snr_grid;
    std::vector<int> q_grid;
    double noise_r = 0.0; // correlation of the tested noise columns with a random signal
    std::vector<SweepCombo> combos;
    int reps = 50;

    int n_train = 200;
    int n1 = 500;
    int n2 = 500;
    int p = 5;
    double rho = 0.35;
    int B = 100;
    TreeConfig tree_config{};
    double alpha_level = 0.05;

    void validate() const {
        if (snr_grid.empty() || q_grid.empty() || combos.empty()) {
            throw argument_error("SweepConfig: snr_grid, q_grid, and combos must be nonempty");
        }
        if (reps < 1) throw argument_error("SweepConfig: reps must be positive");
        for (double s : snr_grid) {
            if (!(s > 0.0)) throw argument_error("SweepConfig: snr values must be positive");
        }
        for (int q : q_grid) {
            if (q < 1) throw argument_error("SweepConfig: q values must be positive");
        }
    }
};

struct SweepRepRow {
    double snr = 0.0;
    int q = 0;
    std::string mode;
    std::string replacement;
    int rep = 0;
    TestResult result;
};

struct SweepCellSummary {
    double snr = 0.0;
    int q = 0;
    std::string mode;
    std::string replacement;
    int reps = 0;
    int rejections = 0;
    double proportion = 0.0;
    double ci_low = 0.0;  // 99% Clopper-Pearson
    double ci_high = 0.0;
};

struct SweepOutput {
    std::vector<SweepRepRow> rows;
    std::vector<SweepCellSummary> cells;
};

namespace detail {

inline std::string mode_label(TestMode mode) { return mode == TestMode::drop ? "drop" : "replace"; }

} // namespace detail

// Full generate -> fit -> test pipeline for every grid cell, repeated `reps`
// times with per-(cell, rep) derived seeds.  Cells are independent jobs.
inline SweepOutput rejection_rate_sweep(const SweepConfig& config, std::uint64_t seed) {
    config.validate();

    struct CellDef {
        double snr;
        int q;
        SweepCombo combo;
    };
    std::vector<CellDef> defs;
    for (double snr : config.snr_grid) {
        for (int q : config.q_grid) {
            for (const auto& combo : config.combos) defs.push_back(CellDef{snr, q, combo});
        }
    }

    const std::size_t reps = static_cast<std::size_t>(config.reps);
    std::vector<TestResult> results(defs.size() * reps);

    parallel_for(defs.size() * reps, [&](std::size_t job) {
        const std::size_t cell = job / reps;
        const std::size_t rep = job % reps;
        const CellDef& def = defs[cell];
        const std::uint64_t job_seed = derive_seed(seed, cell, rep);

        LinearModelSpec model;
        model.n = config.n_train + config.n1 + config.n2;
        model.p = config.p;
        model.beta = Eigen::VectorXd::Ones(config.p);
        model.rho = config.rho;
        model.snr = def.snr;
        const Dataset base = generate_linear_data(model, derive_seed(job_seed, 0));

        const NoiseSpec noise = (config.noise_r == 0.0) ? NoiseSpec::independent(def.q)
                                                        : NoiseSpec::correlated(def.q, config.noise_r);
        const AugmentedDataset augmented = augment_with_noise(base, noise, derive_seed(job_seed, 1));

        std::vector<int> train_idx, test1_idx, test2_idx;
        for (int i = 0; i < config.n_train; ++i) train_idx.push_back(i);
        for (int i = 0; i < config.n1; ++i) test1_idx.push_back(config.n_train + i);
        for (int i = 0; i < config.n2; ++i) test2_idx.push_back(config.n_train + config.n1 + i);

        ImportanceTestPlan plan;
        for (int j = 0; j < config.p; ++j) plan.x0_indices.push_back(j);
        for (int j = 0; j < def.q; ++j) plan.xtest_indices.push_back(config.p + j);
        plan.mode = def.combo.mode;
        plan.replacement = def.combo.replacement;
        if (plan.mode == TestMode::replace && plan.replacement.kind == ReplacementKind::matched) {
            plan.replacement.matched_spec = augmented.spec; // exact law of the tested columns
        }
        plan.B = config.B;
        plan.tree_config = config.tree_config;
        plan.alpha_level = config.alpha_level;
        plan.n1 = config.n1;
        plan.n2 = config.n2;

        results[job] = run_importance_test(augmented.data.subset_rows(train_idx),
                                           augmented.data.subset_rows(test1_idx),
                                           augmented.data.subset_rows(test2_idx), plan,
                                           derive_seed(job_seed, 2));
    });

    SweepOutput out;
    for (std::size_t cell = 0; cell < defs.size(); ++cell) {
        const CellDef& def = defs[cell];
        const std::string mode = detail::mode_label(def.combo.mode);
        const std::string repl = def.combo.mode == TestMode::drop ? "none" : def.combo.replacement.label();
        int rejections = 0;
        for (std::size_t rep = 0; rep < reps; ++rep) {
            const TestResult& tr = results[cell * reps + rep];
            out.rows.push_back(SweepRepRow{def.snr, def.q, mode, repl, static_cast<int>(rep), tr});
            if (tr.reject) ++rejections;
        }
        const auto [lo, hi] = clopper_pearson(rejections, config.reps, 0.99);
        out.cells.push_back(SweepCellSummary{def.snr, def.q, mode, repl, config.reps, rejections,
                                             static_cast<double>(rejections) / static_cast<double>(config.reps),
                                             lo, hi});
    }
    return out;
}

} // namespace augbagg
