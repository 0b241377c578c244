#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "augbagg/config.hpp"
#include "augbagg/csv.hpp"
#include "augbagg/dataset.hpp"
#include "augbagg/ensemble.hpp"
#include "augbagg/linear.hpp"
#include "augbagg/parallel.hpp"
#include "augbagg/plot.hpp"
#include "augbagg/synth.hpp"
#include "augbagg/vartest.hpp"

namespace augbagg {

// ===========================================================================
// Experiment parameter blocks (desk-scale defaults; --full swaps in the
// large-scale settings).
// ===========================================================================

struct FigCurvesParams {
    std::vector<double> snr_grid{0.01, 0.05, 0.09, 0.14};
    std::vector<int> q_grid{1, 10, 25, 50, 100, 250};
    std::vector<double> r_grid{0.0};
    int n = 100;
    int p = 5;
    double rho = 0.35;
    double beta_value = 1.0;
    int n_test = 500;
    int reps = 50;
    int B = 100;
    int min_node_size = 5;
    std::vector<int> forest_mtry{1, 2, 3, 4};
    bool resample_targets = true;
};

struct FigRow {
    double snr;
    std::string series;
    int q;     // 0 for baselines
    double r;  // 0 for baselines
    int rep;
    double test_mse;
    double relative_test_error;
};

struct RidgeEquivParams {
    std::vector<double> snr_grid{0.14};
    std::vector<int> q_grid{10, 50, 200, 1000};
    int n = 100;
    int p = 75;
    int s = 5; // leading signal coefficients equal to 1
    double rho = 0.35;
    int cv_datasets = 20;
    int cv_folds = 10;
    std::vector<double> lambda_grid; // defaulted below
    int reps = 50;
    int n_test = 100;
};

struct RidgeEquivRow {
    double snr;
    double lambda_opt;
    int q;
    int rep;
    double test_mse;
    double relative_test_error;
};

struct OlsRiskParams {
    int n = 1000;
    double gamma = 0.5;
    std::vector<double> alpha_grid{0.5};
    double eta = 1.0;
    double sigma2 = 1.0;
    int B = 2000;
    int reps = 20; // independent data replicates
};

struct OlsRiskRow {
    double alpha;
    int rep;
    double bias_same_mc;
    double variance_same_mc;
    double bias_same_limit;
    double variance_same_limit;
    double ensemble_risk;
};

struct RealdataParams {
    std::string csv_path;
    std::string response;
    CategoricalPolicy policy = CategoricalPolicy::one_hot;
    std::vector<double> proportions{0.0, 0.25, 0.5, 0.75, 1.0};
    double test_fraction = 0.3;
    int reps = 5;
    int B = 50;
    int folds = 3;
    int min_node_size = 5;
};

struct RealdataRow {
    double proportion;
    int rep;
    int q;
    double r;
    double err_bagging;
    double err_augbagg;
    double rte;
};

inline std::vector<double> default_lambda_grid() {
    std::vector<double> grid;
    for (int k = 0; k <= 35; ++k) grid.push_back(std::pow(10.0, -2.0 + 0.2 * k)); // 1e-2 .. 1e5
    return grid;
}

// ===========================================================================
// Experiment runners (in-memory row tables; file emission happens in
// run_experiment so tests can reuse these directly).
// ===========================================================================

inline std::vector<FigRow> run_fig_curves(const FigCurvesParams& params, std::uint64_t seed) {
    const int nb = 1 + static_cast<int>(params.forest_mtry.size());
    const int ncells = static_cast<int>(params.q_grid.size() * params.r_grid.size());
    const int rows_per_job = nb + ncells;
    const std::size_t jobs = params.snr_grid.size() * static_cast<std::size_t>(params.reps);
    std::vector<FigRow> rows(jobs * static_cast<std::size_t>(rows_per_job));

    // Pinned per-cell targets when targets are not resampled per replication.
    std::vector<std::vector<int>> pinned(static_cast<std::size_t>(ncells));
    if (!params.resample_targets) {
        for (std::size_t c = 0; c < pinned.size(); ++c) {
            const double r = params.r_grid[c % params.r_grid.size()];
            if (r == 0.0) continue;
            const int q = params.q_grid[c / params.r_grid.size()];
            Rng rng(derive_seed(seed, 0xFEED, c));
            for (int j = 0; j < q; ++j) {
                pinned[c].push_back(static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(params.p))));
            }
        }
    }

    parallel_for(jobs, [&](std::size_t job) {
        const std::size_t snr_idx = job / static_cast<std::size_t>(params.reps);
        const int rep = static_cast<int>(job % static_cast<std::size_t>(params.reps));
        const double snr = params.snr_grid[snr_idx];
        const std::uint64_t job_seed = derive_seed(seed, snr_idx, static_cast<std::uint64_t>(rep));

        LinearModelSpec model;
        model.n = params.n;
        model.p = params.p;
        model.beta = Eigen::VectorXd::Constant(params.p, params.beta_value);
        model.rho = params.rho;
        model.snr = snr;
        const Dataset train = generate_linear_data(model, derive_seed(job_seed, 0));
        LinearModelSpec test_model = model;
        test_model.n = params.n_test;
        const Dataset test = generate_linear_data(test_model, derive_seed(job_seed, 1));

        FigRow* out = rows.data() + job * static_cast<std::size_t>(rows_per_job);
        int slot = 0;
        TreeConfig config;
        config.min_node_size = params.min_node_size;

        config.mtry = params.p;
        {
            const BaggedEnsemble bagged = fit_bagging(train, params.B, config, derive_seed(job_seed, 2));
            const ErrorReport report = error_report(bagged, test, derive_seed(job_seed, 3));
            out[slot++] = FigRow{snr, "bagging", 0, 0.0, rep, report.test_mse, *report.relative_test_error};
        }
        for (std::size_t m = 0; m < params.forest_mtry.size(); ++m) {
            config.mtry = params.forest_mtry[m];
            const BaggedEnsemble forest = fit_bagging(train, params.B, config, derive_seed(job_seed, 4 + m));
            const ErrorReport report = error_report(forest, test, derive_seed(job_seed, 200 + m));
            out[slot++] = FigRow{snr, "rf_mtry" + std::to_string(params.forest_mtry[m]), 0, 0.0, rep,
                                 report.test_mse, *report.relative_test_error};
        }

        config.min_node_size = params.min_node_size;
        for (std::size_t qi = 0; qi < params.q_grid.size(); ++qi) {
            for (std::size_t ri = 0; ri < params.r_grid.size(); ++ri) {
                const std::size_t cell = qi * params.r_grid.size() + ri;
                const int q = params.q_grid[qi];
                const double r = params.r_grid[ri];
                NoiseSpec spec = (r == 0.0) ? NoiseSpec::independent(q)
                                 : params.resample_targets
                                     ? NoiseSpec::correlated(q, r)
                                     : NoiseSpec::correlated(q, r, pinned[cell]);
                const BaggedEnsemble augbagg =
                    fit_augbagg(train, spec, params.B, config, derive_seed(job_seed, 1000 + cell));
                const ErrorReport report = error_report(augbagg, test, derive_seed(job_seed, 5000 + cell));
                out[slot++] = FigRow{snr, "AB(q," + format_double(r) + ")", q, r, rep, report.test_mse,
                                     *report.relative_test_error};
            }
        }
    });
    return rows;
}

inline double median(std::vector<double> values) {
    if (values.empty()) throw argument_error("median: empty input");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return (n % 2 == 1) ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

struct RidgeEquivOutput {
    std::vector<RidgeEquivRow> rows;
    std::vector<double> lambda_opt; // one per snr grid entry
};

inline RidgeEquivOutput run_ridge_equivalence(const RidgeEquivParams& params, std::uint64_t seed) {
    RidgeEquivParams p = params;
    if (p.lambda_grid.empty()) p.lambda_grid = default_lambda_grid();

    LinearModelSpec base;
    base.n = p.n;
    base.p = p.p;
    base.beta = Eigen::VectorXd::Zero(p.p);
    base.beta.head(p.s).setOnes();
    base.rho = p.rho;

    // Stage 1: median cross-validated lambda over independent datasets.
    RidgeEquivOutput out;
    out.lambda_opt.resize(p.snr_grid.size());
    for (std::size_t si = 0; si < p.snr_grid.size(); ++si) {
        std::vector<double> lambdas(static_cast<std::size_t>(p.cv_datasets));
        parallel_for(lambdas.size(), [&](std::size_t d) {
            const std::uint64_t ds = derive_seed(derive_seed(seed, 1), si, d);
            LinearModelSpec model = base;
            model.snr = p.snr_grid[si];
            const Dataset data = generate_linear_data(model, derive_seed(ds, 0));
            lambdas[d] = ridge_cv(data.X(), data.y(), p.lambda_grid, p.cv_folds, derive_seed(ds, 1)).best_lambda;
        });
        out.lambda_opt[si] = median(lambdas);
    }

    // Stage 2: augmented min-norm fits across the q grid.
    const std::size_t jobs = p.snr_grid.size() * p.q_grid.size() * static_cast<std::size_t>(p.reps);
    out.rows.resize(jobs);
    parallel_for(jobs, [&](std::size_t job) {
        const std::size_t per_snr = p.q_grid.size() * static_cast<std::size_t>(p.reps);
        const std::size_t si = job / per_snr;
        const std::size_t qi = (job % per_snr) / static_cast<std::size_t>(p.reps);
        const int rep = static_cast<int>(job % static_cast<std::size_t>(p.reps));
        const double lambda = out.lambda_opt[si];
        const int q = p.q_grid[qi];
        const std::uint64_t job_seed = derive_seed(derive_seed(seed, 2), job);

        LinearModelSpec model = base;
        model.snr = p.snr_grid[si];
        const Dataset train = generate_linear_data(model, derive_seed(job_seed, 0));
        LinearModelSpec test_model = model;
        test_model.n = p.n_test;
        const Dataset test = generate_linear_data(test_model, derive_seed(job_seed, 1));

        const LinearFit fit = augmented_minnorm(train.X(), train.y(), q, lambda, false, derive_seed(job_seed, 2));
        const Eigen::VectorXd pred = predict_augmented_rows(fit, test.X(), lambda, q, derive_seed(job_seed, 3));
        const double mse = (test.y() - pred).squaredNorm() / static_cast<double>(test.n());
        out.rows[job] = RidgeEquivRow{p.snr_grid[si], lambda, q, rep, mse, mse / *test.sigma2_eps()};
    });
    return out;
}

inline std::vector<OlsRiskRow> run_ols_risk(const OlsRiskParams& params, std::uint64_t seed) {
    const int p = static_cast<int>(std::llround(params.gamma * params.n));
    const double gamma = static_cast<double>(p) / static_cast<double>(params.n);
    std::vector<OlsRiskRow> rows(params.alpha_grid.size() * static_cast<std::size_t>(params.reps));

    for (int rep = 0; rep < params.reps; ++rep) {
        const std::uint64_t rep_seed = derive_seed(seed, 3, static_cast<std::uint64_t>(rep));
        Rng rng(derive_seed(rep_seed, 0));
        Eigen::VectorXd beta(p);
        for (int j = 0; j < p; ++j) beta(j) = rng.normal();
        beta.normalize(); // assumptions: identity covariance, unit-norm signal
        Eigen::MatrixXd X(params.n, p);
        for (int i = 0; i < params.n; ++i) {
            for (int j = 0; j < p; ++j) X(i, j) = rng.normal();
        }
        Eigen::VectorXd y = X * beta;
        const double sd = std::sqrt(params.sigma2);
        for (int i = 0; i < params.n; ++i) y(i) += rng.normal(0.0, sd);

        for (std::size_t ai = 0; ai < params.alpha_grid.size(); ++ai) {
            const double alpha = params.alpha_grid[ai];
            SubsampleSpec spec;
            spec.alpha = alpha;
            spec.eta = params.eta;
            spec.B = params.B;
            const OlsRiskEstimate est =
                ols_ensemble_risk_mc(X, y, beta, params.sigma2, spec, derive_seed(rep_seed, 1 + ai));
            const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(p, p);
            const RiskReport report = make_risk_report(ensemble_risk(est.ensemble, beta, identity), alpha, gamma,
                                                       params.eta, params.sigma2, /*same_model=*/true);
            rows[ai * static_cast<std::size_t>(params.reps) + static_cast<std::size_t>(rep)] =
                OlsRiskRow{alpha,
                           rep,
                           est.mean_bias_same,
                           est.mean_variance_same,
                           report.bias_limit,
                           report.variance_limit,
                           report.empirical_risk};
        }
    }
    return rows;
}

inline std::vector<RealdataRow> run_realdata(const RealdataParams& params, std::uint64_t seed) {
    const Dataset data = load_csv(params.csv_path, params.response, params.policy);
    const double sigma2_y_original = data.sigma2_y_hat();
    const std::size_t jobs = params.proportions.size() * static_cast<std::size_t>(params.reps);
    std::vector<RealdataRow> rows(jobs);

    parallel_for(jobs, [&](std::size_t job) {
        const std::size_t pi = job / static_cast<std::size_t>(params.reps);
        const int rep = static_cast<int>(job % static_cast<std::size_t>(params.reps));
        const std::uint64_t job_seed = derive_seed(seed, pi, static_cast<std::uint64_t>(rep));
        const double proportion = params.proportions[pi];

        const Dataset noisy = inject_response_noise(data, proportion, derive_seed(job_seed, 0));
        const SplitPair pair = split(noisy, params.test_fraction, derive_seed(job_seed, 1));

        TreeConfig config;
        config.min_node_size = params.min_node_size;
        config.mtry = static_cast<int>(pair.train.p());
        const NoiseSpec tuned = tune_augbagg(pair.train, params.B, config, params.folds, derive_seed(job_seed, 2));

        const BaggedEnsemble bagged = fit_bagging(pair.train, params.B, config, derive_seed(job_seed, 3));
        const BaggedEnsemble augbagg = fit_augbagg(pair.train, tuned, params.B, config, derive_seed(job_seed, 4));
        const double err_bagging = error_report(bagged, pair.test, derive_seed(job_seed, 5)).test_mse;
        const double err_augbagg = error_report(augbagg, pair.test, derive_seed(job_seed, 6)).test_mse;
        rows[job] = RealdataRow{proportion,  rep,         tuned.q, tuned.r, err_bagging, err_augbagg,
                                rte_vs_bagging(err_bagging, err_augbagg, sigma2_y_original)};
    });
    return rows;
}

// ===========================================================================
// Parameter parsing and validation (config_error with field paths).
// ===========================================================================

namespace detail {

inline void check_positive_grid(const std::vector<double>& grid, const std::string& path) {
    for (double v : grid) {
        if (!(v > 0.0)) config_fail(path, "values must be positive");
    }
}

inline FigCurvesParams parse_fig_params(const ExperimentConfig& config, bool correlation_grid) {
    FigCurvesParams p;
    if (correlation_grid) {
        p.snr_grid = {0.01, 0.05, 0.09, 0.14, 0.42, 0.71, 1.22, 2.07};
        p.r_grid = {0.0, 0.2, 0.7, 0.99};
    }
    const auto& j = config.params;
    const std::string path = "params";
    require_keys(j, path,
                 {"snr_grid", "q_grid", "r_grid", "n", "p", "rho", "beta_value", "n_test", "reps", "B",
                  "min_node_size", "forest_mtry", "resample_targets"});
    p.snr_grid = get_grid<double>(j, path, "snr_grid", p.snr_grid);
    check_positive_grid(p.snr_grid, path + ".snr_grid");
    p.q_grid = get_grid<int>(j, path, "q_grid", p.q_grid);
    for (int q : p.q_grid) {
        if (q < 0) config_fail(path + ".q_grid", "values must be nonnegative");
    }
    p.r_grid = get_grid<double>(j, path, "r_grid", p.r_grid);
    for (double r : p.r_grid) {
        if (!(r >= -1.0 && r <= 1.0)) config_fail(path + ".r_grid", "values must be in [-1,1]");
    }
    p.n = get_int(j, path, "n", p.n);
    p.p = get_int(j, path, "p", p.p);
    if (p.n < 2 || p.p < 1) config_fail(path, "n must be >= 2 and p >= 1");
    p.rho = get_number(j, path, "rho", p.rho);
    if (!(p.rho >= 0.0 && p.rho < 1.0)) config_fail(path + ".rho", "must be in [0,1)");
    p.beta_value = get_number(j, path, "beta_value", p.beta_value);
    p.n_test = get_int(j, path, "n_test", p.n_test);
    if (p.n_test < 1) config_fail(path + ".n_test", "must be positive");
    p.reps = get_int(j, path, "reps", p.reps);
    if (p.reps < 1) config_fail(path + ".reps", "must be positive");
    p.B = get_int(j, path, "B", p.B);
    if (p.B < 1) config_fail(path + ".B", "must be positive");
    p.min_node_size = get_int(j, path, "min_node_size", p.min_node_size);
    if (p.min_node_size < 1) config_fail(path + ".min_node_size", "must be positive");
    p.forest_mtry = get_grid<int>(j, path, "forest_mtry", p.forest_mtry);
    for (int m : p.forest_mtry) {
        if (m < 1 || m > p.p) config_fail(path + ".forest_mtry", "values must be in [1, p]");
    }
    p.resample_targets = get_bool(j, path, "resample_targets", p.resample_targets);
    if (config.full_scale) {
        p.reps = 500;
        p.B = 500;
        p.n_test = 1000;
    }
    return p;
}

inline RidgeEquivParams parse_ridge_params(const ExperimentConfig& config) {
    RidgeEquivParams p;
    const auto& j = config.params;
    const std::string path = "params";
    require_keys(j, path,
                 {"snr_grid", "q_grid", "n", "p", "s", "rho", "cv_datasets", "cv_folds", "lambda_grid", "reps",
                  "n_test"});
    p.snr_grid = get_grid<double>(j, path, "snr_grid", p.snr_grid);
    check_positive_grid(p.snr_grid, path + ".snr_grid");
    p.q_grid = get_grid<int>(j, path, "q_grid", p.q_grid);
    for (int q : p.q_grid) {
        if (q < 1) config_fail(path + ".q_grid", "values must be positive");
    }
    p.n = get_int(j, path, "n", p.n);
    p.p = get_int(j, path, "p", p.p);
    p.s = get_int(j, path, "s", p.s);
    if (p.n < 4) config_fail(path + ".n", "must be at least 4");
    if (p.p < 1 || p.s < 1 || p.s > p.p) config_fail(path, "need 1 <= s <= p");
    p.rho = get_number(j, path, "rho", p.rho);
    if (!(p.rho >= 0.0 && p.rho < 1.0)) config_fail(path + ".rho", "must be in [0,1)");
    p.cv_datasets = get_int(j, path, "cv_datasets", p.cv_datasets);
    if (p.cv_datasets < 1) config_fail(path + ".cv_datasets", "must be positive");
    p.cv_folds = get_int(j, path, "cv_folds", p.cv_folds);
    if (p.cv_folds < 2) config_fail(path + ".cv_folds", "must be at least 2");
    p.lambda_grid = get_grid<double>(j, path, "lambda_grid", p.lambda_grid.empty() ? default_lambda_grid()
                                                                                   : p.lambda_grid);
    check_positive_grid(p.lambda_grid, path + ".lambda_grid");
    p.reps = get_int(j, path, "reps", p.reps);
    if (p.reps < 1) config_fail(path + ".reps", "must be positive");
    p.n_test = get_int(j, path, "n_test", p.n_test);
    if (p.n_test < 1) config_fail(path + ".n_test", "must be positive");
    if (config.full_scale) {
        p.cv_datasets = 100;
        p.reps = 100;
        p.n_test = 100;
    }
    return p;
}

inline OlsRiskParams parse_ols_params(const ExperimentConfig& config) {
    OlsRiskParams p;
    const auto& j = config.params;
    const std::string path = "params";
    require_keys(j, path, {"n", "gamma", "alpha_grid", "eta", "sigma2", "B", "reps"});
    p.n = get_int(j, path, "n", p.n);
    if (p.n < 4) config_fail(path + ".n", "must be at least 4");
    p.gamma = get_number(j, path, "gamma", p.gamma);
    if (!(p.gamma > 0.0)) config_fail(path + ".gamma", "must be positive");
    p.alpha_grid = get_grid<double>(j, path, "alpha_grid", p.alpha_grid);
    for (double a : p.alpha_grid) {
        if (!(a > 0.0 && a <= 1.0)) config_fail(path + ".alpha_grid", "values must be in (0,1]");
    }
    p.eta = get_number(j, path, "eta", p.eta);
    if (!(p.eta > 0.0 && p.eta <= 1.0)) config_fail(path + ".eta", "must be in (0,1]");
    p.sigma2 = get_number(j, path, "sigma2", p.sigma2);
    if (p.sigma2 < 0.0) config_fail(path + ".sigma2", "must be nonnegative");
    p.B = get_int(j, path, "B", p.B);
    if (p.B < 1) config_fail(path + ".B", "must be positive");
    p.reps = get_int(j, path, "reps", p.reps);
    if (p.reps < 1) config_fail(path + ".reps", "must be positive");
    // Validate the subsample size condition and the limit pole conditions now,
    // not at runtime.
    const int pp = static_cast<int>(std::llround(p.gamma * p.n));
    for (double a : p.alpha_grid) {
        SubsampleSpec spec;
        spec.alpha = a;
        spec.eta = p.eta;
        spec.B = p.B;
        try {
            spec.validate(p.n, pp);
        } catch (const argument_error& e) {
            config_fail(path + ".alpha_grid", e.what());
        }
        const double gamma = static_cast<double>(pp) / static_cast<double>(p.n);
        if (!(p.eta > a * gamma)) config_fail(path + ".alpha_grid", "requires eta > alpha*gamma");
    }
    return p;
}

inline RealdataParams parse_realdata_params(const ExperimentConfig& config) {
    RealdataParams p;
    const auto& j = config.params;
    const std::string path = "params";
    require_keys(j, path,
                 {"csv_path", "response", "categorical_policy", "proportions", "test_fraction", "reps", "B",
                  "folds", "min_node_size"});
    p.csv_path = get_string(j, path, "csv_path", "", true);
    p.response = get_string(j, path, "response", "", true);
    const std::string policy = get_string(j, path, "categorical_policy", "one-hot");
    if (policy == "one-hot") p.policy = CategoricalPolicy::one_hot;
    else if (policy == "reject") p.policy = CategoricalPolicy::reject;
    else config_fail(path + ".categorical_policy", "must be 'one-hot' or 'reject'");
    p.proportions = get_grid<double>(j, path, "proportions", p.proportions);
    for (double v : p.proportions) {
        if (v < 0.0) config_fail(path + ".proportions", "values must be nonnegative");
    }
    p.test_fraction = get_number(j, path, "test_fraction", p.test_fraction);
    if (!(p.test_fraction > 0.0 && p.test_fraction < 1.0)) config_fail(path + ".test_fraction", "must be in (0,1)");
    p.reps = get_int(j, path, "reps", p.reps);
    if (p.reps < 1) config_fail(path + ".reps", "must be positive");
    p.B = get_int(j, path, "B", p.B);
    if (p.B < 1) config_fail(path + ".B", "must be positive");
    p.folds = get_int(j, path, "folds", p.folds);
    if (p.folds < 2) config_fail(path + ".folds", "must be at least 2");
    p.min_node_size = get_int(j, path, "min_node_size", p.min_node_size);
    if (p.min_node_size < 1) config_fail(path + ".min_node_size", "must be positive");
    if (config.full_scale) {
        p.reps = 10;
        p.B = 100;
        p.folds = 5;
    }
    return p;
}

inline SweepConfig parse_sweep_params(const ExperimentConfig& config) {
    SweepConfig p;
    p.snr_grid = {0.05, 0.71};
    p.q_grid = {10, 100};
    p.combos = {SweepCombo{TestMode::drop, {}},
                SweepCombo{TestMode::replace, ReplacementSpec{ReplacementKind::matched, 0.0, std::nullopt}}};
    const auto& j = config.params;
    const std::string path = "params";
    require_keys(j, path,
                 {"snr_grid", "q_grid", "noise_r", "combos", "reps", "n_train", "n1", "n2", "B", "alpha_level",
                  "min_node_size"});
    p.snr_grid = get_grid<double>(j, path, "snr_grid", p.snr_grid);
    check_positive_grid(p.snr_grid, path + ".snr_grid");
    p.q_grid = get_grid<int>(j, path, "q_grid", p.q_grid);
    for (int q : p.q_grid) {
        if (q < 1) config_fail(path + ".q_grid", "values must be positive");
    }
    p.noise_r = get_number(j, path, "noise_r", p.noise_r);
    if (!(p.noise_r >= -1.0 && p.noise_r <= 1.0)) config_fail(path + ".noise_r", "must be in [-1,1]");
    if (j.contains("combos")) {
        const auto& combos = j.at("combos");
        if (!combos.is_array() || combos.empty()) config_fail(path + ".combos", "must be a nonempty array");
        p.combos.clear();
        for (std::size_t i = 0; i < combos.size(); ++i) {
            const std::string cpath = path + ".combos[" + std::to_string(i) + "]";
            if (!combos[i].is_object()) config_fail(cpath, "must be an object");
            require_keys(combos[i], cpath, {"mode", "replacement", "replacement_r"});
            SweepCombo combo;
            const std::string mode = get_string(combos[i], cpath, "mode", "", true);
            if (mode == "drop") combo.mode = TestMode::drop;
            else if (mode == "replace") combo.mode = TestMode::replace;
            else config_fail(cpath + ".mode", "must be 'drop' or 'replace'");
            if (combo.mode == TestMode::replace) {
                const std::string repl = get_string(combos[i], cpath, "replacement", "", true);
                if (repl == "independent") combo.replacement.kind = ReplacementKind::independent;
                else if (repl == "correlated") combo.replacement.kind = ReplacementKind::correlated;
                else if (repl == "permutation") combo.replacement.kind = ReplacementKind::permutation;
                else if (repl == "matched") combo.replacement.kind = ReplacementKind::matched;
                else config_fail(cpath + ".replacement",
                                 "must be 'independent', 'correlated', 'permutation', or 'matched'");
                combo.replacement.r = get_number(combos[i], cpath, "replacement_r", 0.0);
            }
            p.combos.push_back(combo);
        }
    }
    p.reps = get_int(j, path, "reps", p.reps);
    p.n_train = get_int(j, path, "n_train", p.n_train);
    p.n1 = get_int(j, path, "n1", p.n1);
    p.n2 = get_int(j, path, "n2", p.n2);
    if (p.n_train < 2 || p.n1 < 2 || p.n2 < 2) config_fail(path, "n_train, n1, n2 must be at least 2");
    p.B = get_int(j, path, "B", p.B);
    if (p.B < 1) config_fail(path + ".B", "must be positive");
    p.alpha_level = get_number(j, path, "alpha_level", p.alpha_level);
    if (!(p.alpha_level > 0.0 && p.alpha_level < 1.0)) config_fail(path + ".alpha_level", "must be in (0,1)");
    p.tree_config.min_node_size = get_int(j, path, "min_node_size", p.tree_config.min_node_size);
    p.tree_config.mtry = 1; // overwritten per fit
    if (config.full_scale) {
        p.reps = 500;
        p.n_train = 500;
        p.n1 = 1000;
        p.n2 = 1000;
        p.B = 500;
    }
    try {
        p.validate();
    } catch (const argument_error& e) {
        config_fail(path, e.what());
    }
    return p;
}

} // namespace detail

// Full per-kind validation; throws config_error with a field path.
inline void validate_experiment(const ExperimentConfig& config) {
    if (config.kind == "fig1-augbagg-curves") detail::parse_fig_params(config, false);
    else if (config.kind == "fig2-correlation-grid") detail::parse_fig_params(config, true);
    else if (config.kind == "ridge-equivalence") detail::parse_ridge_params(config);
    else if (config.kind == "ols-risk-asymptotics") detail::parse_ols_params(config);
    else if (config.kind == "realdata-rte") detail::parse_realdata_params(config);
    else if (config.kind == "importance-rejection") detail::parse_sweep_params(config);
    else throw config_error("config.kind: unknown experiment kind '" + config.kind + "'");
}

} // namespace augbagg
