#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "augbagg/dataset.hpp"
#include "augbagg/errors.hpp"
#include "augbagg/rng.hpp"

namespace augbagg {

// Synthetic linear model: rows iid N(0, Sigma(rho)), y = X beta + eps with
// eps variance calibrated to the requested signal-to-noise ratio.
struct LinearModelSpec {
    int n = 0;
    int p = 0;
    Eigen::VectorXd beta;
    double rho = 0.0;
    double snr = 1.0;

    void validate() const {
        if (n < 1 || p < 1) throw argument_error("LinearModelSpec: n and p must be positive");
        if (beta.size() != p) throw argument_error("LinearModelSpec: beta must have length p");
        if (!(rho >= 0.0 && rho < 1.0)) throw argument_error("LinearModelSpec: rho must be in [0,1)");
        if (!(snr > 0.0)) throw argument_error("LinearModelSpec: snr must be positive");
    }
};

enum class VarianceRule { unit, ridge_matched };
enum class TargetMode { independent, random, pinned };

// How augmentation columns are generated: q columns, correlation r with a
// target original feature, and the variance rule (unit, or lambda/q for the
// ridge-matched construction).
struct NoiseSpec {
    int q = 0;
    double r = 0.0;
    VarianceRule variance_rule = VarianceRule::unit;
    double lambda = 0.0;                           // ridge_matched only
    TargetMode target_mode = TargetMode::independent;
    std::vector<int> targets;                      // pinned only, length q

    static NoiseSpec independent(int q) {
        NoiseSpec s;
        s.q = q;
        return s;
    }

    // Random per-column target unless explicit targets are pinned.
    static NoiseSpec correlated(int q, double r) {
        NoiseSpec s;
        s.q = q;
        s.r = r;
        s.target_mode = (r == 0.0) ? TargetMode::independent : TargetMode::random;
        return s;
    }

    static NoiseSpec correlated(int q, double r, std::vector<int> targets) {
        NoiseSpec s;
        s.q = q;
        s.r = r;
        s.target_mode = TargetMode::pinned;
        s.targets = std::move(targets);
        return s;
    }

    static NoiseSpec ridge_matched(int q, double lambda) {
        NoiseSpec s;
        s.q = q;
        s.variance_rule = VarianceRule::ridge_matched;
        s.lambda = lambda;
        return s;
    }

    void validate() const {
        if (q < 0) throw argument_error("NoiseSpec: q must be nonnegative");
        if (!(r >= -1.0 && r <= 1.0)) throw argument_error("NoiseSpec: r must be in [-1,1]");
        if (variance_rule == VarianceRule::ridge_matched) {
            if (r != 0.0) throw argument_error("NoiseSpec: ridge-matched noise requires r = 0");
            if (!(lambda > 0.0)) throw argument_error("NoiseSpec: ridge-matched noise requires lambda > 0");
        }
        if (r != 0.0 && target_mode == TargetMode::independent) {
            throw argument_error("NoiseSpec: r != 0 requires correlated targets");
        }
        if (target_mode == TargetMode::pinned && static_cast<int>(targets.size()) != q) {
            throw argument_error("NoiseSpec: pinned target_assignment must have length q");
        }
    }
};

// Dataset whose last q columns are generated noise, plus the resolved spec
// that produced them.  Noise columns never depend on y.
struct AugmentedDataset {
    Dataset data;
    NoiseSpec spec;
};

// AR(1)-style correlation matrix: entry (i,j) = rho^|i-j|, unit diagonal.
inline Eigen::MatrixXd make_covariance(int p, double rho) {
    if (p < 1) throw argument_error("make_covariance: p must be positive");
    if (!(rho >= 0.0 && rho < 1.0)) throw argument_error("make_covariance: rho must be in [0,1)");
    Eigen::MatrixXd sigma(p, p);
    for (int i = 0; i < p; ++i) {
        for (int j = 0; j < p; ++j) {
            sigma(i, j) = std::pow(rho, std::abs(i - j));
        }
    }
    return sigma;
}

// sigma2_eps such that beta' Sigma beta / sigma2_eps = snr.
inline double calibrate_noise_variance(const Eigen::VectorXd& beta, const Eigen::MatrixXd& sigma, double snr) {
    if (sigma.rows() != sigma.cols() || sigma.rows() != beta.size()) {
        throw argument_error("calibrate_noise_variance: dimension mismatch");
    }
    if (!sigma.isApprox(sigma.transpose(), 1e-12)) {
        throw argument_error("calibrate_noise_variance: sigma must be symmetric");
    }
    if (!(snr > 0.0)) throw argument_error("calibrate_noise_variance: snr must be positive");
    const double signal = beta.dot(sigma * beta);
    if (!(signal > 0.0)) {
        throw argument_error("calibrate_noise_variance: beta' Sigma beta must be positive");
    }
    return signal / snr;
}

inline Dataset generate_linear_data(const LinearModelSpec& spec, std::uint64_t seed) {
    spec.validate();
    const Eigen::MatrixXd sigma = make_covariance(spec.p, spec.rho);
    const double sigma2_eps = calibrate_noise_variance(spec.beta, sigma, spec.snr);
    const Eigen::MatrixXd chol = Eigen::LLT<Eigen::MatrixXd>(sigma).matrixL();

    Rng rng(seed);
    Eigen::MatrixXd X(spec.n, spec.p);
    Eigen::VectorXd z(spec.p);
    for (int i = 0; i < spec.n; ++i) {
        for (int j = 0; j < spec.p; ++j) z(j) = rng.normal();
        X.row(i) = (chol * z).transpose();
    }
    Eigen::VectorXd y = X * spec.beta;
    const double sd = std::sqrt(sigma2_eps);
    for (int i = 0; i < spec.n; ++i) y(i) += rng.normal(0.0, sd);

    std::vector<FeatureMeta> meta(static_cast<std::size_t>(spec.p));
    for (int j = 0; j < spec.p; ++j) {
        meta[static_cast<std::size_t>(j)] = FeatureMeta{"x" + std::to_string(j + 1),
                                                        FeatureKind::continuous, FeatureOrigin::original};
    }
    return Dataset(std::move(X), std::move(y), std::move(meta), sigma2_eps);
}

// Generates the q noise columns for a design matrix.  Takes no response
// argument at all: columns are a function of (X, spec, seed) only, which is
// what makes them conditionally independent of y by construction.
// Returns the columns plus the spec with targets resolved.
inline std::pair<Eigen::MatrixXd, NoiseSpec> generate_noise_columns(const Eigen::MatrixXd& X,
                                                                    const std::vector<int>& continuous_candidates,
                                                                    const NoiseSpec& spec, std::uint64_t seed) {
    spec.validate();
    const Eigen::Index n = X.rows();
    Eigen::MatrixXd N(n, spec.q);
    NoiseSpec resolved = spec;
    const bool correlated = spec.r != 0.0;
    if (correlated) {
        if (spec.target_mode == TargetMode::random && continuous_candidates.empty()) {
            throw argument_error("generate_noise_columns: r != 0 requires a continuous original feature");
        }
        if (spec.target_mode == TargetMode::pinned) {
            for (int t : spec.targets) {
                if (t < 0 || t >= X.cols()) throw argument_error("generate_noise_columns: target index out of range");
            }
        }
        resolved.target_mode = TargetMode::pinned;
        resolved.targets.resize(static_cast<std::size_t>(spec.q));
    }

    const double col_sd = (spec.variance_rule == VarianceRule::ridge_matched && spec.q > 0)
                              ? std::sqrt(spec.lambda / static_cast<double>(spec.q))
                              : 1.0;

    // Column j is a pure function of (seed, j): order- and parallelism-free.
    for (int j = 0; j < spec.q; ++j) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(j)));
        if (correlated) {
            int target;
            if (spec.target_mode == TargetMode::pinned) {
                target = spec.targets[static_cast<std::size_t>(j)];
            } else {
                target = continuous_candidates[rng.uniform_index(continuous_candidates.size())];
            }
            resolved.targets[static_cast<std::size_t>(j)] = target;
            const double mix = std::sqrt(1.0 - spec.r * spec.r);
            for (Eigen::Index i = 0; i < n; ++i) {
                N(i, j) = spec.r * X(i, target) + mix * rng.normal();
            }
        } else {
            for (Eigen::Index i = 0; i < n; ++i) N(i, j) = col_sd * rng.normal();
        }
    }
    return {std::move(N), std::move(resolved)};
}

// Appends q generated noise columns (tagged origin=noise) to the dataset.
// y is untouched.
inline AugmentedDataset augment_with_noise(const Dataset& data, const NoiseSpec& spec, std::uint64_t seed) {
    spec.validate();
    if (spec.target_mode == TargetMode::pinned) {
        const auto& meta = data.feature_meta();
        for (int t : spec.targets) {
            if (t < 0 || t >= static_cast<int>(meta.size())) {
                throw argument_error("augment_with_noise: target index out of range");
            }
            if (spec.r != 0.0 && (meta[static_cast<std::size_t>(t)].kind != FeatureKind::continuous ||
                                  meta[static_cast<std::size_t>(t)].origin != FeatureOrigin::original)) {
                throw argument_error("augment_with_noise: targets must be continuous original features");
            }
        }
    }

    auto [N, resolved] = generate_noise_columns(data.X(), data.continuous_original_features(), spec, seed);

    Eigen::MatrixXd X(data.n(), data.p() + spec.q);
    X.leftCols(data.p()) = data.X();
    if (spec.q > 0) X.rightCols(spec.q) = N;

    std::vector<FeatureMeta> meta = data.feature_meta();
    for (int j = 0; j < spec.q; ++j) {
        meta.push_back(FeatureMeta{"n" + std::to_string(j + 1), FeatureKind::continuous, FeatureOrigin::noise});
    }
    return AugmentedDataset{Dataset(std::move(X), data.y(), std::move(meta), data.sigma2_eps()),
                            std::move(resolved)};
}

} // namespace augbagg
