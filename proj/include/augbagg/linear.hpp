#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "augbagg/errors.hpp"
#include "augbagg/parallel.hpp"
#include "augbagg/rng.hpp"
#include "augbagg/synth.hpp"

namespace augbagg {

enum class FitMethod { min_norm_ols, ridge, augmented, subsample_ensemble, randfs };

// Coefficient vector with provenance.
struct LinearFit {
    Eigen::VectorXd coefficients;
    FitMethod method = FitMethod::min_norm_ols;
    double lambda = 0.0;    // ridge / augmented
    int q = 0;              // augmented
    bool truncated = false; // augmented
    std::string provenance;
};

// Min-norm least squares via SVD.  Singular values below
// max(n,p) * eps * s_max are treated as zero.
inline Eigen::VectorXd pseudo_solve(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& s = svd.singularValues();
    if (s.size() == 0 || s(0) <= 0.0) return Eigen::VectorXd::Zero(X.cols());
    const double tol = static_cast<double>(std::max(X.rows(), X.cols())) *
                       std::numeric_limits<double>::epsilon() * s(0);
    Eigen::VectorXd uty = svd.matrixU().transpose() * y;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        uty(i) = (s(i) > tol) ? uty(i) / s(i) : 0.0;
    }
    return svd.matrixV() * uty;
}

inline LinearFit minnorm_ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    if (X.rows() != y.size()) throw argument_error("minnorm_ols: X rows must match y length");
    return LinearFit{pseudo_solve(X, y), FitMethod::min_norm_ols, 0.0, 0, false, "min-norm OLS (SVD)"};
}

// Closed-form ridge.  For p > n the algebraically identical dual form
// X'(XX' + lambda I)^-1 y is used.  lambda = 0 requires full column rank and
// defers rank-deficient designs to minnorm_ols.
inline LinearFit ridge(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda) {
    if (X.rows() != y.size()) throw argument_error("ridge: X rows must match y length");
    if (lambda < 0.0) throw argument_error("ridge: negative penalties are not supported");
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();

    Eigen::VectorXd beta;
    if (lambda == 0.0) {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
        if (qr.rank() < p) {
            throw argument_error("ridge: lambda = 0 requires full column rank; use minnorm_ols");
        }
        beta = qr.solve(y);
    } else if (p <= n) {
        Eigen::MatrixXd gram = X.transpose() * X;
        gram.diagonal().array() += lambda;
        beta = Eigen::LDLT<Eigen::MatrixXd>(gram).solve(X.transpose() * y);
    } else {
        Eigen::MatrixXd outer = X * X.transpose();
        outer.diagonal().array() += lambda;
        beta = X.transpose() * Eigen::LDLT<Eigen::MatrixXd>(outer).solve(y);
    }
    return LinearFit{std::move(beta), FitMethod::ridge, lambda, 0, false, "ridge closed form"};
}

// Min-norm least squares on [X N] where N holds q iid N(0, lambda/q) columns.
// As q grows the first p coefficients converge to the ridge solution.
inline LinearFit augmented_minnorm(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int q, double lambda,
                                   bool truncate, std::uint64_t seed) {
    if (q < 1) throw argument_error("augmented_minnorm: q must be positive");
    if (!(lambda > 0.0)) throw argument_error("augmented_minnorm: lambda must be positive");
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();

    auto [N, resolved] = generate_noise_columns(X, {}, NoiseSpec::ridge_matched(q, lambda), seed);
    (void)resolved;
    Eigen::MatrixXd augmented(n, p + q);
    augmented.leftCols(p) = X;
    augmented.rightCols(q) = N;

    Eigen::VectorXd beta = pseudo_solve(augmented, y);
    if (truncate) beta = beta.head(p).eval();
    return LinearFit{std::move(beta), FitMethod::augmented, lambda, q, truncate, "augmented min-norm"};
}

// Prediction from the untruncated augmented fit: x is extended with q fresh
// N(0, lambda/q) coordinates.
inline double predict_augmented(const LinearFit& fit, const Eigen::VectorXd& x, double lambda, int q,
                                std::uint64_t seed) {
    if (fit.method != FitMethod::augmented || fit.truncated) {
        throw argument_error("predict_augmented: fit must be an untruncated augmented fit");
    }
    if (fit.q != q || fit.lambda != lambda) throw argument_error("predict_augmented: (q, lambda) mismatch");
    if (x.size() + q != fit.coefficients.size()) throw argument_error("predict_augmented: x has wrong length");

    Rng rng(seed);
    const double sd = std::sqrt(lambda / static_cast<double>(q));
    double value = fit.coefficients.head(x.size()).dot(x);
    for (int j = 0; j < q; ++j) {
        value += fit.coefficients(x.size() + j) * rng.normal(0.0, sd);
    }
    return value;
}

// Row-wise predict_augmented with independent per-row extension streams.
inline Eigen::VectorXd predict_augmented_rows(const LinearFit& fit, const Eigen::MatrixXd& X_test, double lambda,
                                              int q, std::uint64_t seed) {
    Eigen::VectorXd out(X_test.rows());
    for (Eigen::Index i = 0; i < X_test.rows(); ++i) {
        out(i) = predict_augmented(fit, X_test.row(i).transpose(), lambda, q,
                                   derive_seed(seed, static_cast<std::uint64_t>(i)));
    }
    return out;
}

// Row/column subsampling plan for OLS ensembles.
struct SubsampleSpec {
    double alpha = 1.0; // column fraction
    double eta = 1.0;   // row fraction
    int B = 1;

    int cols_of(int p) const { return static_cast<int>(std::floor(alpha * p)); }
    int rows_of(int n) const { return static_cast<int>(std::floor(eta * n)); }

    void validate(int n, int p) const {
        if (!(alpha > 0.0 && alpha <= 1.0)) throw argument_error("SubsampleSpec: alpha must be in (0,1]");
        if (!(eta > 0.0 && eta <= 1.0)) throw argument_error("SubsampleSpec: eta must be in (0,1]");
        if (B < 1) throw argument_error("SubsampleSpec: B must be positive");
        const int s = cols_of(p);
        const int t = rows_of(n);
        if (s < 1) throw argument_error("SubsampleSpec: floor(alpha*p) must be at least 1");
        if (!(s < t - 1)) {
            throw argument_error("SubsampleSpec: requires floor(alpha*p) < floor(eta*n) - 1 "
                                 "(finite subsampling size condition)");
        }
    }
};

namespace detail {

struct SubsetDraw {
    std::vector<int> cols;
    std::vector<int> rows;
};

// Column subset drawn before the row subset; both uniform without replacement.
inline SubsetDraw draw_subsets(std::uint64_t member_seed, int n, int p, int s, int t) {
    Rng rng(member_seed);
    SubsetDraw draw;
    draw.cols = rng.sample_without_replacement(p, s);
    draw.rows = rng.sample_without_replacement(n, t);
    return draw;
}

} // namespace detail

// Average of min-norm OLS fits on random row/column submatrices, scattered
// back to p coordinates (zero outside each member's column subset).
inline LinearFit ols_subsample_ensemble(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                        const SubsampleSpec& spec, std::uint64_t seed) {
    const int n = static_cast<int>(X.rows());
    const int p = static_cast<int>(X.cols());
    if (X.rows() != y.size()) throw argument_error("ols_subsample_ensemble: X rows must match y length");
    spec.validate(n, p);
    const int s = spec.cols_of(p);
    const int t = spec.rows_of(n);

    std::vector<Eigen::VectorXd> members(static_cast<std::size_t>(spec.B));
    parallel_for(members.size(), [&](std::size_t b) {
        const auto draw = detail::draw_subsets(derive_seed(seed, b), n, p, s, t);
        Eigen::MatrixXd Xs(t, s);
        Eigen::VectorXd ys(t);
        for (int i = 0; i < t; ++i) {
            ys(i) = y(draw.rows[static_cast<std::size_t>(i)]);
            for (int j = 0; j < s; ++j) {
                Xs(i, j) = X(draw.rows[static_cast<std::size_t>(i)], draw.cols[static_cast<std::size_t>(j)]);
            }
        }
        const Eigen::VectorXd beta_s = pseudo_solve(Xs, ys);
        Eigen::VectorXd scattered = Eigen::VectorXd::Zero(p);
        for (int j = 0; j < s; ++j) scattered(draw.cols[static_cast<std::size_t>(j)]) = beta_s(j);
        members[b] = std::move(scattered);
    });

    Eigen::VectorXd sum = Eigen::VectorXd::Zero(p);
    for (const auto& member : members) sum += member;
    return LinearFit{sum / static_cast<double>(spec.B), FitMethod::subsample_ensemble, 0.0, 0, false,
                     "subsampled OLS ensemble"};
}

// Expected squared error at an independent point: <beta - beta_hat, Sigma (beta - beta_hat)>.
inline double ensemble_risk(const LinearFit& fit, const Eigen::VectorXd& beta, const Eigen::MatrixXd& sigma) {
    if (fit.coefficients.size() != beta.size() || sigma.rows() != beta.size() || sigma.cols() != beta.size()) {
        throw argument_error("ensemble_risk: dimension mismatch");
    }
    const Eigen::VectorXd diff = beta - fit.coefficients;
    return diff.dot(sigma * diff);
}

// Almost-sure limit of the expected bias term of the subsampled OLS ensemble
// (identity covariance, unit-norm signal).  same_model selects the b = c branch.
inline double asymptotic_bias(double alpha, double gamma, double eta, bool same_model) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw argument_error("asymptotic_bias: alpha must be in [0,1]");
    if (!(gamma > 0.0)) throw argument_error("asymptotic_bias: gamma must be positive");
    if (!(eta > 0.0 && eta <= 1.0)) throw argument_error("asymptotic_bias: eta must be in (0,1]");
    if (same_model) {
        if (!(eta > alpha * gamma)) throw argument_error("asymptotic_bias: requires eta > alpha*gamma");
        return (1.0 - alpha) * (1.0 + alpha * gamma / (eta - alpha * gamma));
    }
    if (!(alpha * alpha * gamma < 1.0)) throw argument_error("asymptotic_bias: requires alpha^2*gamma < 1");
    return (1.0 - alpha) * (1.0 - alpha) * (1.0 + alpha * alpha * gamma / (1.0 - alpha * alpha * gamma));
}

// Matching variance limit.
inline double asymptotic_variance(double alpha, double gamma, double eta, double sigma2, bool same_model) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw argument_error("asymptotic_variance: alpha must be in [0,1]");
    if (!(gamma > 0.0)) throw argument_error("asymptotic_variance: gamma must be positive");
    if (!(eta > 0.0 && eta <= 1.0)) throw argument_error("asymptotic_variance: eta must be in (0,1]");
    if (sigma2 < 0.0) throw argument_error("asymptotic_variance: sigma2 must be nonnegative");
    if (same_model) {
        if (!(eta > alpha * gamma)) throw argument_error("asymptotic_variance: requires eta > alpha*gamma");
        return sigma2 * alpha * gamma / (eta - alpha * gamma);
    }
    if (!(alpha * alpha * gamma < 1.0)) throw argument_error("asymptotic_variance: requires alpha^2*gamma < 1");
    return sigma2 * alpha * alpha * gamma / (1.0 - alpha * alpha * gamma);
}

// Empirical ensemble risk next to the closed-form limits of its bias and
// variance terms.  same_b_terms selects which branch the limits came from.
struct RiskReport {
    double empirical_risk = 0.0;
    double bias_limit = 0.0;
    double variance_limit = 0.0;
    bool same_b_terms = true;
};

inline RiskReport make_risk_report(double empirical_risk, double alpha, double gamma, double eta, double sigma2,
                                   bool same_model) {
    if (empirical_risk < 0.0) throw argument_error("make_risk_report: risk must be nonnegative");
    return RiskReport{empirical_risk, asymptotic_bias(alpha, gamma, eta, same_model),
                      asymptotic_variance(alpha, gamma, eta, sigma2, same_model), same_model};
}

// Effective ridge penalty induced by row-subsampled ensembling in the
// identity-design case.
inline double simple_case_lambda_q(double lambda, double eta) {
    if (!(eta > 0.0 && eta <= 1.0)) throw argument_error("simple_case_lambda_q: eta must be in (0,1]");
    if (!(lambda > 0.0)) throw argument_error("simple_case_lambda_q: lambda must be positive");
    return (1.0 + lambda - eta) / eta;
}

// Scalar shrinkage factor eta/(1+lambda) = 1/(1+lambda_q) of the identity-design
// ensemble limit.
inline double simple_case_shrinkage(double lambda, double eta) {
    return 1.0 / (1.0 + simple_case_lambda_q(lambda, eta));
}

struct RandfsResult {
    LinearFit fit;
    Eigen::VectorXd shrinkage_factors; // empirical per-feature inclusion proportions
};

// Randomized forward selection ensemble: at each of `depth` steps only mtry
// randomly sampled not-yet-included features are eligible; the one giving the
// largest squared-error reduction after an OLS refit is added.
inline RandfsResult randfs_ensemble(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int mtry, int depth,
                                    int B, std::uint64_t seed) {
    const int n = static_cast<int>(X.rows());
    const int p = static_cast<int>(X.cols());
    if (X.rows() != y.size()) throw argument_error("randfs_ensemble: X rows must match y length");
    if (mtry < 1 || mtry > p) throw argument_error("randfs_ensemble: need 1 <= mtry <= p");
    if (depth < 1 || depth > p) throw argument_error("randfs_ensemble: need 1 <= depth <= p");
    if (B < 1) throw argument_error("randfs_ensemble: B must be positive");
    (void)n;

    std::vector<Eigen::VectorXd> members(static_cast<std::size_t>(B));
    std::vector<std::vector<int>> selections(static_cast<std::size_t>(B));
    parallel_for(members.size(), [&](std::size_t b) {
        Rng rng(derive_seed(seed, b));
        std::vector<int> remaining(static_cast<std::size_t>(p));
        for (int j = 0; j < p; ++j) remaining[static_cast<std::size_t>(j)] = j;
        std::vector<int> selected;
        Eigen::VectorXd coef;

        for (int step = 0; step < depth && !remaining.empty(); ++step) {
            const int k = std::min<int>(mtry, static_cast<int>(remaining.size()));
            const std::vector<int> picks = rng.sample_without_replacement(static_cast<int>(remaining.size()), k);

            int best_feature = -1;
            double best_sse = std::numeric_limits<double>::infinity();
            Eigen::VectorXd best_coef;
            Eigen::MatrixXd design(X.rows(), selected.size() + 1);
            for (std::size_t j = 0; j < selected.size(); ++j) design.col(static_cast<Eigen::Index>(j)) = X.col(selected[j]);
            for (int pick : picks) {
                const int candidate = remaining[static_cast<std::size_t>(pick)];
                design.rightCols(1) = X.col(candidate);
                const Eigen::VectorXd beta_c = pseudo_solve(design, y);
                const double sse = (y - design * beta_c).squaredNorm();
                if (sse < best_sse) {
                    best_sse = sse;
                    best_feature = candidate;
                    best_coef = beta_c;
                }
            }
            selected.push_back(best_feature);
            remaining.erase(std::find(remaining.begin(), remaining.end(), best_feature));
            coef = best_coef;
        }

        Eigen::VectorXd scattered = Eigen::VectorXd::Zero(p);
        for (std::size_t j = 0; j < selected.size(); ++j) scattered(selected[j]) = coef(static_cast<Eigen::Index>(j));
        members[b] = std::move(scattered);
        selections[b] = std::move(selected);
    });

    Eigen::VectorXd sum = Eigen::VectorXd::Zero(p);
    for (const auto& member : members) sum += member;
    Eigen::VectorXd gamma = Eigen::VectorXd::Zero(p);
    for (const auto& sel : selections) {
        for (int j : sel) gamma(j) += 1.0;
    }
    gamma /= static_cast<double>(B);
    return RandfsResult{LinearFit{sum / static_cast<double>(B), FitMethod::randfs, 0.0, 0, false,
                                  "randomized forward selection"},
                        gamma};
}

// k-fold cross-validated MSE over a lambda grid, with one SVD per fold reused
// across the whole grid.  Ties break toward the smaller lambda.
struct RidgeCvResult {
    double best_lambda = 0.0;
    std::vector<double> cv_mse;
};

inline RidgeCvResult ridge_cv(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                              const std::vector<double>& lambdas, int folds, std::uint64_t seed) {
    const int n = static_cast<int>(X.rows());
    if (X.rows() != y.size()) throw argument_error("ridge_cv: X rows must match y length");
    if (folds < 2 || folds > n) throw argument_error("ridge_cv: need 2 <= folds <= n");
    if (lambdas.empty()) throw argument_error("ridge_cv: empty lambda grid");
    for (double l : lambdas) {
        if (!(l > 0.0)) throw argument_error("ridge_cv: lambdas must be positive");
    }

    std::vector<int> perm(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
    Rng rng(seed);
    rng.shuffle(perm);

    std::vector<double> sse(lambdas.size(), 0.0);
    for (int fold = 0; fold < folds; ++fold) {
        const int lo = static_cast<int>(static_cast<std::int64_t>(fold) * n / folds);
        const int hi = static_cast<int>(static_cast<std::int64_t>(fold + 1) * n / folds);
        const int t = hi - lo;
        Eigen::MatrixXd Xtr(n - t, X.cols());
        Eigen::VectorXd ytr(n - t);
        Eigen::MatrixXd Xte(t, X.cols());
        Eigen::VectorXd yte(t);
        int a = 0;
        int e = 0;
        for (int i = 0; i < n; ++i) {
            const int row = perm[static_cast<std::size_t>(i)];
            if (i >= lo && i < hi) {
                Xte.row(e) = X.row(row);
                yte(e++) = y(row);
            } else {
                Xtr.row(a) = X.row(row);
                ytr(a++) = y(row);
            }
        }

        Eigen::BDCSVD<Eigen::MatrixXd> svd(Xtr, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const Eigen::VectorXd uty = svd.matrixU().transpose() * ytr;
        const Eigen::VectorXd& sv = svd.singularValues();
        for (std::size_t li = 0; li < lambdas.size(); ++li) {
            Eigen::VectorXd d(sv.size());
            for (Eigen::Index i = 0; i < sv.size(); ++i) {
                d(i) = sv(i) / (sv(i) * sv(i) + lambdas[li]) * uty(i);
            }
            const Eigen::VectorXd beta = svd.matrixV() * d;
            sse[li] += (yte - Xte * beta).squaredNorm();
        }
    }

    RidgeCvResult result;
    result.cv_mse.resize(lambdas.size());
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t li = 0; li < lambdas.size(); ++li) {
        result.cv_mse[li] = sse[li] / static_cast<double>(n);
        if (result.cv_mse[li] < best) {
            best = result.cv_mse[li];
            result.best_lambda = lambdas[li];
        }
    }
    return result;
}

// Monte Carlo instrumentation of the subsampled OLS ensemble: per-member
// same-index bias and variance terms under Sigma = I, plus the averaged
// coefficients.  Uses the eigendecomposition of the member Gram matrix, with
// an O(s^2) Gram gather when eta = 1.
struct OlsRiskEstimate {
    LinearFit ensemble;
    double mean_bias_same = 0.0;
    double mean_variance_same = 0.0;
};

inline OlsRiskEstimate ols_ensemble_risk_mc(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                            const Eigen::VectorXd& beta, double sigma2,
                                            const SubsampleSpec& spec, std::uint64_t seed) {
    const int n = static_cast<int>(X.rows());
    const int p = static_cast<int>(X.cols());
    spec.validate(n, p);
    if (beta.size() != p) throw argument_error("ols_ensemble_risk_mc: beta must have length p");
    const int s = spec.cols_of(p);
    const int t = spec.rows_of(n);
    const bool full_rows = (t == n);

    // eta = 1 precomputation: member Gram matrices become submatrix gathers.
    Eigen::MatrixXd gram;
    Eigen::VectorXd gram_beta;
    Eigen::VectorXd xty;
    if (full_rows) {
        gram = X.transpose() * X;
        gram_beta = gram * beta;
        xty = X.transpose() * y;
    }

    struct MemberOut {
        Eigen::VectorXd coef;
        double bias = 0.0;
        double variance = 0.0;
    };
    std::vector<MemberOut> members(static_cast<std::size_t>(spec.B));

    parallel_for(members.size(), [&](std::size_t b) {
        const auto draw = detail::draw_subsets(derive_seed(seed, b), n, p, s, t);
        Eigen::MatrixXd wtw(s, s);
        Eigen::VectorXd u(s);  // W'(X_T beta)
        Eigen::VectorXd h(s);  // W'y_T
        if (full_rows) {
            for (int i = 0; i < s; ++i) {
                const int ci = draw.cols[static_cast<std::size_t>(i)];
                u(i) = gram_beta(ci);
                h(i) = xty(ci);
                for (int j = 0; j < s; ++j) wtw(i, j) = gram(ci, draw.cols[static_cast<std::size_t>(j)]);
            }
        } else {
            Eigen::MatrixXd W(t, s);
            Eigen::VectorXd yt(t);
            for (int i = 0; i < t; ++i) {
                const int ri = draw.rows[static_cast<std::size_t>(i)];
                yt(i) = y(ri);
                for (int j = 0; j < s; ++j) W(i, j) = X(ri, draw.cols[static_cast<std::size_t>(j)]);
            }
            wtw = W.transpose() * W;
            Eigen::VectorXd xb(t);
            for (int i = 0; i < t; ++i) xb(i) = X.row(draw.rows[static_cast<std::size_t>(i)]).dot(beta);
            u = W.transpose() * xb;
            h = W.transpose() * yt;
        }

        // Cholesky fast path (Gaussian members are full rank a.s.); eigen
        // fallback keeps pseudoinverse semantics for degenerate draws.
        Eigen::VectorXd cb(s), cc(s);
        double inv_sum = 0.0;
        Eigen::LLT<Eigen::MatrixXd> llt(wtw);
        if (llt.info() == Eigen::Success) {
            cb = llt.solve(u);
            cc = llt.solve(h);
            Eigen::MatrixXd linv = Eigen::MatrixXd::Identity(s, s);
            llt.matrixL().solveInPlace(linv);
            inv_sum = linv.squaredNorm(); // trace((W'W)^-1)
        } else {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(wtw);
            const Eigen::VectorXd& ev = eig.eigenvalues();
            const double rel = static_cast<double>(std::max(t, s)) * std::numeric_limits<double>::epsilon();
            const double tol = ev(ev.size() - 1) > 0.0 ? ev(ev.size() - 1) * rel * rel : 0.0;
            Eigen::VectorXd vu = eig.eigenvectors().transpose() * u;
            Eigen::VectorXd vh = eig.eigenvectors().transpose() * h;
            for (Eigen::Index i = 0; i < ev.size(); ++i) {
                if (ev(i) > tol) {
                    vu(i) /= ev(i);
                    vh(i) /= ev(i);
                    inv_sum += 1.0 / ev(i);
                } else {
                    vu(i) = 0.0;
                    vh(i) = 0.0;
                }
            }
            cb = eig.eigenvectors() * vu;
            cc = eig.eigenvectors() * vh;
        }

        Eigen::VectorXd resid = beta;
        Eigen::VectorXd coef = Eigen::VectorXd::Zero(p);
        for (int j = 0; j < s; ++j) {
            resid(draw.cols[static_cast<std::size_t>(j)]) -= cb(j);
            coef(draw.cols[static_cast<std::size_t>(j)]) = cc(j);
        }
        members[b] = MemberOut{std::move(coef), resid.squaredNorm(), sigma2 * inv_sum};
    });

    OlsRiskEstimate estimate;
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(p);
    for (const auto& member : members) {
        sum += member.coef;
        estimate.mean_bias_same += member.bias;
        estimate.mean_variance_same += member.variance;
    }
    estimate.mean_bias_same /= static_cast<double>(spec.B);
    estimate.mean_variance_same /= static_cast<double>(spec.B);
    estimate.ensemble = LinearFit{sum / static_cast<double>(spec.B), FitMethod::subsample_ensemble, 0.0, 0,
                                  false, "subsampled OLS ensemble (risk MC)"};
    return estimate;
}

} // namespace augbagg
