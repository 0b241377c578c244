#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "augbagg/csv.hpp"
#include "augbagg/errors.hpp"
#include "augbagg/rng.hpp"

namespace augbagg {

enum class FeatureKind { continuous, categorical_encoded };
enum class FeatureOrigin { original, noise };

struct FeatureMeta {
    std::string name;
    FeatureKind kind = FeatureKind::continuous;
    FeatureOrigin origin = FeatureOrigin::original;
};

// Tabular regression data: design matrix, response, per-feature metadata.
// Immutable after construction; every operation returns a new value.
class Dataset {
  public:
    Dataset(Eigen::MatrixXd X, Eigen::VectorXd y, std::vector<FeatureMeta> meta,
            std::optional<double> sigma2_eps = std::nullopt)
        : X_(std::move(X)), y_(std::move(y)), meta_(std::move(meta)), sigma2_eps_(sigma2_eps) {
        if (X_.rows() != y_.size()) throw argument_error("Dataset: row count of X must equal length of y");
        if (static_cast<Eigen::Index>(meta_.size()) != X_.cols()) {
            throw argument_error("Dataset: feature_meta must have exactly p entries");
        }
        if (sigma2_eps_ && *sigma2_eps_ < 0.0) throw argument_error("Dataset: sigma2_eps must be nonnegative");
        sigma2_y_hat_ = response_variance(y_);
    }

    const Eigen::MatrixXd& X() const { return X_; }
    const Eigen::VectorXd& y() const { return y_; }
    const std::vector<FeatureMeta>& feature_meta() const { return meta_; }
    std::optional<double> sigma2_eps() const { return sigma2_eps_; }
    double sigma2_y_hat() const { return sigma2_y_hat_; }
    Eigen::Index n() const { return X_.rows(); }
    Eigen::Index p() const { return X_.cols(); }

    std::vector<int> continuous_original_features() const {
        std::vector<int> idx;
        for (std::size_t j = 0; j < meta_.size(); ++j) {
            if (meta_[j].kind == FeatureKind::continuous && meta_[j].origin == FeatureOrigin::original) {
                idx.push_back(static_cast<int>(j));
            }
        }
        return idx;
    }

    Dataset subset_rows(const std::vector<int>& rows) const {
        Eigen::MatrixXd Xs(static_cast<Eigen::Index>(rows.size()), X_.cols());
        Eigen::VectorXd ys(static_cast<Eigen::Index>(rows.size()));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            Xs.row(static_cast<Eigen::Index>(i)) = X_.row(rows[i]);
            ys(static_cast<Eigen::Index>(i)) = y_(rows[i]);
        }
        return Dataset(std::move(Xs), std::move(ys), meta_, sigma2_eps_);
    }

    // Unbiased sample variance; 0 when fewer than two observations.
    static double response_variance(const Eigen::VectorXd& y) {
        const Eigen::Index n = y.size();
        if (n < 2) return 0.0;
        const double m = y.mean();
        return (y.array() - m).square().sum() / static_cast<double>(n - 1);
    }

  private:
    Eigen::MatrixXd X_;
    Eigen::VectorXd y_;
    std::vector<FeatureMeta> meta_;
    std::optional<double> sigma2_eps_;
    double sigma2_y_hat_ = 0.0;
};

struct SplitPair {
    Dataset train;
    Dataset test;
};

enum class CategoricalPolicy { one_hot, reject };

namespace detail {

struct RawColumn {
    std::string name;
    bool numeric = true;
    std::vector<double> values;    // when numeric
    std::vector<std::string> text; // when categorical
};

} // namespace detail

// RFC-4180-style CSV loader.  First row is the header, '.' decimal separator,
// no missing values.  Categorical columns are one-hot expanded or rejected.
inline Dataset load_csv(const std::string& path, const std::string& response_column,
                        CategoricalPolicy policy = CategoricalPolicy::one_hot) {
    const CsvTable table = read_csv(path);
    const int resp_idx = table.column(response_column);
    if (resp_idx < 0) throw format_error("load_csv: response column '" + response_column + "' not found");
    if (table.rows.empty()) throw format_error("load_csv: no data rows in " + path);

    const std::size_t ncols = table.header.size();
    std::vector<detail::RawColumn> cols(ncols);
    for (std::size_t j = 0; j < ncols; ++j) cols[j].name = table.header[j];

    // Missing values are a hard error, reported with their location.
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        for (std::size_t j = 0; j < ncols; ++j) {
            if (table.rows[i][j].empty()) {
                throw format_error("load_csv: missing value at row " + std::to_string(i + 2) +
                                   ", column '" + cols[j].name + "'");
            }
        }
    }

    // Column is numeric iff every cell parses as a finite double.
    for (std::size_t j = 0; j < ncols; ++j) {
        for (const auto& row : table.rows) {
            double v;
            if (!parse_double(row[j], v)) {
                // Distinguish non-numeric text (categorical candidate) from
                // explicit non-finite cells, which are always rejected.
                std::string lowered = row[j];
                std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                               [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
                if (lowered == "nan" || lowered == "inf" || lowered == "-inf" || lowered == "+inf" ||
                    lowered == "infinity" || lowered == "-nan") {
                    throw format_error("load_csv: non-finite value at row " +
                                       std::to_string(&row - table.rows.data() + 2) + ", column '" + cols[j].name + "'");
                }
                cols[j].numeric = false;
                break;
            }
        }
    }

    const auto& resp_col = cols[static_cast<std::size_t>(resp_idx)];
    if (!resp_col.numeric) {
        throw format_error("load_csv: response column '" + response_column + "' must be numeric");
    }

    for (std::size_t j = 0; j < ncols; ++j) {
        auto& col = cols[j];
        for (std::size_t i = 0; i < table.rows.size(); ++i) {
            const std::string& cell = table.rows[i][j];
            if (col.numeric) {
                double v;
                if (!parse_double(cell, v)) {
                    throw format_error("load_csv: invalid numeric value '" + cell + "' at row " +
                                       std::to_string(i + 2) + ", column '" + col.name + "'");
                }
                col.values.push_back(v);
            } else {
                col.text.push_back(cell);
            }
        }
    }

    const Eigen::Index n = static_cast<Eigen::Index>(table.rows.size());
    std::vector<std::pair<Eigen::VectorXd, FeatureMeta>> features;
    for (std::size_t j = 0; j < ncols; ++j) {
        if (static_cast<int>(j) == resp_idx) continue;
        auto& col = cols[j];
        if (col.numeric) {
            Eigen::VectorXd v = Eigen::Map<Eigen::VectorXd>(col.values.data(), n);
            features.emplace_back(std::move(v), FeatureMeta{col.name, FeatureKind::continuous, FeatureOrigin::original});
        } else {
            if (policy == CategoricalPolicy::reject) {
                throw policy_error("load_csv: categorical column '" + col.name + "' rejected by policy");
            }
            std::vector<std::string> levels(col.text);
            std::sort(levels.begin(), levels.end());
            levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
            for (const auto& level : levels) {
                Eigen::VectorXd ind(n);
                for (Eigen::Index i = 0; i < n; ++i) ind(i) = (col.text[static_cast<std::size_t>(i)] == level) ? 1.0 : 0.0;
                features.emplace_back(std::move(ind), FeatureMeta{col.name + "=" + level,
                                                                  FeatureKind::categorical_encoded,
                                                                  FeatureOrigin::original});
            }
        }
    }

    Eigen::MatrixXd X(n, static_cast<Eigen::Index>(features.size()));
    std::vector<FeatureMeta> meta;
    meta.reserve(features.size());
    for (std::size_t j = 0; j < features.size(); ++j) {
        X.col(static_cast<Eigen::Index>(j)) = features[j].first;
        meta.push_back(features[j].second);
    }
    Eigen::VectorXd y = Eigen::Map<Eigen::VectorXd>(cols[static_cast<std::size_t>(resp_idx)].values.data(), n);
    return Dataset(std::move(X), std::move(y), std::move(meta));
}

// Same CSV dialect as load_csv; response written as the last column.
inline void write_csv(const Dataset& data, const std::string& path, const std::string& response_name = "y") {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write file: " + path);
    std::vector<std::string> fields;
    for (const auto& m : data.feature_meta()) fields.push_back(m.name);
    fields.push_back(response_name);
    write_csv_row(out, fields);
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        fields.clear();
        for (Eigen::Index j = 0; j < data.p(); ++j) fields.push_back(format_double(data.X()(i, j)));
        fields.push_back(format_double(data.y()(i)));
        write_csv_row(out, fields);
    }
    if (!out) throw io_error("write failed: " + path);
}

// Uniformly random train/test partition, fully determined by the seed.
inline SplitPair split(const Dataset& data, double test_fraction, std::uint64_t seed) {
    const Eigen::Index n = data.n();
    if (n < 2) throw argument_error("split: need at least 2 observations");
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw argument_error("split: test_fraction must be in (0,1)");
    const auto n_test = static_cast<Eigen::Index>(std::llround(static_cast<double>(n) * test_fraction));
    if (n_test < 1 || n_test >= n) throw argument_error("split: fraction leaves an empty side");

    std::vector<int> idx(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = static_cast<int>(i);
    Rng rng(seed);
    rng.shuffle(idx);
    std::vector<int> test_idx(idx.begin(), idx.begin() + n_test);
    std::vector<int> train_idx(idx.begin() + n_test, idx.end());
    std::sort(test_idx.begin(), test_idx.end());
    std::sort(train_idx.begin(), train_idx.end());
    return SplitPair{data.subset_rows(train_idx), data.subset_rows(test_idx)};
}

// Adds iid Gaussian noise to the response with variance proportion * sigma2_y_hat
// of the input.  When the true noise variance is tracked it grows by the same
// amount, keeping it the irreducible variance of the perturbed response.
inline Dataset inject_response_noise(const Dataset& data, double proportion, std::uint64_t seed) {
    if (proportion < 0.0) throw argument_error("inject_response_noise: proportion must be nonnegative");
    if (proportion == 0.0) {
        return Dataset(data.X(), data.y(), data.feature_meta(), data.sigma2_eps());
    }
    const double noise_var = proportion * data.sigma2_y_hat();
    const double sd = std::sqrt(noise_var);
    Rng rng(seed);
    Eigen::VectorXd y = data.y();
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += rng.normal(0.0, sd);
    std::optional<double> sigma2_eps = data.sigma2_eps();
    if (sigma2_eps) sigma2_eps = *sigma2_eps + noise_var;
    return Dataset(data.X(), std::move(y), data.feature_meta(), sigma2_eps);
}

} // namespace augbagg
