#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "augbagg/experiment.hpp"

namespace augbagg {

namespace detail {

// Thread-limit override scoped to one run.
struct ThreadLimitGuard {
    explicit ThreadLimitGuard(int limit) { set_thread_limit(limit); }
    ~ThreadLimitGuard() { set_thread_limit(0); }
};

struct AggregateRow {
    std::vector<std::string> keys;
    std::vector<double> metrics;
};

// Groups rows by key tuple in first-appearance order and emits
// keys..., n, mean_<metric>, sd_<metric> columns.
inline std::string aggregate_csv(const std::vector<std::string>& key_names,
                                 const std::vector<std::string>& metric_names,
                                 const std::vector<AggregateRow>& rows) {
    struct Group {
        std::vector<std::string> keys;
        std::vector<std::vector<double>> values;
    };
    std::map<std::vector<std::string>, std::size_t> index;
    std::vector<Group> groups;
    for (const auto& row : rows) {
        auto it = index.find(row.keys);
        if (it == index.end()) {
            it = index.emplace(row.keys, groups.size()).first;
            groups.push_back(Group{row.keys, std::vector<std::vector<double>>(metric_names.size())});
        }
        for (std::size_t m = 0; m < metric_names.size(); ++m) {
            groups[it->second].values[m].push_back(row.metrics[m]);
        }
    }

    std::ostringstream out;
    std::vector<std::string> header = key_names;
    header.push_back("n");
    for (const auto& name : metric_names) {
        header.push_back("mean_" + name);
        header.push_back("sd_" + name);
    }
    write_csv_row(out, header);
    for (const auto& group : groups) {
        std::vector<std::string> fields = group.keys;
        fields.push_back(std::to_string(group.values.front().size()));
        for (std::size_t m = 0; m < metric_names.size(); ++m) {
            const auto& vals = group.values[m];
            fields.push_back(format_double(mean(vals)));
            fields.push_back(format_double(std::sqrt(sample_variance(vals))));
        }
        write_csv_row(out, fields);
    }
    return out.str();
}

inline CsvTable table_from_rows(std::vector<std::string> header, std::vector<std::vector<std::string>> rows) {
    CsvTable table;
    table.header = std::move(header);
    table.rows = std::move(rows);
    return table;
}

inline CsvTable parse_csv_text(const std::string& text) {
    std::istringstream in(text);
    CsvTable table;
    std::vector<std::string> record;
    std::size_t line = 1;
    read_csv_record(in, table.header, line);
    while (read_csv_record(in, record, ++line)) {
        if (record.size() == 1 && record[0].empty()) continue;
        table.rows.push_back(record);
    }
    return table;
}

inline CsvTable filter_rows(const CsvTable& table, const std::string& column, const std::string& value) {
    const int idx = table.column(column);
    CsvTable out;
    out.header = table.header;
    for (const auto& row : table.rows) {
        if (idx >= 0 && row[static_cast<std::size_t>(idx)] == value) out.rows.push_back(row);
    }
    return out;
}

} // namespace detail

struct RunOutput {
    std::string output_dir;
    std::vector<std::string> files; // relative to output_dir, manifest last
};

namespace detail {

struct ExperimentFiles {
    std::string raw_csv;
    std::string aggregated_csv;
    std::vector<std::pair<std::string, std::string>> plots; // (filename, svg)
};

inline ExperimentFiles emit_fig(const ExperimentConfig& config, bool correlation_grid) {
    const FigCurvesParams params = parse_fig_params(config, correlation_grid);
    const std::vector<FigRow> rows = run_fig_curves(params, config.seed);

    std::ostringstream raw;
    write_csv_row(raw, {"snr", "series", "q", "r", "rep", "test_mse", "relative_test_error"});
    std::vector<AggregateRow> agg;
    for (const auto& r : rows) {
        write_csv_row(raw, {format_double(r.snr), r.series, std::to_string(r.q), format_double(r.r),
                            std::to_string(r.rep), format_double(r.test_mse), format_double(r.relative_test_error)});
        agg.push_back(AggregateRow{{format_double(r.snr), r.series, std::to_string(r.q), format_double(r.r)},
                                   {r.test_mse, r.relative_test_error}});
    }

    ExperimentFiles files;
    files.raw_csv = raw.str();
    files.aggregated_csv =
        aggregate_csv({"snr", "series", "q", "r"}, {"test_mse", "relative_test_error"}, agg);

    if (config.plots) {
        const CsvTable table = parse_csv_text(files.aggregated_csv);
        for (double snr : params.snr_grid) {
            const CsvTable slice = filter_rows(table, "snr", format_double(snr));
            PlotSpec spec;
            spec.x_column = "q";
            spec.y_column = "mean_relative_test_error";
            spec.series_column = "series";
            spec.yerr_column = "sd_relative_test_error";
            spec.title = "relative test error vs q (snr=" + format_double(snr) + ")";
            files.plots.emplace_back("plot_snr" + format_double(snr) + ".svg", render_line_plot(slice, spec));
        }
    }
    return files;
}

inline ExperimentFiles emit_ridge(const ExperimentConfig& config) {
    const RidgeEquivParams params = parse_ridge_params(config);
    const RidgeEquivOutput output = run_ridge_equivalence(params, config.seed);

    std::ostringstream raw;
    write_csv_row(raw, {"snr", "lambda_opt", "q", "rep", "test_mse", "relative_test_error"});
    std::vector<AggregateRow> agg;
    for (const auto& r : output.rows) {
        write_csv_row(raw, {format_double(r.snr), format_double(r.lambda_opt), std::to_string(r.q),
                            std::to_string(r.rep), format_double(r.test_mse), format_double(r.relative_test_error)});
        agg.push_back(AggregateRow{{format_double(r.snr), format_double(r.lambda_opt), std::to_string(r.q)},
                                   {r.test_mse, r.relative_test_error}});
    }

    ExperimentFiles files;
    files.raw_csv = raw.str();
    files.aggregated_csv =
        aggregate_csv({"snr", "lambda_opt", "q"}, {"test_mse", "relative_test_error"}, agg);
    if (config.plots) {
        const CsvTable table = parse_csv_text(files.aggregated_csv);
        PlotSpec spec;
        spec.x_column = "q";
        spec.y_column = "mean_relative_test_error";
        spec.series_column = "snr";
        spec.yerr_column = "sd_relative_test_error";
        spec.title = "augmented min-norm: relative test error vs q";
        files.plots.emplace_back("plot_rte_vs_q.svg", render_line_plot(table, spec));
    }
    return files;
}

inline ExperimentFiles emit_ols(const ExperimentConfig& config) {
    const OlsRiskParams params = parse_ols_params(config);
    const std::vector<OlsRiskRow> rows = run_ols_risk(params, config.seed);

    std::ostringstream raw;
    write_csv_row(raw, {"alpha", "rep", "bias_same_mc", "variance_same_mc", "bias_same_limit",
                        "variance_same_limit", "ensemble_risk"});
    std::vector<AggregateRow> agg;
    for (const auto& r : rows) {
        write_csv_row(raw, {format_double(r.alpha), std::to_string(r.rep), format_double(r.bias_same_mc),
                            format_double(r.variance_same_mc), format_double(r.bias_same_limit),
                            format_double(r.variance_same_limit), format_double(r.ensemble_risk)});
        agg.push_back(AggregateRow{{format_double(r.alpha)},
                                   {r.bias_same_mc, r.variance_same_mc, r.bias_same_limit, r.variance_same_limit,
                                    r.ensemble_risk}});
    }

    ExperimentFiles files;
    files.raw_csv = raw.str();
    files.aggregated_csv = aggregate_csv({"alpha"},
                                         {"bias_same_mc", "variance_same_mc", "bias_same_limit",
                                          "variance_same_limit", "ensemble_risk"},
                                         agg);
    if (config.plots) {
        // long format: one series per bias/variance curve (MC and limit)
        std::vector<std::vector<std::string>> long_rows;
        const CsvTable table = parse_csv_text(files.aggregated_csv);
        const int ia = table.column("alpha");
        const auto add = [&](const std::string& series, const std::string& col) {
            const int ic = table.column(col);
            for (const auto& row : table.rows) {
                long_rows.push_back({row[static_cast<std::size_t>(ia)], series, row[static_cast<std::size_t>(ic)]});
            }
        };
        add("bias (mc)", "mean_bias_same_mc");
        add("bias (limit)", "mean_bias_same_limit");
        add("variance (mc)", "mean_variance_same_mc");
        add("variance (limit)", "mean_variance_same_limit");
        PlotSpec spec;
        spec.x_column = "alpha";
        spec.y_column = "value";
        spec.series_column = "series";
        spec.title = "same-index bias/variance terms vs alpha";
        files.plots.emplace_back("plot_risk_terms.svg",
                                 render_line_plot(table_from_rows({"alpha", "series", "value"}, long_rows), spec));
    }
    return files;
}

inline ExperimentFiles emit_realdata(const ExperimentConfig& config) {
    const RealdataParams params = parse_realdata_params(config);
    const std::vector<RealdataRow> rows = run_realdata(params, config.seed);

    std::ostringstream raw;
    write_csv_row(raw, {"proportion", "rep", "q", "r", "err_bagging", "err_augbagg", "rte"});
    std::vector<AggregateRow> agg;
    for (const auto& r : rows) {
        write_csv_row(raw, {format_double(r.proportion), std::to_string(r.rep), std::to_string(r.q),
                            format_double(r.r), format_double(r.err_bagging), format_double(r.err_augbagg),
                            format_double(r.rte)});
        agg.push_back(AggregateRow{{format_double(r.proportion)}, {r.err_bagging, r.err_augbagg, r.rte}});
    }

    ExperimentFiles files;
    files.raw_csv = raw.str();
    files.aggregated_csv = aggregate_csv({"proportion"}, {"err_bagging", "err_augbagg", "rte"}, agg);
    if (config.plots) {
        const CsvTable table = parse_csv_text(files.aggregated_csv);
        PlotSpec spec;
        spec.x_column = "proportion";
        spec.y_column = "mean_rte";
        spec.yerr_column = "sd_rte";
        spec.title = "relative test error improvement vs injected response noise";
        files.plots.emplace_back("plot_rte.svg", render_line_plot(table, spec));
    }
    return files;
}

inline ExperimentFiles emit_importance(const ExperimentConfig& config) {
    const SweepConfig params = parse_sweep_params(config);
    const SweepOutput output = rejection_rate_sweep(params, config.seed);

    std::ostringstream raw;
    write_csv_row(raw, {"snr", "q", "mode", "replacement", "rep", "T", "sigma2_hat", "z", "p_value", "reject"});
    for (const auto& r : output.rows) {
        write_csv_row(raw, {format_double(r.snr), std::to_string(r.q), r.mode, r.replacement,
                            std::to_string(r.rep), format_double(r.result.T), format_double(r.result.sigma2_hat),
                            format_double(r.result.z), format_double(r.result.p_value),
                            r.result.reject ? "1" : "0"});
    }

    std::ostringstream agg;
    write_csv_row(agg, {"snr", "q", "mode", "replacement", "reps", "rejections", "proportion",
                        "binomial_ci_low", "binomial_ci_high"});
    for (const auto& c : output.cells) {
        write_csv_row(agg, {format_double(c.snr), std::to_string(c.q), c.mode, c.replacement,
                            std::to_string(c.reps), std::to_string(c.rejections), format_double(c.proportion),
                            format_double(c.ci_low), format_double(c.ci_high)});
    }

    ExperimentFiles files;
    files.raw_csv = raw.str();
    files.aggregated_csv = agg.str();
    if (config.plots) {
        // one series per (mode, replacement, q) combination across the SNR grid
        std::vector<std::vector<std::string>> long_rows;
        for (const auto& c : output.cells) {
            long_rows.push_back({format_double(c.snr),
                                 c.mode + "/" + c.replacement + " q=" + std::to_string(c.q),
                                 format_double(c.proportion)});
        }
        PlotSpec spec;
        spec.x_column = "snr";
        spec.y_column = "rejection proportion";
        spec.series_column = "series";
        spec.title = "null rejection rate";
        files.plots.emplace_back(
            "plot_rejection_rates.svg",
            render_line_plot(table_from_rows({"snr", "series", "rejection proportion"}, long_rows), spec));
    }
    return files;
}

} // namespace detail

// Executes the configured experiment and writes raw.csv, aggregated.csv,
// optional SVG plots, and manifest.json under the output directory.  When a
// manifest from an identical (config, software version) already exists, the
// fresh output hashes must match it.
inline RunOutput run_experiment(const ExperimentConfig& config) {
    detail::ThreadLimitGuard guard(config.threads);

    detail::ExperimentFiles files;
    if (config.kind == "fig1-augbagg-curves") files = detail::emit_fig(config, false);
    else if (config.kind == "fig2-correlation-grid") files = detail::emit_fig(config, true);
    else if (config.kind == "ridge-equivalence") files = detail::emit_ridge(config);
    else if (config.kind == "ols-risk-asymptotics") files = detail::emit_ols(config);
    else if (config.kind == "realdata-rte") files = detail::emit_realdata(config);
    else if (config.kind == "importance-rejection") files = detail::emit_importance(config);
    else throw config_error("config.kind: unknown experiment kind '" + config.kind + "'");

    namespace fs = std::filesystem;
    fs::create_directories(config.output_dir);

    char hash_hex[32];
    std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(config.source_text)));

    nlohmann::json previous;
    const std::string manifest_path = (fs::path(config.output_dir) / "manifest.json").string();
    if (fs::exists(manifest_path)) {
        try {
            previous = nlohmann::json::parse(read_file(manifest_path));
        } catch (...) {
            previous = nlohmann::json();
        }
    }

    std::vector<std::pair<std::string, std::string>> outputs; // (relative name, contents)
    outputs.emplace_back("raw.csv", std::move(files.raw_csv));
    outputs.emplace_back("aggregated.csv", std::move(files.aggregated_csv));
    for (auto& plot : files.plots) outputs.emplace_back(std::move(plot.first), std::move(plot.second));

    nlohmann::json manifest;
    manifest["format"] = "augbagg-manifest";
    manifest["software_version"] = kVersion;
    manifest["kind"] = config.kind;
    manifest["seed"] = config.seed;
    manifest["config_hash"] = std::string(hash_hex);
    manifest["outputs"] = nlohmann::json::array();

    RunOutput result;
    result.output_dir = config.output_dir;
    for (const auto& [name, contents] : outputs) {
        const std::string path = (fs::path(config.output_dir) / name).string();
        write_file(path, contents);
        // verify what landed on disk, not what we meant to write
        const std::string readback = read_file(path);
        char file_hash[32];
        std::snprintf(file_hash, sizeof(file_hash), "%016llx",
                      static_cast<unsigned long long>(fnv1a64(readback)));
        manifest["outputs"].push_back({{"path", name}, {"fnv1a64", std::string(file_hash)}});
        result.files.push_back(name);
    }

    if (previous.is_object() && previous.value("config_hash", "") == hash_hex &&
        previous.value("software_version", "") == kVersion && previous.contains("outputs")) {
        std::map<std::string, std::string> old_hashes;
        for (const auto& entry : previous.at("outputs")) {
            old_hashes[entry.value("path", "")] = entry.value("fnv1a64", "");
        }
        for (const auto& entry : manifest.at("outputs")) {
            const auto it = old_hashes.find(entry.at("path").get<std::string>());
            if (it != old_hashes.end() && it->second != entry.at("fnv1a64").get<std::string>()) {
                throw std::runtime_error("run_experiment: rerun with identical config produced different '" +
                                         it->first + "' (determinism violation)");
            }
        }
    }

    write_file(manifest_path, manifest.dump(2) + "\n");
    result.files.push_back("manifest.json");
    return result;
}

} // namespace augbagg
