// augbagg CLI: config-driven experiment runner and SVG plot emitter.
//
// Exit codes: 0 success, 2 config error, 3 data error, 4 internal failure.

#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "augbagg/augbagg.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitInternal = 4;

int cmd_run(const std::string& config_path, int threads, bool full_scale) {
    augbagg::ExperimentConfig config = augbagg::load_config(config_path);
    if (threads >= 0) config.threads = threads;
    config.full_scale = full_scale;
    augbagg::validate_experiment(config);
    const augbagg::RunOutput output = augbagg::run_experiment(config);
    for (const auto& file : output.files) {
        std::cout << output.output_dir << "/" << file << "\n";
    }
    return kExitOk;
}

int cmd_validate(const std::string& config_path) {
    const augbagg::ExperimentConfig config = augbagg::load_config(config_path);
    augbagg::validate_experiment(config);
    std::cout << "ok: " << config.kind << " (seed " << config.seed << ")\n";
    return kExitOk;
}

int cmd_plot(const std::string& csv_path, const augbagg::PlotSpec& spec, const std::string& out_path) {
    augbagg::plot_csv_to_svg(csv_path, spec, out_path);
    std::cout << out_path << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"augmented bagging experiment harness"};
    app.require_subcommand(1);

    std::string config_path;
    int threads = -1;
    bool full_scale = false;
    auto* run = app.add_subcommand("run", "run an experiment from a JSON config");
    run->add_option("config", config_path, "experiment config file")->required();
    run->add_option("--threads", threads, "worker thread override (0 = hardware)");
    run->add_flag("--full", full_scale, "use the large-scale experiment settings");

    std::string validate_path;
    auto* validate = app.add_subcommand("validate-config", "parse and validate a config file");
    validate->add_option("config", validate_path, "experiment config file")->required();

    std::string csv_path, out_path;
    augbagg::PlotSpec spec;
    auto* plot = app.add_subcommand("plot", "render a results CSV as an SVG line chart");
    plot->add_option("--csv", csv_path, "input results CSV")->required();
    plot->add_option("--x", spec.x_column, "x-axis column")->required();
    plot->add_option("--y", spec.y_column, "y-axis column")->required();
    plot->add_option("--series", spec.series_column, "series column (one line per value)");
    plot->add_option("--yerr", spec.yerr_column, "error-bar column (+/- 1 value)");
    plot->add_option("--title", spec.title, "chart title");
    plot->add_option("-o,--out", out_path, "output SVG path")->required();

    auto* version = app.add_subcommand("version", "print the software version");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (run->parsed()) return cmd_run(config_path, threads, full_scale);
        if (validate->parsed()) return cmd_validate(validate_path);
        if (plot->parsed()) return cmd_plot(csv_path, spec, out_path);
        if (version->parsed()) {
            std::cout << "augbagg " << augbagg::kVersion << "\n";
            return kExitOk;
        }
    } catch (const augbagg::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const augbagg::argument_error& e) {
        std::cerr << "argument error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const augbagg::io_error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const augbagg::format_error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const augbagg::policy_error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitInternal;
}
