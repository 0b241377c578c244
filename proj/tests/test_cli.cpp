#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "augbagg/augbagg.hpp"

using namespace augbagg;
namespace fs = std::filesystem;

namespace {

std::string tiny_fig1_config(const std::string& output_dir, int reps = 2, const std::string& extra = "") {
    return std::string("{\n")
        + "  \"version\": 1,\n"
          "  \"kind\": \"fig1-augbagg-curves\",\n"
          "  \"seed\": 11,\n"
          "  \"output_dir\": \"" + output_dir + "\",\n"
        + extra
        + "  \"params\": {\n"
          "    \"snr_grid\": [0.05],\n"
          "    \"q_grid\": [1, 2],\n"
          "    \"n\": 30,\n"
          "    \"n_test\": 20,\n"
          "    \"reps\": " + std::to_string(reps) + ",\n"
          "    \"B\": 5,\n"
          "    \"forest_mtry\": [1, 2]\n"
          "  }\n"
          "}\n";
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("config parse and validation diagnostics carry field paths", "[cli]") {
    REQUIRE_THROWS_AS(parse_config_text("{not json"), config_error);

    auto expect_message = [](const std::string& text, const std::string& needle) {
        try {
            const ExperimentConfig config = parse_config_text(text);
            validate_experiment(config);
            FAIL("expected config_error for: " + needle);
        } catch (const config_error& e) {
            REQUIRE(std::string(e.what()).find(needle) != std::string::npos);
        }
    };

    expect_message(R"({"version":1,"kind":"fig1-augbagg-curves","output_dir":"o"})", "config.seed");
    expect_message(R"({"version":1,"kind":"nope","seed":1,"output_dir":"o"})", "config.kind");
    expect_message(R"({"version":2,"kind":"fig1-augbagg-curves","seed":1,"output_dir":"o"})", "config.version");
    expect_message(R"({"version":1,"kind":"fig1-augbagg-curves","seed":1,"output_dir":"o","bogus":2})",
                   "config.bogus");
    expect_message(
        R"({"version":1,"kind":"fig1-augbagg-curves","seed":1,"output_dir":"o","params":{"snr_grid":[]}})",
        "params.snr_grid");
    expect_message(
        R"({"version":1,"kind":"fig1-augbagg-curves","seed":1,"output_dir":"o","params":{"weird":3}})",
        "params.weird");
    expect_message(
        R"({"version":1,"kind":"fig1-augbagg-curves","seed":1,"output_dir":"o","params":{"rho":1.5}})",
        "params.rho");
    expect_message(
        R"({"version":1,"kind":"ols-risk-asymptotics","seed":1,"output_dir":"o","params":{"alpha_grid":[0.9],"gamma":2.0}})",
        "params.alpha_grid");
}

TEST_CASE("all experiment kinds have valid defaults", "[cli]") {
    for (const auto& kind : experiment_kinds()) {
        if (kind == "realdata-rte") continue; // needs a csv path
        const std::string text = "{\"version\":1,\"kind\":\"" + kind +
                                 "\",\"seed\":1,\"output_dir\":\"o\"}";
        REQUIRE_NOTHROW(validate_experiment(parse_config_text(text)));
    }
}

#ifdef AUGBAGG_CONFIG_DIR
TEST_CASE("shipped sample configs validate", "[cli]") {
    int seen = 0;
    for (const auto& entry : fs::directory_iterator(AUGBAGG_CONFIG_DIR)) {
        if (entry.path().extension() != ".json") continue;
        ++seen;
        INFO(entry.path().string());
        REQUIRE_NOTHROW(validate_experiment(load_config(entry.path().string())));
    }
    REQUIRE(seen >= 6);
}
#endif

TEST_CASE("fig1 run emits the expected cells and reproducible files", "[cli]") {
    const fs::path dir = fresh_dir("augbagg_fig1");
    ExperimentConfig config = parse_config_text(tiny_fig1_config(dir.string()));
    validate_experiment(config);

    const RunOutput output = run_experiment(config);
    REQUIRE(fs::exists(dir / "raw.csv"));
    REQUIRE(fs::exists(dir / "aggregated.csv"));
    REQUIRE(fs::exists(dir / "manifest.json"));

    const CsvTable raw = read_csv((dir / "raw.csv").string());
    // per rep: bagging + 2 forests + 2 AugBagg cells
    REQUIRE(raw.rows.size() == 2 * 5);
    int augbagg_rows = 0;
    for (const auto& row : raw.rows) {
        if (row[1].rfind("AB(", 0) == 0) ++augbagg_rows;
    }
    REQUIRE(augbagg_rows == 2 * 2);

    // rerun: byte-identical raw output
    const std::string first = read_file((dir / "raw.csv").string());
    REQUIRE_NOTHROW(run_experiment(config));
    REQUIRE(read_file((dir / "raw.csv").string()) == first);

    // manifest hashes match the files on disk
    const auto manifest = nlohmann::json::parse(read_file((dir / "manifest.json").string()));
    REQUIRE(manifest.at("config_hash").get<std::string>().size() == 16);
    for (const auto& entry : manifest.at("outputs")) {
        const std::string contents = read_file((dir / entry.at("path").get<std::string>()).string());
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(contents)));
        REQUIRE(entry.at("fnv1a64").get<std::string>() == buf);
    }
}

TEST_CASE("raw output is independent of the thread count", "[cli]") {
    const fs::path dir1 = fresh_dir("augbagg_thr1");
    const fs::path dir2 = fresh_dir("augbagg_thr2");

    ExperimentConfig c1 = parse_config_text(tiny_fig1_config(dir1.string(), 3, "  \"threads\": 1,\n"));
    ExperimentConfig c2 = parse_config_text(tiny_fig1_config(dir2.string(), 3, "  \"threads\": 4,\n"));
    run_experiment(c1);
    run_experiment(c2);
    REQUIRE(read_file((dir1 / "raw.csv").string()) == read_file((dir2 / "raw.csv").string()));
    REQUIRE(read_file((dir1 / "aggregated.csv").string()) == read_file((dir2 / "aggregated.csv").string()));
}

TEST_CASE("aggregated statistics equal recomputation from the raw csv", "[cli]") {
    const fs::path dir = fresh_dir("augbagg_agg");
    ExperimentConfig config = parse_config_text(tiny_fig1_config(dir.string(), 4));
    run_experiment(config);

    const CsvTable raw = read_csv((dir / "raw.csv").string());
    const CsvTable agg = read_csv((dir / "aggregated.csv").string());
    const int k_snr = raw.column("snr"), k_series = raw.column("series"), k_q = raw.column("q"),
              k_r = raw.column("r"), k_mse = raw.column("test_mse"), k_rte = raw.column("relative_test_error");
    REQUIRE(k_mse >= 0);

    for (const auto& arow : agg.rows) {
        std::vector<double> mses, rtes;
        for (const auto& rrow : raw.rows) {
            if (rrow[static_cast<std::size_t>(k_snr)] == arow[0] && rrow[static_cast<std::size_t>(k_series)] == arow[1] &&
                rrow[static_cast<std::size_t>(k_q)] == arow[2] && rrow[static_cast<std::size_t>(k_r)] == arow[3]) {
                double v;
                parse_double(rrow[static_cast<std::size_t>(k_mse)], v);
                mses.push_back(v);
                parse_double(rrow[static_cast<std::size_t>(k_rte)], v);
                rtes.push_back(v);
            }
        }
        REQUIRE(std::to_string(mses.size()) == arow[4]); // n column
        double mean_mse, sd_mse, mean_rte;
        parse_double(arow[5], mean_mse);
        parse_double(arow[6], sd_mse);
        parse_double(arow[7], mean_rte);
        REQUIRE_THAT(mean(mses), Catch::Matchers::WithinRel(mean_mse, 1e-12));
        REQUIRE_THAT(std::sqrt(sample_variance(mses)), Catch::Matchers::WithinAbs(sd_mse, 1e-12));
        REQUIRE_THAT(mean(rtes), Catch::Matchers::WithinRel(mean_rte, 1e-12));
    }
}

TEST_CASE("plots render one polyline per series with legend entries", "[cli]") {
    const fs::path dir = fresh_dir("augbagg_plot");
    const std::string csv =
        "q,series,value\n"
        "1,\"r=0\",1.0\n2,\"r=0\",1.1\n"
        "1,\"r=0.2\",1.2\n2,\"r=0.2\",1.3\n"
        "1,\"r=0.7\",1.4\n2,\"r=0.7\",1.5\n"
        "1,\"r=0.99\",1.6\n2,\"r=0.99\",1.7\n";
    const std::string csv_path = (dir / "four.csv").string();
    write_file(csv_path, csv);

    PlotSpec spec;
    spec.x_column = "q";
    spec.y_column = "value";
    spec.series_column = "series";
    const std::string svg = render_line_plot(read_csv(csv_path), spec);

    std::size_t polylines = 0, pos = 0;
    while ((pos = svg.find("<polyline", pos)) != std::string::npos) {
        ++polylines;
        pos += 9;
    }
    REQUIRE(polylines == 4);
    for (const std::string& label : {"r=0", "r=0.2", "r=0.7", "r=0.99"}) {
        REQUIRE(svg.find(">" + label + "<") != std::string::npos);
    }

    // single series: exactly one polyline
    write_file((dir / "one.csv").string(), "x,y\n1,2\n2,3\n");
    PlotSpec single;
    single.x_column = "x";
    single.y_column = "y";
    const std::string one = render_line_plot(read_csv((dir / "one.csv").string()), single);
    REQUIRE(one.find("<polyline") != std::string::npos);
    REQUIRE(one.find("<polyline") == one.rfind("<polyline"));

    // error paths
    write_file((dir / "empty.csv").string(), "x,y\n");
    REQUIRE_THROWS_AS(render_line_plot(read_csv((dir / "empty.csv").string()), single), argument_error);
    PlotSpec bad;
    bad.x_column = "nope";
    bad.y_column = "y";
    REQUIRE_THROWS_AS(render_line_plot(read_csv((dir / "one.csv").string()), bad), argument_error);
}

TEST_CASE("run with plots writes svg files listed in the manifest", "[cli]") {
    const fs::path dir = fresh_dir("augbagg_plots_on");
    ExperimentConfig config = parse_config_text(tiny_fig1_config(dir.string(), 2, "  \"plots\": true,\n"));
    const RunOutput output = run_experiment(config);
    bool has_svg = false;
    for (const auto& file : output.files) has_svg = has_svg || file.find(".svg") != std::string::npos;
    REQUIRE(has_svg);
    REQUIRE(fs::exists(dir / "plot_snr0.05.svg"));
}

TEST_CASE("importance-rejection kind emits the documented table schema", "[cli]") {
    const fs::path dir = fresh_dir("augbagg_imp");
    const std::string text = "{\"version\":1,\"kind\":\"importance-rejection\",\"seed\":5,\"output_dir\":\"" +
                             dir.string() +
                             "\",\"params\":{\"snr_grid\":[0.5],\"q_grid\":[2],\"reps\":2,"
                             "\"n_train\":40,\"n1\":30,\"n2\":30,\"B\":8,"
                             "\"combos\":[{\"mode\":\"drop\"},{\"mode\":\"replace\",\"replacement\":\"matched\"}]}}";
    ExperimentConfig config = parse_config_text(text);
    validate_experiment(config);
    run_experiment(config);

    const CsvTable agg = read_csv((dir / "aggregated.csv").string());
    const std::vector<std::string> expected{"snr", "q",          "mode",       "replacement",     "reps",
                                            "rejections", "proportion", "binomial_ci_low", "binomial_ci_high"};
    REQUIRE(agg.header == expected);
    REQUIRE(agg.rows.size() == 2);

    const CsvTable raw = read_csv((dir / "raw.csv").string());
    REQUIRE(raw.rows.size() == 4); // 2 cells x 2 reps
    const int k_reject = raw.column("reject");
    for (const auto& row : raw.rows) {
        REQUIRE((row[static_cast<std::size_t>(k_reject)] == "0" || row[static_cast<std::size_t>(k_reject)] == "1"));
    }
}

TEST_CASE("realdata-rte runs on a csv file end to end", "[cli]") {
    const fs::path dir = fresh_dir("augbagg_real");
    // small synthetic table written to disk to stand in for user data
    Rng rng(9);
    std::ostringstream csv;
    csv << "x1,x2,x3,y\n";
    for (int i = 0; i < 60; ++i) {
        const double x1 = rng.normal(), x2 = rng.normal(), x3 = rng.normal();
        csv << x1 << "," << x2 << "," << x3 << "," << (x1 + 0.5 * x2 + rng.normal()) << "\n";
    }
    const std::string data_path = (dir / "data.csv").string();
    write_file(data_path, csv.str());

    const std::string text = "{\"version\":1,\"kind\":\"realdata-rte\",\"seed\":3,\"output_dir\":\"" + dir.string() +
                             "\",\"params\":{\"csv_path\":\"" + data_path +
                             "\",\"response\":\"y\",\"proportions\":[0,0.5],\"reps\":1,\"B\":5,\"folds\":2}}";
    ExperimentConfig config = parse_config_text(text);
    validate_experiment(config);
    run_experiment(config);
    const CsvTable raw = read_csv((dir / "raw.csv").string());
    REQUIRE(raw.rows.size() == 2);
    const int k_q = raw.column("q");
    for (const auto& row : raw.rows) {
        double q;
        REQUIRE(parse_double(row[static_cast<std::size_t>(k_q)], q));
        REQUIRE(q >= 1.0);
    }
}

#ifdef AUGBAGG_CLI_PATH
TEST_CASE("command line interface exit codes", "[cli]") {
    const fs::path dir = fresh_dir("augbagg_cli_bin");
    const std::string cli = AUGBAGG_CLI_PATH;
    const std::string quiet = " > /dev/null 2>&1";

    auto exit_code = [](int status) { return WEXITSTATUS(status); };

    REQUIRE(exit_code(std::system((cli + " version" + quiet).c_str())) == 0);

    const std::string good = (dir / "good.json").string();
    write_file(good, tiny_fig1_config((dir / "out").string()));
    REQUIRE(exit_code(std::system((cli + " validate-config " + good + quiet).c_str())) == 0);
    REQUIRE(exit_code(std::system((cli + " run " + good + quiet).c_str())) == 0);
    REQUIRE(fs::exists(dir / "out" / "raw.csv"));

    const std::string bad = (dir / "bad.json").string();
    write_file(bad, "{\"version\":1,\"kind\":\"fig1-augbagg-curves\",\"output_dir\":\"o\"}");
    REQUIRE(exit_code(std::system((cli + " validate-config " + bad + quiet).c_str())) == 2);
    REQUIRE(exit_code(std::system((cli + " validate-config /nonexistent.json" + quiet).c_str())) == 3);
    REQUIRE(exit_code(std::system((cli + " plot --csv /nonexistent.csv --x a --y b -o /tmp/x.svg" + quiet).c_str())) ==
            3);

    // plot against a real aggregated csv
    const std::string agg = (dir / "out" / "aggregated.csv").string();
    const std::string svg = (dir / "curve.svg").string();
    REQUIRE(exit_code(std::system((cli + " plot --csv " + agg + " --x q --y mean_relative_test_error --series series -o " +
                                   svg + quiet)
                                      .c_str())) == 0);
    REQUIRE(fs::exists(svg));
    REQUIRE(exit_code(std::system((cli + " plot --csv " + agg + " --x nope --y mean_test_mse -o " + svg + quiet)
                                      .c_str())) == 2);
}
#endif
