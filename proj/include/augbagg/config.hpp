#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "augbagg/csv.hpp"
#include "augbagg/errors.hpp"

namespace augbagg {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kConfigVersion = 1;

inline const std::vector<std::string>& experiment_kinds() {
    static const std::vector<std::string> kinds{
        "fig1-augbagg-curves", "fig2-correlation-grid", "realdata-rte",
        "ridge-equivalence",   "ols-risk-asymptotics",  "importance-rejection"};
    return kinds;
}

// Parsed-but-not-yet-validated experiment configuration.
struct ExperimentConfig {
    std::string kind;
    std::uint64_t seed = 0;
    std::string output_dir;
    int threads = 0; // 0 = hardware default
    bool plots = false;
    bool full_scale = false;
    nlohmann::json params = nlohmann::json::object();
    std::string source_text; // raw bytes for the manifest hash
};

namespace detail {

[[noreturn]] inline void config_fail(const std::string& path, const std::string& message) {
    throw config_error(path + ": " + message);
}

inline void require_keys(const nlohmann::json& object, const std::string& path,
                         const std::set<std::string>& allowed) {
    for (const auto& [key, value] : object.items()) {
        (void)value;
        if (!allowed.count(key)) config_fail(path + "." + key, "unknown field");
    }
}

inline double get_number(const nlohmann::json& object, const std::string& path, const std::string& key,
                         double fallback, bool required = false) {
    if (!object.contains(key)) {
        if (required) config_fail(path + "." + key, "required field is missing");
        return fallback;
    }
    if (!object.at(key).is_number()) config_fail(path + "." + key, "must be a number");
    return object.at(key).get<double>();
}

inline int get_int(const nlohmann::json& object, const std::string& path, const std::string& key, int fallback,
                   bool required = false) {
    if (!object.contains(key)) {
        if (required) config_fail(path + "." + key, "required field is missing");
        return fallback;
    }
    if (!object.at(key).is_number_integer()) config_fail(path + "." + key, "must be an integer");
    return object.at(key).get<int>();
}

inline bool get_bool(const nlohmann::json& object, const std::string& path, const std::string& key, bool fallback) {
    if (!object.contains(key)) return fallback;
    if (!object.at(key).is_boolean()) config_fail(path + "." + key, "must be a boolean");
    return object.at(key).get<bool>();
}

inline std::string get_string(const nlohmann::json& object, const std::string& path, const std::string& key,
                              const std::string& fallback, bool required = false) {
    if (!object.contains(key)) {
        if (required) config_fail(path + "." + key, "required field is missing");
        return fallback;
    }
    if (!object.at(key).is_string()) config_fail(path + "." + key, "must be a string");
    return object.at(key).get<std::string>();
}

template <typename T>
std::vector<T> get_grid(const nlohmann::json& object, const std::string& path, const std::string& key,
                        std::vector<T> fallback) {
    if (!object.contains(key)) return fallback;
    const auto& arr = object.at(key);
    if (!arr.is_array() || arr.empty()) config_fail(path + "." + key, "must be a nonempty array");
    std::vector<T> out;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        if (!arr[i].is_number()) config_fail(path + "." + key + "[" + std::to_string(i) + "]", "must be a number");
        if constexpr (std::is_integral_v<T>) {
            if (!arr[i].is_number_integer()) {
                config_fail(path + "." + key + "[" + std::to_string(i) + "]", "must be an integer");
            }
        }
        out.push_back(arr[i].get<T>());
    }
    return out;
}

} // namespace detail

inline ExperimentConfig parse_config_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw config_error(std::string("config: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw config_error("config: top level must be a JSON object");

    detail::require_keys(j, "config", {"version", "kind", "seed", "output_dir", "threads", "plots", "params"});

    const int version = detail::get_int(j, "config", "version", 0, true);
    if (version != kConfigVersion) detail::config_fail("config.version", "unsupported config version");

    ExperimentConfig config;
    config.kind = detail::get_string(j, "config", "kind", "", true);
    bool known = false;
    for (const auto& kind : experiment_kinds()) known = known || kind == config.kind;
    if (!known) detail::config_fail("config.kind", "unknown experiment kind '" + config.kind + "'");

    if (!j.contains("seed")) detail::config_fail("config.seed", "required field is missing (no wall-clock default)");
    if (!j.at("seed").is_number_integer()) detail::config_fail("config.seed", "must be an integer");
    config.seed = j.at("seed").get<std::uint64_t>();

    config.output_dir = detail::get_string(j, "config", "output_dir", "", true);
    if (config.output_dir.empty()) detail::config_fail("config.output_dir", "must be nonempty");
    config.threads = detail::get_int(j, "config", "threads", 0);
    if (config.threads < 0) detail::config_fail("config.threads", "must be nonnegative");
    config.plots = detail::get_bool(j, "config", "plots", false);
    if (j.contains("params")) {
        if (!j.at("params").is_object()) detail::config_fail("config.params", "must be an object");
        config.params = j.at("params");
    }
    config.source_text = text;
    return config;
}

inline ExperimentConfig load_config(const std::string& path) {
    return parse_config_text(read_file(path));
}

} // namespace augbagg
