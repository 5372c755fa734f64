#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "lsr/experiments.hpp"
#include "lsr/theory.hpp"

namespace lsr {

/// Everything a CLI invocation needs, validated.
struct RunConfig {
    ExperimentConfig experiment;
    unsigned threads = 0;
    std::filesystem::path out_dir = "out";

    // sweep-d
    std::vector<double> d_grid;
    Family family = Family::asymmetry;
    std::vector<double> family_values;
    // sweep-tau
    std::vector<double> tau_grid;
    std::vector<double> d_values;
    // map
    std::vector<double> x_l_grid;
    std::vector<double> x_u_grid;
    // rates
    std::vector<double> rate_inputs;
    std::vector<double> rate_d_grid;
    RateCurveOptions rates;
    // trajectory
    std::vector<InputPair> pairs;
    std::size_t decimation = 1;
    // noise-check
    std::size_t check_samples = 1000000;
    double check_dt = 0.001;

    /// Every key with its effective value, in table order.
    std::map<std::string, std::string> values;
    /// Keys that were not given explicitly.
    std::set<std::string> defaulted;

    /// key = value lines; defaulted keys carry a trailing "# default".
    std::string echo() const;
};

/// Accumulates key = value assignments from files and overrides, then builds
/// a validated RunConfig. Short aliases D, tau and A map to noise.D,
/// noise.tau and noise.A.
class ConfigBuilder {
public:
    /// Throws ConfigError when the file is missing or a line is malformed.
    void load_file(const std::filesystem::path& path);
    void load_text(std::string_view text, std::string_view origin = "<text>");
    /// Single "key=value" assignment.
    void set(std::string_view assignment);
    void set(std::string_view key, std::string_view value);

    RunConfig build() const;

private:
    std::map<std::string, std::string> explicit_;
};

/// Keys accepted in configuration files, in echo order.
std::vector<std::string> config_keys();

RunConfig parse_config(const std::filesystem::path& path);

}  // namespace lsr
