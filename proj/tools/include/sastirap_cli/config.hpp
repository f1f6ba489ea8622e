#pragma once

// Run configuration: YAML in user units (MHz, ns, multiples of pi), converted
// to library units at load time. Unknown keys are errors.

#include <array>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sastirap/protocol.hpp"
#include "sastirap/sweeps.hpp"
#include "sastirap/tomography.hpp"

namespace sastirap::cli {

class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& key, const std::string& message)
        : std::runtime_error(key + ": " + message), key_(key) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

struct NamedSweep {
    std::string name;
    SweepSpec spec;
    std::optional<std::uint64_t> shuffle_seed;
};

struct QslConfig {
    std::optional<double> omega02_max;  // rad/ns; defaults to the protocol's CD peak
};

struct TomoConfig {
    // Calibration traces: files, or synthetic templates when empty.
    std::array<std::filesystem::path, 3> calibration_files;
    bool synthetic_calibration = true;
    std::array<TraceTemplate, 3> templates = default_templates();
    double cadence_ns = 2.0;
    int samples = 250;

    std::optional<std::filesystem::path> epsilon_file;
    std::optional<EpsilonMatrix> epsilon;
    bool correct = false;

    // Measured traces: files, or synthesized from populations.
    std::vector<std::filesystem::path> measured_files;
    std::vector<Eigen::Vector3d> synthesize;
    double noise_sigma = 0.0;
    std::uint64_t seed = 1;

    ExtractOptions extract{};
};

struct OutputConfig {
    std::optional<std::filesystem::path> directory;
    bool plots = true;
    std::string prefix;
};

struct RunConfig {
    std::filesystem::path source;
    QutritParams system = QutritParams::transmon_default();
    ProtocolSpec protocol;
    std::vector<NamedSweep> sweeps;
    QslConfig qsl;
    std::optional<TomoConfig> tomo;
    OutputConfig output;
};

// Parses and range-checks; relative file paths resolve against the config's directory.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const std::string& yaml_text, const std::filesystem::path& base_dir = ".");

}  // namespace sastirap::cli
