#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>

#include "cvk/krotov.hpp"
#include "cvk/optomech.hpp"

namespace cvk {

/// Anything wrong with user-supplied configuration (unknown keys, bad values,
/// missing or mismatched files). The CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Flat key = value pairs grouped into [section] blocks; '#' and ';' start
/// comments. Ordered maps keep behavior deterministic.
using ConfigMap = std::map<std::string, std::map<std::string, std::string>>;

ConfigMap parse_config_text(const std::string& text);
ConfigMap load_config_file(const std::filesystem::path& path);

/// Applies one "section.key=value" override.
void apply_override(ConfigMap& map, const std::string& assignment);

/// Fully resolved run description.
struct ExperimentConfig {
    OptomechParams model{1.0, 0.1};
    double target_r = 1.25;
    double t_f = 60.0;
    int n_steps = 6000;
    KrotovConfig krotov{8000.0, 1e-4, 2000, std::nullopt};
    double guess_constant = 0.0;
    std::optional<std::string> guess_field_file;
    std::optional<BathSpec> bath;
    std::optional<ScanSpec> scan;
    std::string output_dir = "out";
    unsigned long long seed = 0;
    std::optional<std::string> preset_name;

    TimeGrid grid() const { return TimeGrid(t_f, n_steps); }
};

/// Seeds an ExperimentConfig from a canned preset.
ExperimentConfig config_from_preset(const ProblemPreset& preset);

/// Merges parsed key/value data into the config. Rejects unknown
/// section.key pairs and unparsable values with ConfigError naming the key.
void overlay_config(ExperimentConfig& config, const ConfigMap& map);

/// Cross-field validation (grid sanity, scan axis names, ...). Throws
/// ConfigError.
void validate_config(const ExperimentConfig& config);

enum class ScanMode { Optimize, Replay };

/// Optimize-mode scans vary {G, t_f}; replay-mode scans vary bath axes
/// {lambda, eta, lambda_o, lambda_m}. Mixing the two groups is rejected.
ScanMode classify_scan(const ScanSpec& scan);

}  // namespace cvk
