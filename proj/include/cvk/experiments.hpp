#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "cvk/config.hpp"

namespace cvk {

/// What a subcommand reports back; also the content of summary.json
/// (unavailable entries serialize as null, so the key set is identical for
/// every subcommand).
struct RunSummary {
    std::string command;
    std::optional<std::string> preset;
    std::optional<bool> converged;
    std::optional<int> iterations;
    std::optional<double> final_d2;
    std::optional<double> final_negativity;
    std::optional<double> target_negativity;
    std::optional<double> negativity_ratio;
    std::optional<double> t_qsl;
    std::optional<int> rows;
};

/// Optimizes the preset/config problem; writes field.csv, iterations.csv,
/// dynamics.csv, spectrum.csv and summary.json into out_dir.
RunSummary run_optimize(const ExperimentConfig& config, const std::filesystem::path& out_dir);

/// Propagates a field (from field_file, the configured guess file, or the
/// constant guess) through the closed or open dynamics; writes dynamics.csv,
/// obar.csv (open runs) and summary.json.
RunSummary run_propagate(const ExperimentConfig& config,
                         const std::optional<std::filesystem::path>& field_file,
                         const std::filesystem::path& out_dir);

/// Runs the configured two-axis scan; writes scan.csv and summary.json.
/// Bath-parameter scans replay field_file (required in that mode) through the
/// open dynamics; (G, t_f) scans run a full optimization per grid point.
/// Points are distributed over `threads` workers; output order is
/// independent of the scheduling.
RunSummary run_scan(const ExperimentConfig& config,
                    const std::optional<std::filesystem::path>& field_file,
                    const std::filesystem::path& out_dir, int threads);

/// Cosine-spectrum report of a stored field; writes spectrum.csv and
/// summary.json. With a config present the field must match its grid.
RunSummary run_spectrum(const std::optional<ExperimentConfig>& config,
                        const std::filesystem::path& field_file,
                        const std::filesystem::path& out_dir);

/// Worker count: explicit flag if given, else the CVK_THREADS environment
/// variable, else hardware concurrency.
int resolve_thread_count(std::optional<int> flag);

/// summary.json serialization (exposed for tests).
std::string summary_to_json(const RunSummary& summary);

}  // namespace cvk
