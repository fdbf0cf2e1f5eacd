// Command-line front end: optimize / propagate / scan / spectrum.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure,
// 4 optimization did not converge.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cvk/experiments.hpp"

namespace {

struct CommonOptions {
    std::string config_path;
    std::string preset;
    std::vector<std::string> sets;
    std::string out_dir;
    std::string field;
    int threads = 0;
    int grid_override = 0;
};

cvk::ExperimentConfig assemble_config(const CommonOptions& opts) {
    cvk::ExperimentConfig config;
    if (!opts.preset.empty()) config = cvk::config_from_preset(cvk::preset(opts.preset));
    cvk::ConfigMap map;
    if (!opts.config_path.empty()) map = cvk::load_config_file(opts.config_path);
    for (const std::string& assignment : opts.sets) cvk::apply_override(map, assignment);
    cvk::overlay_config(config, map);
    if (!opts.out_dir.empty()) config.output_dir = opts.out_dir;
    if (opts.grid_override > 0 && config.scan) {
        config.scan->axis1.count = opts.grid_override;
        config.scan->axis2.count = opts.grid_override;
    }
    cvk::validate_config(config);
    return config;
}

void add_common(CLI::App* cmd, CommonOptions& opts, bool with_field) {
    cmd->add_option("--config", opts.config_path, "Configuration file (key = value sections)");
    cmd->add_option("--preset", opts.preset, "Canned experiment preset");
    cmd->add_option("--set", opts.sets, "Override, e.g. --set optimizer.max_iters=500")
        ->take_all();
    cmd->add_option("--out", opts.out_dir, "Output directory (default from config)");
    if (with_field) cmd->add_option("--field", opts.field, "Stored field file (t,f CSV)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pulse optimization and propagation for Gaussian continuous-variable systems"};
    app.require_subcommand(1);

    CommonOptions optimize_opts, propagate_opts, scan_opts, spectrum_opts;

    CLI::App* cmd_optimize = app.add_subcommand("optimize", "Optimize a control field");
    add_common(cmd_optimize, optimize_opts, false);

    CLI::App* cmd_propagate =
        app.add_subcommand("propagate", "Propagate a field through closed or open dynamics");
    add_common(cmd_propagate, propagate_opts, true);

    CLI::App* cmd_scan = app.add_subcommand("scan", "Two-axis parameter scan");
    add_common(cmd_scan, scan_opts, true);
    cmd_scan->add_option("--threads", scan_opts.threads,
                         "Worker threads (default: CVK_THREADS or hardware)");
    cmd_scan->add_option("--grid", scan_opts.grid_override, "Override both scan axis counts");

    CLI::App* cmd_spectrum = app.add_subcommand("spectrum", "Cosine spectrum of a stored field");
    add_common(cmd_spectrum, spectrum_opts, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    try {
        if (cmd_optimize->parsed()) {
            const cvk::ExperimentConfig config = assemble_config(optimize_opts);
            const cvk::RunSummary summary = cvk::run_optimize(config, config.output_dir);
            std::cout << cvk::summary_to_json(summary);
            if (!summary.converged.value_or(false)) {
                std::cerr << "optimize: did not reach tol_d2 within the iteration budget\n";
                return 4;
            }
            return 0;
        }
        if (cmd_propagate->parsed()) {
            const cvk::ExperimentConfig config = assemble_config(propagate_opts);
            std::optional<std::filesystem::path> field;
            if (!propagate_opts.field.empty()) field = propagate_opts.field;
            std::cout << cvk::summary_to_json(cvk::run_propagate(config, field, config.output_dir));
            return 0;
        }
        if (cmd_scan->parsed()) {
            const cvk::ExperimentConfig config = assemble_config(scan_opts);
            std::optional<std::filesystem::path> field;
            if (!scan_opts.field.empty()) field = scan_opts.field;
            const int threads = cvk::resolve_thread_count(
                scan_opts.threads > 0 ? std::optional<int>(scan_opts.threads) : std::nullopt);
            std::cout << cvk::summary_to_json(
                cvk::run_scan(config, field, config.output_dir, threads));
            return 0;
        }
        if (cmd_spectrum->parsed()) {
            if (spectrum_opts.field.empty())
                throw cvk::ConfigError("spectrum requires --field");
            std::optional<cvk::ExperimentConfig> config;
            if (!spectrum_opts.preset.empty() || !spectrum_opts.config_path.empty() ||
                !spectrum_opts.sets.empty())
                config = assemble_config(spectrum_opts);
            const std::filesystem::path out =
                !spectrum_opts.out_dir.empty()
                    ? std::filesystem::path(spectrum_opts.out_dir)
                    : std::filesystem::path(config ? config->output_dir : "out");
            std::cout << cvk::summary_to_json(
                cvk::run_spectrum(config, spectrum_opts.field, out));
            return 0;
        }
    } catch (const cvk::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
