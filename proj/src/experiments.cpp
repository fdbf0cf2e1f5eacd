#include "cvk/experiments.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <thread>
#include <vector>

#include <json.hpp>

#include "cvk/csv.hpp"
#include "cvk/open_bath.hpp"
#include "cvk/spectral.hpp"

namespace cvk {

namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

LorentzianBath bath_from_spec(const BathSpec& spec) {
    return LorentzianBath::two_mode(spec.lambda_o, spec.lambda_m, spec.eta, spec.omega_shift,
                                    spec.markov);
}

ControlField resolve_field(const ExperimentConfig& config, const TimeGrid& grid,
                           const std::optional<fs::path>& field_file) {
    if (field_file) return read_field_csv(*field_file, grid);
    if (config.guess_field_file) return read_field_csv(*config.guess_field_file, grid);
    return ControlField::constant(grid, config.guess_constant);
}

void write_dynamics_csv(const fs::path& path, const TimeGrid& grid,
                        const std::vector<CovarianceMatrix>& cms, const CovarianceMatrix& target,
                        double target_negativity) {
    CsvBuilder csv("t,negativity,negativity_over_target,d2_to_target");
    for (int k = 0; k < grid.n_nodes(); ++k) {
        const double neg = log_negativity(cms[k]);
        const double ratio = target_negativity > 0.0
                                 ? neg / target_negativity
                                 : std::numeric_limits<double>::quiet_NaN();
        csv.add_row({format_double(grid.node(k)), format_double(neg), format_double(ratio),
                     format_double(cm_distance(cms[k], target))});
    }
    write_text_file(path, csv.str());
}

void write_spectrum_csv(const fs::path& path, const Spectrum& spectrum) {
    CsvBuilder csv("omega,amplitude");
    for (const auto& [omega, amplitude] : amplitude_report(spectrum))
        csv.add_row({format_double(omega), format_double(amplitude)});
    write_text_file(path, csv.str());
}

void write_summary(const fs::path& path, const RunSummary& summary) {
    write_text_file(path, summary_to_json(summary));
}

std::optional<double> qsl_or_null(double r, double G) {
    if (G > 0.0 && r > 0.0) return qsl_reachability_hint(r, G);
    return std::nullopt;
}

struct ScanRow {
    double a1 = 0.0, a2 = 0.0;
    double negativity = std::numeric_limits<double>::quiet_NaN();
    double ratio = std::numeric_limits<double>::quiet_NaN();
    bool converged = false;
    int iterations = 0;
    std::optional<double> t_qsl;
};

std::vector<double> linspace(const ScanAxis& axis) {
    std::vector<double> v(axis.count);
    for (int i = 0; i < axis.count; ++i)
        v[i] = axis.min + (axis.max - axis.min) * static_cast<double>(i) / (axis.count - 1);
    return v;
}

}  // namespace

std::string summary_to_json(const RunSummary& s) {
    ordered_json j;
    j["command"] = s.command;
    j["preset"] = s.preset ? ordered_json(*s.preset) : ordered_json(nullptr);
    j["converged"] = s.converged ? ordered_json(*s.converged) : ordered_json(nullptr);
    j["iterations"] = s.iterations ? ordered_json(*s.iterations) : ordered_json(nullptr);
    j["final_d2"] = s.final_d2 ? ordered_json(*s.final_d2) : ordered_json(nullptr);
    j["final_negativity"] =
        s.final_negativity ? ordered_json(*s.final_negativity) : ordered_json(nullptr);
    j["target_negativity"] =
        s.target_negativity ? ordered_json(*s.target_negativity) : ordered_json(nullptr);
    j["negativity_ratio"] =
        s.negativity_ratio ? ordered_json(*s.negativity_ratio) : ordered_json(nullptr);
    j["t_qsl"] = s.t_qsl ? ordered_json(*s.t_qsl) : ordered_json(nullptr);
    j["rows"] = s.rows ? ordered_json(*s.rows) : ordered_json(nullptr);
    return j.dump(2) + "\n";
}

RunSummary run_optimize(const ExperimentConfig& config, const fs::path& out_dir) {
    validate_config(config);
    fs::create_directories(out_dir);

    const QuadraticGenerator gen = build_generator(config.model);
    const TimeGrid grid = config.grid();
    const CovarianceMatrix target = two_mode_squeezed_cm(config.target_r);
    const CovarianceMatrix gamma0 = vacuum_cm(gen.layout());
    const ShapeFunction shape = ShapeFunction::blackman(grid);
    const ControlField guess = resolve_field(config, grid, std::nullopt);

    const KrotovResult result =
        optimize(gen, grid, gamma0, target, guess, shape, config.krotov);

    write_field_csv(out_dir / "field.csv", result.field);

    CsvBuilder iterations_csv("iter,d2,field_update_norm");
    for (const IterationRecord& rec : result.iterations)
        iterations_csv.add_row({std::to_string(rec.iter), format_double(rec.d2),
                                format_double(rec.field_update_norm)});
    write_text_file(out_dir / "iterations.csv", iterations_csv.str());

    const double target_negativity = log_negativity(target);
    write_dynamics_csv(out_dir / "dynamics.csv", grid, result.trajectory, target,
                       target_negativity);

    const std::vector<double> head(result.field.values.begin(),
                                   result.field.values.end() - 1);
    write_spectrum_csv(out_dir / "spectrum.csv", dct_forward(head, grid.t_f));

    RunSummary summary;
    summary.command = "optimize";
    summary.preset = config.preset_name;
    summary.converged = result.converged;
    summary.iterations = result.iterations.back().iter;
    summary.final_d2 = result.final_d2;
    summary.final_negativity = log_negativity(result.trajectory.back());
    summary.target_negativity = target_negativity;
    if (target_negativity > 0.0)
        summary.negativity_ratio = *summary.final_negativity / target_negativity;
    summary.t_qsl = qsl_or_null(config.target_r, config.model.G);
    write_summary(out_dir / "summary.json", summary);
    return summary;
}

RunSummary run_propagate(const ExperimentConfig& config,
                         const std::optional<fs::path>& field_file, const fs::path& out_dir) {
    validate_config(config);
    fs::create_directories(out_dir);

    const QuadraticGenerator gen = build_generator(config.model);
    const TimeGrid grid = config.grid();
    const CovarianceMatrix target = two_mode_squeezed_cm(config.target_r);
    const CovarianceMatrix gamma0 = vacuum_cm(gen.layout());
    const ControlField field = resolve_field(config, grid, field_file);

    std::vector<CovarianceMatrix> cms;
    if (config.bath) {
        const OpenTrajectory traj =
            propagate_open_cm(gen, field, grid, bath_from_spec(*config.bath), gamma0);
        cms = traj.cms;

        CsvBuilder obar_csv("t,o0_re,o0_im,o1_re,o1_im,o2_re,o2_im,o3_re,o3_im");
        for (int k = 0; k < grid.n_nodes(); ++k) {
            std::vector<std::string> cells{format_double(grid.node(k))};
            for (int i = 0; i < 4; ++i) {
                cells.push_back(format_double(traj.obar[k](i).real()));
                cells.push_back(format_double(traj.obar[k](i).imag()));
            }
            obar_csv.add_row(cells);
        }
        write_text_file(out_dir / "obar.csv", obar_csv.str());
    } else {
        cms = propagate_cm(gen, field, grid, gamma0);
    }

    const double target_negativity = log_negativity(target);
    write_dynamics_csv(out_dir / "dynamics.csv", grid, cms, target, target_negativity);

    RunSummary summary;
    summary.command = "propagate";
    summary.preset = config.preset_name;
    summary.final_d2 = cm_distance(cms.back(), target);
    summary.final_negativity = log_negativity(cms.back());
    summary.target_negativity = target_negativity;
    if (target_negativity > 0.0)
        summary.negativity_ratio = *summary.final_negativity / target_negativity;
    write_summary(out_dir / "summary.json", summary);
    return summary;
}

RunSummary run_scan(const ExperimentConfig& config, const std::optional<fs::path>& field_file,
                    const fs::path& out_dir, int threads) {
    validate_config(config);
    if (!config.scan) throw ConfigError("scan requires a [scan] section or a scan preset");
    const ScanSpec& scan = *config.scan;
    const ScanMode mode = classify_scan(scan);
    if (mode == ScanMode::Replay && !field_file && !config.guess_field_file)
        throw ConfigError("bath-parameter scans replay a stored field; pass --field");
    fs::create_directories(out_dir);

    const std::vector<double> axis1 = linspace(scan.axis1);
    const std::vector<double> axis2 = linspace(scan.axis2);
    const int total = scan.axis1.count * scan.axis2.count;

    // Replay scans share one field read on the base grid.
    std::optional<ControlField> replay_field;
    if (mode == ScanMode::Replay) {
        const fs::path path = field_file ? *field_file : fs::path(*config.guess_field_file);
        replay_field = read_field_csv(path, config.grid());
    }

    const CovarianceMatrix target = two_mode_squeezed_cm(config.target_r);
    const double target_negativity = log_negativity(target);
    const double base_dt = config.grid().dt();

    std::vector<ScanRow> rows(total);
    std::atomic<int> cursor{0};

    auto apply_axis = [](ExperimentConfig& point, const std::string& name, double value,
                         double dt) {
        if (name == "G") {
            point.model.G = value;
        } else if (name == "t_f") {
            point.t_f = value;
            point.n_steps = std::max<int>(2, static_cast<int>(std::llround(value / dt)));
        } else if (name == "lambda") {
            point.bath->lambda_m = value;
        } else if (name == "eta") {
            point.bath->eta = value;
        } else if (name == "lambda_o") {
            point.bath->lambda_o = value;
        } else if (name == "lambda_m") {
            point.bath->lambda_m = value;
        }
    };

    auto compute_row = [&](int index) {
        const int i = index / scan.axis2.count;
        const int j = index % scan.axis2.count;
        ScanRow row;
        row.a1 = axis1[i];
        row.a2 = axis2[j];
        try {
            ExperimentConfig point = config;
            apply_axis(point, scan.axis1.name, row.a1, base_dt);
            apply_axis(point, scan.axis2.name, row.a2, base_dt);
            if (mode == ScanMode::Optimize) {
                const QuadraticGenerator gen = build_generator(point.model);
                const TimeGrid grid = point.grid();
                const KrotovResult result =
                    optimize(gen, grid, vacuum_cm(gen.layout()), target,
                             ControlField::constant(grid, point.guess_constant),
                             ShapeFunction::blackman(grid), point.krotov);
                row.negativity = log_negativity(result.trajectory.back());
                row.converged = result.converged;
                row.iterations = result.iterations.back().iter;
                row.t_qsl = qsl_or_null(point.target_r, point.model.G);
            } else {
                const QuadraticGenerator gen = build_generator(point.model);
                const OpenTrajectory traj =
                    propagate_open_cm(gen, *replay_field, point.grid(),
                                      bath_from_spec(*point.bath), vacuum_cm(gen.layout()));
                row.negativity = log_negativity(traj.cms.back());
                row.converged = true;
                row.iterations = 0;
            }
            if (target_negativity > 0.0) row.ratio = row.negativity / target_negativity;
        } catch (const std::exception&) {
            row.negativity = std::numeric_limits<double>::quiet_NaN();
            row.ratio = std::numeric_limits<double>::quiet_NaN();
            row.converged = false;
        }
        rows[index] = row;
    };

    const int n_workers = std::max(1, std::min(threads, total));
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (int w = 0; w < n_workers; ++w) {
        pool.emplace_back([&]() {
            while (true) {
                const int index = cursor.fetch_add(1);
                if (index >= total) return;
                compute_row(index);
            }
        });
    }
    for (std::thread& worker : pool) worker.join();

    CsvBuilder csv(scan.axis1.name + "," + scan.axis2.name +
                   ",final_negativity,negativity_over_target,converged,iterations,t_qsl");
    for (const ScanRow& row : rows) {
        csv.add_row({format_double(row.a1), format_double(row.a2), format_double(row.negativity),
                     format_double(row.ratio), row.converged ? "1" : "0",
                     std::to_string(row.iterations),
                     row.t_qsl ? format_double(*row.t_qsl) : std::string()});
    }
    write_text_file(out_dir / "scan.csv", csv.str());

    RunSummary summary;
    summary.command = "scan";
    summary.preset = config.preset_name;
    summary.target_negativity = target_negativity;
    summary.rows = total;
    write_summary(out_dir / "summary.json", summary);
    return summary;
}

RunSummary run_spectrum(const std::optional<ExperimentConfig>& config,
                        const fs::path& field_file, const fs::path& out_dir) {
    fs::create_directories(out_dir);

    FieldFileData data = read_field_file(field_file);
    if (config) {
        validate_config(*config);
        read_field_csv(field_file, config->grid());  // grid consistency check
    }
    if (data.t.size() < 3)
        throw ConfigError("field file " + field_file.string() + " needs at least 3 samples");
    const double t_f = data.t.back();
    if (!(t_f > 0.0))
        throw ConfigError("field file " + field_file.string() + " must end at t > 0");

    // The transform acts on the n = n_steps leading samples; the final node
    // duplicates the grid endpoint and stays out, matching the optimizer's
    // convention.
    data.f.pop_back();
    write_spectrum_csv(out_dir / "spectrum.csv", dct_forward(data.f, t_f));

    RunSummary summary;
    summary.command = "spectrum";
    if (config) summary.preset = config->preset_name;
    write_summary(out_dir / "summary.json", summary);
    return summary;
}

int resolve_thread_count(std::optional<int> flag) {
    if (flag && *flag > 0) return *flag;
    if (const char* env = std::getenv("CVK_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

}  // namespace cvk
