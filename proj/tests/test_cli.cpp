#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <doctest.h>

#include "cvk/config.hpp"
#include "cvk/csv.hpp"
#include "cvk/experiments.hpp"
#include "cvk/gaussian.hpp"

using namespace cvk;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "cvk_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path) { return read_text_file(path); }

int count_lines(const std::string& text) {
    int n = 0;
    for (char c : text)
        if (c == '\n') ++n;
    return n;
}

// A problem small enough for optimization inside a unit test: strong coupling
// and a loose tolerance keep the iteration count in the hundreds.
ExperimentConfig small_problem() {
    ExperimentConfig config;
    config.model = OptomechParams{1.0, 0.3};
    config.target_r = 0.4;
    config.t_f = 8.0;
    config.n_steps = 800;
    config.krotov = KrotovConfig{50.0, 1e-3, 4000, std::nullopt};
    return config;
}

}  // namespace

TEST_CASE("config text parsing") {
    const std::string text =
        "# comment\n"
        "[model]\n"
        "omega_m = 1.0\r\n"
        "G = 0.25   ; trailing comment is part of the value? no: full-line only\n"
        "\n"
        "[empty_section]\n";
    SUBCASE("sections, keys, comments") {
        const ConfigMap map = parse_config_text("[model]\nG = 0.25\n# note\n; note\n[bath]\n");
        REQUIRE(map.count("model") == 1);
        CHECK(map.at("model").at("G") == "0.25");
        CHECK(map.count("bath") == 1);
        CHECK(map.at("bath").empty());
    }
    SUBCASE("whitespace and CRLF tolerated") {
        const ConfigMap map = parse_config_text("[ model ]\r\n  omega_m =  2.0  \r\n");
        CHECK(map.at("model").at("omega_m") == "2.0");
    }
    SUBCASE("malformed input throws with the line number") {
        CHECK_THROWS_AS(parse_config_text("[model\nG=1\n"), ConfigError);
        CHECK_THROWS_AS(parse_config_text("[]\n"), ConfigError);
        CHECK_THROWS_AS(parse_config_text("G = 1\n"), ConfigError);  // outside any section
        CHECK_THROWS_AS(parse_config_text("[model]\njust words\n"), ConfigError);
        CHECK_THROWS_AS(parse_config_text("[model]\n= 1\n"), ConfigError);
        CHECK_THROWS_AS(parse_config_text("[model]\nG=1\nG=2\n"), ConfigError);
        try {
            parse_config_text("[model]\nG=1\nG=2\n");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("duplicate key model.G") != std::string::npos);
        }
    }
}

TEST_CASE("config overlay") {
    ExperimentConfig config;
    const ConfigMap map = parse_config_text(
        "[model]\nG = 0.05\n"
        "[target]\nr = 0.4\n"
        "[schedule]\nt_f = 12\nn_steps = 1200\n"
        "[optimizer]\nlambda_a = 500\nspectral_cutoff = 8\n"
        "[bath]\neta = 0.7\nlambda_m = 0.2\nmarkov = true\n"
        "[guess]\nconstant = -0.5\n"
        "[output]\ndir = results\n"
        "[rng]\nseed = 42\n");
    overlay_config(config, map);
    CHECK(config.model.G == 0.05);
    CHECK(config.target_r == 0.4);
    CHECK(config.t_f == 12.0);
    CHECK(config.n_steps == 1200);
    CHECK(config.krotov.lambda_a == 500.0);
    REQUIRE(config.krotov.spectral_cutoff.has_value());
    CHECK(*config.krotov.spectral_cutoff == 8);
    REQUIRE(config.bath.has_value());
    CHECK(config.bath->eta == 0.7);
    CHECK(config.bath->lambda_m == 0.2);
    CHECK(config.bath->markov);
    CHECK(config.guess_constant == -0.5);
    CHECK(config.output_dir == "results");
    CHECK(config.seed == 42);

    SUBCASE("spectral_cutoff = 0 disables the filter") {
        overlay_config(config, parse_config_text("[optimizer]\nspectral_cutoff = 0\n"));
        CHECK(!config.krotov.spectral_cutoff.has_value());
    }
    SUBCASE("unknown keys are named in the error") {
        for (const char* bad : {"[model]\nbogus = 1\n", "[nonsense]\nx = 1\n",
                                "[optimizer]\nstep = 1\n", "[scan]\naxis3 = G\n"}) {
            CHECK_THROWS_AS(overlay_config(config, parse_config_text(bad)), ConfigError);
        }
        try {
            overlay_config(config, parse_config_text("[model]\nbogus = 1\n"));
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("model.bogus") != std::string::npos);
        }
    }
    SUBCASE("bad values are rejected") {
        CHECK_THROWS_AS(overlay_config(config, parse_config_text("[model]\nG = fast\n")),
                        ConfigError);
        CHECK_THROWS_AS(overlay_config(config, parse_config_text("[schedule]\nn_steps = 1.5\n")),
                        ConfigError);
        CHECK_THROWS_AS(overlay_config(config, parse_config_text("[bath]\nmarkov = maybe\n")),
                        ConfigError);
    }
    SUBCASE("scan axes build up from dotted keys") {
        ExperimentConfig scan_config;
        scan_config.bath = BathSpec{};
        overlay_config(scan_config, parse_config_text(
                                        "[scan]\naxis1 = lambda\naxis1.min = 0\naxis1.max = 0.3\n"
                                        "axis1.count = 5\naxis2 = eta\naxis2.min = 0.1\n"
                                        "axis2.max = 1\naxis2.count = 4\n"));
        REQUIRE(scan_config.scan.has_value());
        CHECK(scan_config.scan->axis1.name == "lambda");
        CHECK(scan_config.scan->axis1.count == 5);
        CHECK(scan_config.scan->axis2.max == 1.0);
        CHECK_NOTHROW(validate_config(scan_config));
    }
}

TEST_CASE("override assignments") {
    ConfigMap map;
    apply_override(map, "optimizer.lambda_a = 100");
    CHECK(map.at("optimizer").at("lambda_a") == "100");
    apply_override(map, "bath.markov=true");
    CHECK(map.at("bath").at("markov") == "true");
    CHECK_THROWS_AS(apply_override(map, "no_equals"), ConfigError);
    CHECK_THROWS_AS(apply_override(map, "nodot=1"), ConfigError);
    CHECK_THROWS_AS(apply_override(map, ".key=1"), ConfigError);
    CHECK_THROWS_AS(apply_override(map, "section.=1"), ConfigError);
}

TEST_CASE("preset to config") {
    const auto config = config_from_preset(preset("fig5_open"));
    CHECK(config.preset_name == "fig5_open");
    CHECK(config.t_f == 60.0);
    REQUIRE(config.bath.has_value());
    CHECK(config.bath->lambda_m == 0.1);
    CHECK_NOTHROW(validate_config(config));
    for (const auto& name : preset_names())
        CHECK_NOTHROW(validate_config(config_from_preset(preset(name))));
}

TEST_CASE("config validation") {
    auto bad = [](auto&& mutate) {
        ExperimentConfig config;
        mutate(config);
        CHECK_THROWS_AS(validate_config(config), ConfigError);
    };
    bad([](ExperimentConfig& c) { c.n_steps = 1; });
    bad([](ExperimentConfig& c) { c.t_f = 0.0; });
    bad([](ExperimentConfig& c) { c.target_r = -1.0; });
    bad([](ExperimentConfig& c) { c.krotov.tol_d2 = 0.0; });
    bad([](ExperimentConfig& c) { c.krotov.lambda_a = 0.0; });
    bad([](ExperimentConfig& c) { c.krotov.spectral_cutoff = 0; });
    bad([](ExperimentConfig& c) { c.krotov.spectral_cutoff = c.n_steps + 1; });
    bad([](ExperimentConfig& c) { c.output_dir = ""; });
    bad([](ExperimentConfig& c) { c.bath = BathSpec{0.0, 0.0, 0.0, 0.1, false}; });
    bad([](ExperimentConfig& c) { c.bath = BathSpec{0.5, 0.0, -0.1, 0.0, false}; });
    bad([](ExperimentConfig& c) {
        c.scan = ScanSpec{ScanAxis{"G", 0, 1, 2}, ScanAxis{"G", 0, 1, 2}};
    });
    bad([](ExperimentConfig& c) {
        c.scan = ScanSpec{ScanAxis{"G", 0, 1, 2}, ScanAxis{"t_f", 1, 2, 1}};
    });
    bad([](ExperimentConfig& c) {
        c.scan = ScanSpec{ScanAxis{"G", 1, 0, 2}, ScanAxis{"t_f", 1, 2, 2}};
    });
    bad([](ExperimentConfig& c) {
        // replay axes without a bath section
        c.scan = ScanSpec{ScanAxis{"lambda", 0, 1, 2}, ScanAxis{"eta", 0.1, 1, 2}};
    });
}

TEST_CASE("scan classification") {
    CHECK(classify_scan(ScanSpec{ScanAxis{"G", 0, 1, 2}, ScanAxis{"t_f", 1, 2, 2}}) ==
          ScanMode::Optimize);
    CHECK(classify_scan(ScanSpec{ScanAxis{"lambda", 0, 1, 2}, ScanAxis{"eta", 0.1, 1, 2}}) ==
          ScanMode::Replay);
    CHECK(classify_scan(ScanSpec{ScanAxis{"lambda_o", 0, 1, 2}, ScanAxis{"lambda_m", 0, 1, 2}}) ==
          ScanMode::Replay);
    CHECK_THROWS_AS(classify_scan(ScanSpec{ScanAxis{"G", 0, 1, 2}, ScanAxis{"eta", 0.1, 1, 2}}),
                    ConfigError);
    CHECK_THROWS_AS(classify_scan(ScanSpec{ScanAxis{"r", 0, 1, 2}, ScanAxis{"eta", 0.1, 1, 2}}),
                    ConfigError);
}

TEST_CASE("double formatting") {
    CHECK(format_double(0.0) == "0");
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(1.0 / 3.0) == "0.333333333333");
    CHECK(format_double(-2.5e-13) == "-2.5e-13");
    CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
    CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
}

TEST_CASE("field csv round trip") {
    const fs::path dir = fresh_dir("field_roundtrip");
    const TimeGrid grid(6.0, 60);
    ControlField field = ControlField::constant(grid, 0.0);
    for (int k = 0; k <= grid.n_steps; ++k)
        field.values[k] = std::sin(1.7 * grid.node(k)) / 3.0;
    const fs::path path = dir / "field.csv";
    write_field_csv(path, field);

    const std::string text = slurp(path);
    CHECK(text.rfind("t,f\n", 0) == 0);
    CHECK(count_lines(text) == grid.n_nodes() + 1);

    const ControlField back = read_field_csv(path, grid);
    double worst = 0.0;
    for (int k = 0; k <= grid.n_steps; ++k)
        worst = std::max(worst, std::abs(back.values[k] - field.values[k]));
    CHECK(worst < 1e-11);

    SUBCASE("grid mismatch is rejected") {
        CHECK_THROWS(read_field_csv(path, TimeGrid(6.0, 61)));
        CHECK_THROWS(read_field_csv(path, TimeGrid(7.0, 60)));
    }
    SUBCASE("empty and malformed files are rejected") {
        const fs::path empty = dir / "empty.csv";
        write_text_file(empty, "");
        CHECK_THROWS(read_field_file(empty));
        const fs::path header_only = dir / "header.csv";
        write_text_file(header_only, "t,f\n");
        CHECK_THROWS(read_field_file(header_only));
        const fs::path garbage = dir / "garbage.csv";
        write_text_file(garbage, "t,f\n0,zero\n");
        CHECK_THROWS(read_field_file(garbage));
        CHECK_THROWS(read_field_file(dir / "does_not_exist.csv"));
    }
}

TEST_CASE("optimize run artifacts and determinism") {
    const ExperimentConfig config = small_problem();
    const fs::path dir_a = fresh_dir("opt_a");
    const fs::path dir_b = fresh_dir("opt_b");
    const RunSummary summary = run_optimize(config, dir_a);

    CHECK(summary.command == "optimize");
    REQUIRE(summary.converged.has_value());
    CHECK(*summary.converged);
    CHECK(*summary.final_d2 < config.krotov.tol_d2);
    CHECK(*summary.iterations > 0);
    CHECK(*summary.negativity_ratio == doctest::Approx(1.0).epsilon(0.05));
    REQUIRE(summary.t_qsl.has_value());

    for (const char* name :
         {"field.csv", "iterations.csv", "dynamics.csv", "spectrum.csv", "summary.json"})
        CHECK(fs::exists(dir_a / name));

    const std::string dynamics = slurp(dir_a / "dynamics.csv");
    CHECK(count_lines(dynamics) == config.n_steps + 2);  // header + one row per node
    CHECK(dynamics.rfind("t,negativity,negativity_over_target,d2_to_target\n", 0) == 0);
    const std::string iterations = slurp(dir_a / "iterations.csv");
    CHECK(iterations.rfind("iter,d2,field_update_norm\n", 0) == 0);
    CHECK(count_lines(iterations) == *summary.iterations + 2);  // header + baseline + iters

    // Byte-identical rerun.
    run_optimize(config, dir_b);
    for (const char* name : {"field.csv", "iterations.csv", "dynamics.csv", "spectrum.csv",
                             "summary.json"})
        CHECK(slurp(dir_a / name) == slurp(dir_b / name));
}

TEST_CASE("propagate run, closed and open") {
    ExperimentConfig config;
    config.model = OptomechParams{1.0, 0.1};
    config.target_r = 0.8;
    config.t_f = 10.0;
    config.n_steps = 1000;
    config.guess_constant = -1.0;

    const fs::path closed_dir = fresh_dir("prop_closed");
    const RunSummary closed = run_propagate(config, std::nullopt, closed_dir);
    CHECK(closed.command == "propagate");
    CHECK(!fs::exists(closed_dir / "obar.csv"));
    CHECK(count_lines(slurp(closed_dir / "dynamics.csv")) == config.n_steps + 2);

    config.bath = BathSpec{0.5, 0.0, 0.0, 0.2, false};
    const fs::path open_dir = fresh_dir("prop_open");
    const RunSummary open = run_propagate(config, std::nullopt, open_dir);
    CHECK(fs::exists(open_dir / "obar.csv"));
    CHECK(*open.final_negativity < *closed.final_negativity);
    const std::string obar = slurp(open_dir / "obar.csv");
    CHECK(obar.rfind("t,o0_re,o0_im,o1_re,o1_im,o2_re,o2_im,o3_re,o3_im\n", 0) == 0);
    CHECK(count_lines(obar) == config.n_steps + 2);

    SUBCASE("explicit field file wins over the constant guess") {
        const fs::path dir = fresh_dir("prop_field");
        const TimeGrid grid = config.grid();
        write_field_csv(dir / "f.csv", ControlField::constant(grid, 0.0));
        config.bath.reset();
        const RunSummary replay = run_propagate(config, dir / "f.csv", dir);
        // f = 0 generates much less entanglement than the resonant constant.
        CHECK(*replay.final_negativity < *closed.final_negativity);
    }
    SUBCASE("field on the wrong grid is rejected") {
        const fs::path dir = fresh_dir("prop_badfield");
        write_field_csv(dir / "f.csv", ControlField::constant(TimeGrid(10.0, 999), 0.0));
        CHECK_THROWS(run_propagate(config, dir / "f.csv", dir));
    }
}

TEST_CASE("spectrum run") {
    const fs::path dir = fresh_dir("spectrum");
    const TimeGrid grid(4.0, 16);
    write_field_csv(dir / "const.csv", ControlField::constant(grid, -0.75));
    const RunSummary summary = run_spectrum(std::nullopt, dir / "const.csv", dir);
    CHECK(summary.command == "spectrum");

    const std::string text = slurp(dir / "spectrum.csv");
    CHECK(text.rfind("omega,amplitude\n", 0) == 0);
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);  // header
    REQUIRE(std::getline(in, line));
    CHECK(line.rfind("0,0.75", 0) == 0);  // DC row carries the magnitude
    int row = 1;
    while (std::getline(in, line)) {
        const double amp = std::strtod(line.substr(line.find(',') + 1).c_str(), nullptr);
        CHECK(std::abs(amp) < 1e-12);
        ++row;
    }
    CHECK(row == grid.n_steps);

    SUBCASE("too-short field files are rejected") {
        write_text_file(dir / "short.csv", "t,f\n0,1\n1,1\n");
        CHECK_THROWS(run_spectrum(std::nullopt, dir / "short.csv", dir));
    }
    SUBCASE("grid consistency is enforced when a config is present") {
        ExperimentConfig config;
        config.t_f = 4.0;
        config.n_steps = 17;
        CHECK_THROWS(run_spectrum(config, dir / "const.csv", dir));
    }
}

TEST_CASE("replay scan over bath couplings") {
    ExperimentConfig config;
    config.model = OptomechParams{1.0, 0.1};
    config.target_r = 0.8;
    config.t_f = 5.0;
    config.n_steps = 500;
    config.bath = BathSpec{0.5, 0.0, 0.0, 0.0, false};
    config.scan = ScanSpec{ScanAxis{"lambda_o", 0.0, 0.2, 2}, ScanAxis{"lambda_m", 0.0, 0.2, 3}};

    const fs::path dir = fresh_dir("scan_replay");
    const TimeGrid grid = config.grid();
    ControlField field = ControlField::constant(grid, -1.0);
    write_field_csv(dir / "field.csv", field);

    const RunSummary summary = run_scan(config, dir / "field.csv", dir, 2);
    CHECK(summary.command == "scan");
    CHECK(*summary.rows == 6);

    const std::string text = slurp(dir / "scan.csv");
    CHECK(text.rfind("lambda_o,lambda_m,final_negativity,negativity_over_target,converged,"
                     "iterations,t_qsl\n",
                     0) == 0);
    CHECK(count_lines(text) == 7);
    // Grid order: axis1 outer, axis2 inner.
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    std::getline(in, line);
    CHECK(line.rfind("0,0,", 0) == 0);
    std::getline(in, line);
    CHECK(line.rfind("0,0.1,", 0) == 0);

    SUBCASE("row order is independent of the worker count") {
        const fs::path serial = fresh_dir("scan_replay_serial");
        run_scan(config, dir / "field.csv", serial, 1);
        CHECK(slurp(serial / "scan.csv") == text);
    }
    SUBCASE("replay scans demand a field") {
        CHECK_THROWS_AS(run_scan(config, std::nullopt, dir, 1), ConfigError);
    }
    SUBCASE("scans demand a scan spec") {
        ExperimentConfig no_scan = config;
        no_scan.scan.reset();
        CHECK_THROWS_AS(run_scan(no_scan, dir / "field.csv", dir, 1), ConfigError);
    }
}

TEST_CASE("optimize scan varies coupling and runtime") {
    // Iteration-capped so the test exercises the scan plumbing, not the
    // optimizer's endgame; the per-row QSL column is checked exactly.
    ExperimentConfig config = small_problem();
    config.krotov.max_iters = 40;
    config.scan = ScanSpec{ScanAxis{"G", 0.25, 0.3, 2}, ScanAxis{"t_f", 6.0, 8.0, 2}};

    const fs::path dir = fresh_dir("scan_opt");
    const RunSummary summary = run_scan(config, std::nullopt, dir, 2);
    CHECK(*summary.rows == 4);
    const std::string text = slurp(dir / "scan.csv");
    CHECK(count_lines(text) == 5);

    std::istringstream in(text);
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::istringstream row(line);
        std::string cell;
        while (std::getline(row, cell, ',')) cells.push_back(cell);
        REQUIRE(cells.size() == 7);
        const double g_value = std::strtod(cells[0].c_str(), nullptr);
        const double negativity = std::strtod(cells[2].c_str(), nullptr);
        const double ratio = std::strtod(cells[3].c_str(), nullptr);
        const double t_qsl = std::strtod(cells[6].c_str(), nullptr);
        CHECK(std::isfinite(negativity));
        CHECK(ratio >= 0.0);
        const double target_negativity = 2.0 * config.target_r / std::log(2.0);
        CHECK(ratio == doctest::Approx(negativity / target_negativity).epsilon(1e-9));
        CHECK(cells[4] == "0");  // 40 iterations cannot reach tol_d2
        CHECK(cells[5] == "40");
        CHECK(t_qsl ==
              doctest::Approx(std::acos(1.0 / std::cosh(config.target_r)) / g_value)
                  .epsilon(1e-9));
    }
}

TEST_CASE("scan records per-point failures and continues") {
    // eta = 0 is invalid for a non-Markov bath: that grid row must come back
    // as a NaN, non-converged entry while the rest of the scan completes.
    ExperimentConfig config;
    config.model = OptomechParams{1.0, 0.1};
    config.target_r = 0.8;
    config.t_f = 4.0;
    config.n_steps = 400;
    config.bath = BathSpec{0.5, 0.0, 0.0, 0.0, false};
    config.scan = ScanSpec{ScanAxis{"eta", 0.0, 0.5, 2}, ScanAxis{"lambda_m", 0.1, 0.2, 2}};

    const fs::path dir = fresh_dir("scan_failures");
    write_field_csv(dir / "field.csv", ControlField::constant(config.grid(), -1.0));
    const RunSummary summary = run_scan(config, dir / "field.csv", dir, 2);
    CHECK(*summary.rows == 4);

    std::istringstream in(slurp(dir / "scan.csv"));
    std::string line;
    std::getline(in, line);  // header
    int failed = 0, ok = 0;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::istringstream row(line);
        std::string cell;
        while (std::getline(row, cell, ',')) cells.push_back(cell);
        REQUIRE(cells.size() >= 6);  // replay rows leave the trailing t_qsl blank
        if (cells[0] == "0") {
            CHECK(cells[2] == "nan");
            CHECK(cells[4] == "0");
            ++failed;
        } else {
            CHECK(std::isfinite(std::strtod(cells[2].c_str(), nullptr)));
            CHECK(cells[4] == "1");
            ++ok;
        }
    }
    CHECK(failed == 2);
    CHECK(ok == 2);
}

TEST_CASE("thread count resolution") {
    CHECK(resolve_thread_count(4) == 4);
    ::setenv("CVK_THREADS", "3", 1);
    CHECK(resolve_thread_count(std::nullopt) == 3);
    ::setenv("CVK_THREADS", "junk", 1);
    CHECK(resolve_thread_count(std::nullopt) >= 1);
    ::unsetenv("CVK_THREADS");
    CHECK(resolve_thread_count(std::nullopt) >= 1);
}

TEST_CASE("summary json shape") {
    RunSummary s;
    s.command = "spectrum";
    const std::string json = summary_to_json(s);
    CHECK(json.find("\"command\": \"spectrum\"") != std::string::npos);
    CHECK(json.find("\"converged\": null") != std::string::npos);
    CHECK(json.find("\"rows\": null") != std::string::npos);
    CHECK(json.back() == '\n');
}
