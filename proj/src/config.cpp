#include "cvk/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <set>
#include <sstream>

#include "cvk/csv.hpp"

namespace cvk {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t");
    return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& key, const std::string& value) {
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (value.empty() || end != value.c_str() + value.size() || !std::isfinite(v))
        throw ConfigError("invalid number for " + key + ": '" + value + "'");
    return v;
}

long long parse_int(const std::string& key, const std::string& value) {
    char* end = nullptr;
    const long long v = std::strtoll(value.c_str(), &end, 10);
    if (value.empty() || end != value.c_str() + value.size())
        throw ConfigError("invalid integer for " + key + ": '" + value + "'");
    return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError("invalid boolean for " + key + ": '" + value + "' (use true/false)");
}

const std::set<std::string>& optimize_axes() {
    static const std::set<std::string> axes{"G", "t_f"};
    return axes;
}

const std::set<std::string>& replay_axes() {
    static const std::set<std::string> axes{"lambda", "eta", "lambda_o", "lambda_m"};
    return axes;
}

}  // namespace

ConfigMap parse_config_text(const std::string& text) {
    ConfigMap map;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw ConfigError("config line " + std::to_string(line_no) +
                                  ": unterminated section header");
            section = trim(t.substr(1, t.size() - 2));
            if (section.empty())
                throw ConfigError("config line " + std::to_string(line_no) + ": empty section name");
            map[section];  // a section may legitimately stay empty
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        if (section.empty())
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": key outside of any [section]");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty())
            throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
        if (map[section].count(key))
            throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key " +
                              section + "." + key);
        map[section][key] = value;
    }
    return map;
}

ConfigMap load_config_file(const std::filesystem::path& path) {
    return parse_config_text(read_text_file(path));
}

void apply_override(ConfigMap& map, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw ConfigError("--set expects section.key=value, got '" + assignment + "'");
    const std::string key_path = trim(assignment.substr(0, eq));
    const std::string value = trim(assignment.substr(eq + 1));
    const auto dot = key_path.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == key_path.size())
        throw ConfigError("--set expects section.key=value, got '" + assignment + "'");
    map[key_path.substr(0, dot)][key_path.substr(dot + 1)] = value;
}

ExperimentConfig config_from_preset(const ProblemPreset& preset) {
    ExperimentConfig config;
    config.model = preset.model;
    config.target_r = preset.target_r;
    config.t_f = preset.grid.t_f;
    config.n_steps = preset.grid.n_steps;
    config.krotov = preset.krotov;
    config.guess_constant = preset.guess_constant;
    config.bath = preset.bath;
    config.scan = preset.scan;
    config.preset_name = preset.name;
    return config;
}

void overlay_config(ExperimentConfig& config, const ConfigMap& map) {
    for (const auto& [section, entries] : map) {
        if (section == "bath" && !config.bath) config.bath = BathSpec{};
        if (section == "scan" && !config.scan) config.scan = ScanSpec{};
        for (const auto& [key, value] : entries) {
            const std::string full = section + "." + key;
            if (section == "model") {
                if (key == "omega_m") config.model.omega_m = parse_double(full, value);
                else if (key == "G") config.model.G = parse_double(full, value);
                else throw ConfigError("unknown key " + full);
            } else if (section == "target") {
                if (key == "r") config.target_r = parse_double(full, value);
                else throw ConfigError("unknown key " + full);
            } else if (section == "schedule") {
                if (key == "t_f") config.t_f = parse_double(full, value);
                else if (key == "n_steps") config.n_steps = static_cast<int>(parse_int(full, value));
                else throw ConfigError("unknown key " + full);
            } else if (section == "optimizer") {
                if (key == "lambda_a") config.krotov.lambda_a = parse_double(full, value);
                else if (key == "tol_d2") config.krotov.tol_d2 = parse_double(full, value);
                else if (key == "max_iters")
                    config.krotov.max_iters = static_cast<int>(parse_int(full, value));
                else if (key == "spectral_cutoff") {
                    const long long cutoff = parse_int(full, value);
                    if (cutoff == 0) config.krotov.spectral_cutoff.reset();
                    else config.krotov.spectral_cutoff = static_cast<int>(cutoff);
                } else throw ConfigError("unknown key " + full);
            } else if (section == "bath") {
                if (key == "eta") config.bath->eta = parse_double(full, value);
                else if (key == "omega_shift") config.bath->omega_shift = parse_double(full, value);
                else if (key == "lambda_o") config.bath->lambda_o = parse_double(full, value);
                else if (key == "lambda_m") config.bath->lambda_m = parse_double(full, value);
                else if (key == "markov") config.bath->markov = parse_bool(full, value);
                else throw ConfigError("unknown key " + full);
            } else if (section == "guess") {
                if (key == "constant") config.guess_constant = parse_double(full, value);
                else if (key == "field_file") config.guess_field_file = value;
                else throw ConfigError("unknown key " + full);
            } else if (section == "output") {
                if (key == "dir") config.output_dir = value;
                else throw ConfigError("unknown key " + full);
            } else if (section == "rng") {
                if (key == "seed") config.seed = static_cast<unsigned long long>(parse_int(full, value));
                else throw ConfigError("unknown key " + full);
            } else if (section == "scan") {
                ScanAxis* axis = nullptr;
                std::string field = key;
                if (key.rfind("axis1", 0) == 0) {
                    axis = &config.scan->axis1;
                    field = key.size() > 5 ? key.substr(6) : "";
                } else if (key.rfind("axis2", 0) == 0) {
                    axis = &config.scan->axis2;
                    field = key.size() > 5 ? key.substr(6) : "";
                } else {
                    throw ConfigError("unknown key " + full);
                }
                if (key == "axis1" || key == "axis2") axis->name = value;
                else if (field == "min") axis->min = parse_double(full, value);
                else if (field == "max") axis->max = parse_double(full, value);
                else if (field == "count") axis->count = static_cast<int>(parse_int(full, value));
                else throw ConfigError("unknown key " + full);
            } else {
                throw ConfigError("unknown section [" + section + "]");
            }
        }
    }
}

ScanMode classify_scan(const ScanSpec& scan) {
    const bool opt1 = optimize_axes().count(scan.axis1.name) > 0;
    const bool opt2 = optimize_axes().count(scan.axis2.name) > 0;
    const bool rep1 = replay_axes().count(scan.axis1.name) > 0;
    const bool rep2 = replay_axes().count(scan.axis2.name) > 0;
    if (opt1 && opt2) return ScanMode::Optimize;
    if (rep1 && rep2) return ScanMode::Replay;
    if ((opt1 && rep2) || (rep1 && opt2))
        throw ConfigError("scan axes '" + scan.axis1.name + "' and '" + scan.axis2.name +
                          "' mix optimization and bath parameters");
    throw ConfigError("unknown scan axis; use G, t_f, lambda, eta, lambda_o or lambda_m");
}

void validate_config(const ExperimentConfig& config) {
    if (!(std::isfinite(config.model.omega_m) && config.model.omega_m > 0.0))
        throw ConfigError("model.omega_m must be > 0");
    if (!std::isfinite(config.model.G)) throw ConfigError("model.G must be finite");
    if (!(std::isfinite(config.target_r) && config.target_r >= 0.0))
        throw ConfigError("target.r must be >= 0");
    if (!(std::isfinite(config.t_f) && config.t_f > 0.0))
        throw ConfigError("schedule.t_f must be > 0");
    if (config.n_steps < 2) throw ConfigError("schedule.n_steps must be >= 2");
    if (!(config.krotov.lambda_a > 0.0)) throw ConfigError("optimizer.lambda_a must be > 0");
    if (!(config.krotov.tol_d2 > 0.0)) throw ConfigError("optimizer.tol_d2 must be > 0");
    if (config.krotov.max_iters < 1) throw ConfigError("optimizer.max_iters must be >= 1");
    if (config.krotov.spectral_cutoff && *config.krotov.spectral_cutoff < 1)
        throw ConfigError("optimizer.spectral_cutoff must be >= 1 (0 disables)");
    if (config.krotov.spectral_cutoff && *config.krotov.spectral_cutoff > config.n_steps)
        throw ConfigError("optimizer.spectral_cutoff cannot exceed schedule.n_steps");
    if (!std::isfinite(config.guess_constant)) throw ConfigError("guess.constant must be finite");
    if (config.guess_field_file && config.guess_field_file->empty())
        throw ConfigError("guess.field_file must not be empty");
    if (config.output_dir.empty()) throw ConfigError("output.dir must not be empty");
    if (config.bath) {
        const BathSpec& b = *config.bath;
        if (!std::isfinite(b.eta) || (!b.markov && !(b.eta > 0.0)))
            throw ConfigError("bath.eta must be > 0 (unless bath.markov = true)");
        if (!std::isfinite(b.omega_shift)) throw ConfigError("bath.omega_shift must be finite");
        if (!(b.lambda_o >= 0.0) || !(b.lambda_m >= 0.0))
            throw ConfigError("bath couplings must be >= 0");
    }
    if (config.scan) {
        const ScanSpec& s = *config.scan;
        classify_scan(s);
        if (s.axis1.name == s.axis2.name)
            throw ConfigError("scan axes must differ, both are '" + s.axis1.name + "'");
        for (const ScanAxis* axis : {&s.axis1, &s.axis2}) {
            if (axis->count < 2)
                throw ConfigError("scan." + axis->name + " count must be >= 2");
            if (!(std::isfinite(axis->min) && std::isfinite(axis->max)) || axis->min > axis->max)
                throw ConfigError("scan." + axis->name + " range must satisfy min <= max");
        }
        if (classify_scan(s) == ScanMode::Replay && !config.bath)
            throw ConfigError("bath-parameter scans need a [bath] section");
    }
}

}  // namespace cvk
