#include "cvk/csv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cvk/config.hpp"

namespace cvk {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open for writing: " + path.string());
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

CsvBuilder::CsvBuilder(const std::string& header) { buffer_ = header + "\n"; }

void CsvBuilder::add_row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) buffer_ += ',';
        buffer_ += cells[i];
    }
    buffer_ += '\n';
}

void write_field_csv(const std::filesystem::path& path, const ControlField& field) {
    CsvBuilder csv("t,f");
    for (int k = 0; k < field.grid.n_nodes(); ++k)
        csv.add_row({format_double(field.grid.node(k)), format_double(field.values[k])});
    write_text_file(path, csv.str());
}

FieldFileData read_field_file(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    std::istringstream in(text);
    std::string line;
    FieldFileData data;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line_no == 1 && line.rfind("t,", 0) == 0) continue;  // header
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw ConfigError("field file " + path.string() + ": line " + std::to_string(line_no) +
                              " is not 't,f'");
        char* end = nullptr;
        const std::string tc = line.substr(0, comma);
        const std::string fc = line.substr(comma + 1);
        const double t = std::strtod(tc.c_str(), &end);
        if (end != tc.c_str() + tc.size() || tc.empty())
            throw ConfigError("field file " + path.string() + ": bad t on line " +
                              std::to_string(line_no));
        const double f = std::strtod(fc.c_str(), &end);
        if (end != fc.c_str() + fc.size() || fc.empty())
            throw ConfigError("field file " + path.string() + ": bad f on line " +
                              std::to_string(line_no));
        if (!std::isfinite(t) || !std::isfinite(f))
            throw ConfigError("field file " + path.string() + ": non-finite value on line " +
                              std::to_string(line_no));
        data.t.push_back(t);
        data.f.push_back(f);
    }
    if (data.t.empty()) throw ConfigError("field file " + path.string() + " has no samples");
    return data;
}

ControlField read_field_csv(const std::filesystem::path& path, const TimeGrid& grid) {
    const FieldFileData data = read_field_file(path);
    if (static_cast<int>(data.t.size()) != grid.n_nodes())
        throw ConfigError("field file " + path.string() + " has " +
                          std::to_string(data.t.size()) + " samples, grid expects " +
                          std::to_string(grid.n_nodes()));
    const double tol = 1e-9 * std::max(1.0, grid.t_f);
    for (int k = 0; k < grid.n_nodes(); ++k) {
        if (std::abs(data.t[k] - grid.node(k)) > tol)
            throw ConfigError("field file " + path.string() + ": node " + std::to_string(k) +
                              " time " + format_double(data.t[k]) + " does not match grid time " +
                              format_double(grid.node(k)));
    }
    return ControlField(grid, data.f);
}

}  // namespace cvk
