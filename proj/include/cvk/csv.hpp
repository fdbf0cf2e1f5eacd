#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cvk/dynamics.hpp"

namespace cvk {

/// Shortest text form with 12 significant digits ("%.12g"); "nan"/"inf" for
/// the specials.
std::string format_double(double v);

/// Writes text verbatim (LF line endings are the caller's responsibility;
/// everything in this project emits LF only).
void write_text_file(const std::filesystem::path& path, const std::string& content);

std::string read_text_file(const std::filesystem::path& path);

/// Incremental CSV assembly: one header line, then rows of pre-formatted
/// cells.
class CsvBuilder {
  public:
    explicit CsvBuilder(const std::string& header);
    void add_row(const std::vector<std::string>& cells);
    const std::string& str() const { return buffer_; }

  private:
    std::string buffer_;
};

/// Two-column (t, f) file for control fields.
void write_field_csv(const std::filesystem::path& path, const ControlField& field);

/// Raw columns of a (t, f) file; throws ConfigError-compatible
/// std::runtime_error on malformed or empty input.
struct FieldFileData {
    std::vector<double> t;
    std::vector<double> f;
};
FieldFileData read_field_file(const std::filesystem::path& path);

/// Reads a field file and checks it against the grid: node count and node
/// times must match (times within 1e-9 * max(1, t_f)).
ControlField read_field_csv(const std::filesystem::path& path, const TimeGrid& grid);

}  // namespace cvk
