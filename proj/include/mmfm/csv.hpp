#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace mmfm::csv {

/// Shortest decimal string that round-trips the double exactly.
std::string format_double(double value);

double parse_double(const std::string& text);

/// Minimal comma-separated table: header row, UTF-8, '.' decimal, no quoting.
/// Field values must not contain commas or newlines.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

void write_table(const Table& table, const std::filesystem::path& path);

Table read_table(const std::filesystem::path& path);

}  // namespace mmfm::csv
