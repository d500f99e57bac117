#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace stua::io {

/// Rows of a comma-separated file with its header checked against
/// `expected_header`. Blank lines are skipped; a trailing '\r' is dropped.
struct CsvTable {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;
};

CsvTable read_csv(const std::filesystem::path& path, std::string_view expected_header);

std::vector<std::string> split(std::string_view line, char sep = ',');
std::string_view trim(std::string_view s);

/// Dot-decimal real; throws Parse with `context` in the message.
double parse_double(std::string_view text, const std::string& context);
long parse_long(std::string_view text, const std::string& context);

/// `YYYY-MM-DDTHH:MM:SS` with optional trailing `Z`, as seconds since the
/// Unix epoch (UTC).
std::int64_t parse_timestamp(std::string_view text, const std::string& context);
std::string format_timestamp(std::int64_t seconds);

/// Shortest text that parses back to the same double.
std::string format_double(double value);

/// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

}  // namespace stua::io
