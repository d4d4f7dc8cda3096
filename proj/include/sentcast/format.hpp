#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace sentcast {

/// Shortest round-trip decimal for `value`, always carrying a decimal point or
/// exponent ("0.0", "1.5", "1e-05").
std::string format_real(double value);

/// Splits one CSV line on commas. No quoting support: none of the numeric
/// formats here need it.
std::vector<std::string_view> split_csv_line(std::string_view line);

/// Strips a trailing '\r' and surrounding blanks.
std::string_view trim(std::string_view text);

/// Writes `content` to `path` through a temporary sibling and a rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

}  // namespace sentcast
