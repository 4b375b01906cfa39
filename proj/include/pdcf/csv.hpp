// Locale-independent number formatting and small file helpers.
#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace pdcf::csv {

// 17 significant digits; "inf", "-inf" and "nan" for non-finite values.
std::string format_double(double value);

// Throws IoError on malformed input.
double parse_double(std::string_view text);

std::vector<std::string> split(std::string_view line, char delimiter);
std::string_view trim(std::string_view text);

// Writes to a sibling temporary file and renames it into place.
void write_text_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_text(const std::filesystem::path& path);

}  // namespace pdcf::csv
