#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace hintscope {

std::string to_lower(std::string_view s);
std::string_view trim(std::string_view s);
bool iequals(std::string_view a, std::string_view b);
bool icontains(std::string_view haystack, std::string_view lowered_needle);
bool starts_with_ci(std::string_view s, std::string_view prefix);

// Splits on `sep`, keeping empty fields.
std::vector<std::string_view> split(std::string_view s, char sep);

// Splits a CSV line. Supports double-quoted fields with "" escapes.
std::vector<std::string> split_csv(std::string_view line);
std::string csv_escape(std::string_view field);

// Iterates the non-blank lines of `text` that do not start with '#'.
std::vector<std::string_view> data_lines(std::string_view text);
std::vector<std::string_view> data_lines(std::string&&) = delete;
inline std::vector<std::string_view> data_lines(const char* text) { return data_lines(std::string_view(text)); }

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

std::string format_fixed(double value, int decimals);

}  // namespace hintscope
