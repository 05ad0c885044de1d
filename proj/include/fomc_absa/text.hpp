#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace fomc_absa {

bool is_space(char c);

// Maximal runs of non-whitespace characters.
std::vector<std::string_view> split_words(std::string_view text);
std::size_t count_words(std::string_view text);

// Trim and collapse every whitespace run to a single space.
std::string collapse_whitespace(std::string_view text);

// Lowercases ASCII and the Latin-1 supplement capitals (U+00C0..U+00DE).
std::string to_lower(std::string_view text);

// True when the text holds an ASCII letter or a Latin letter in U+00C0..U+024F.
bool has_alphabetic(std::string_view text);

bool is_valid_utf8(std::string_view text);

std::uint64_t fnv1a64(std::string_view text);

// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temporary and renames it over `path`, so readers never
// observe a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace fomc_absa
