#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace sico {

/// Reads a whole file; throws IoError naming the path.
std::string read_file(const std::filesystem::path& path);

/// Writes atomically: temp file in the same directory, then rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Calls `fn(line_number, line)` for every non-empty line (1-based numbering).
/// Returns the number of lines visited.
std::size_t for_each_jsonl_line(const std::filesystem::path& path,
                                const std::function<void(std::size_t, const std::string&)>& fn);

std::string trim(std::string_view s);

std::vector<std::string> split_lines(std::string_view text);

bool iequals(std::string_view a, std::string_view b);

std::string to_lower(std::string_view s);

} // namespace sico
