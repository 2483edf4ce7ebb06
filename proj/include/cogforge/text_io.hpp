#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace cogforge::text_io {

std::vector<std::string> split(std::string_view line, char delim);
std::string join(const std::vector<std::string>& parts, std::string_view delim);
std::string_view trim(std::string_view s);

/// Reads a whole file; throws DataError when it cannot be opened.
std::string read_file(const std::filesystem::path& path);

/// Splits on '\n', dropping a trailing '\r' and a final empty line.
std::vector<std::string> lines(std::string_view content);

void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace cogforge::text_io
