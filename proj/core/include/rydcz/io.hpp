#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace rydcz::io {

/// Writes `contents` to a sibling temporary file and renames it over `path`.
/// On failure the temporary is removed and `path` is left untouched.
void atomic_write(const std::filesystem::path& path, std::string_view contents);

void write_json(const std::filesystem::path& path, const nlohmann::json& document);
nlohmann::json read_json(const std::filesystem::path& path);

/// Shortest decimal string that parses back to exactly `value` ("nan" for NaN).
std::string format_double(double value);

/// Inverse of format_double; throws ConfigError on junk.
double parse_double(std::string_view text);

std::string read_text(const std::filesystem::path& path);

/// Library version, e.g. "0.3.0".
std::string_view version();

}  // namespace rydcz::io
