/**
 * @file jsonl.hpp
 * @brief File helpers shared by the on-disk formats.
 */
#pragma once

#include <nlohmann/json.hpp>

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace ragkit {

/// Throws IoError when the file cannot be read.
std::string read_text_file(const std::filesystem::path& path);
/// Writes through a temporary sibling and renames it into place.
void write_text_file(const std::filesystem::path& path, std::string_view content);
void write_lines(const std::filesystem::path& path, const std::vector<std::string>& lines);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::ordered_json& value);

/// Calls `fn(json, line_number)` for every non-blank line. Parse or field-access
/// failures inside `fn` become SchemaError citing the 1-based line number.
void for_each_json_line(const std::filesystem::path& path,
                        const std::function<void(const nlohmann::json&, std::size_t)>& fn);

} // namespace ragkit
