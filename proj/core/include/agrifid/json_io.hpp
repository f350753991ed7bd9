#pragma once

#include <filesystem>
#include <string_view>

#include <nlohmann/json.hpp>

namespace agrifid {

// Parses a JSON document; syntax errors become ConfigError with
// "<source>:<line>:<column>" context.
nlohmann::json parse_json_document(std::string_view text, std::string_view source);
nlohmann::json load_json_file(const std::filesystem::path& path);
// Pretty-printed (indent 2) with a trailing newline.
void save_json_file(const nlohmann::ordered_json& j, const std::filesystem::path& path);

// Rejects keys outside `allowed` so typos in config files do not pass silently.
void require_known_keys(const nlohmann::json& j, std::initializer_list<std::string_view> allowed,
                        std::string_view context);

}  // namespace agrifid
