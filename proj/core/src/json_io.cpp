#include "agrifid/json_io.hpp"

#include <algorithm>
#include <string>

#include "agrifid/error.hpp"
#include "agrifid/matrix_io.hpp"

namespace agrifid {

nlohmann::json parse_json_document(std::string_view text, std::string_view source) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t offset = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < offset; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError(std::string(source) + ":" + std::to_string(line) + ":" +
                      std::to_string(col) + ": " + e.what());
  }
}

nlohmann::json load_json_file(const std::filesystem::path& path) {
  return parse_json_document(read_text_file(path), path.string());
}

void save_json_file(const nlohmann::ordered_json& j, const std::filesystem::path& path) {
  write_text_file(path, j.dump(2) + "\n");
}

void require_known_keys(const nlohmann::json& j, std::initializer_list<std::string_view> allowed,
                        std::string_view context) {
  if (!j.is_object()) throw ConfigError(std::string(context) + ": expected a JSON object");
  for (const auto& item : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
      throw ConfigError(std::string(context) + ": unknown key '" + item.key() + "'");
    }
  }
}

}  // namespace agrifid
