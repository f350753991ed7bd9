#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "agrifid/matrix.hpp"

namespace agrifid {

// Headerless CSV: one line per time frame, comma-separated decimal reals.
// Blank trailing lines and CR line endings are tolerated; anything else that
// is not rectangular raises FormatError, and unparsable tokens raise
// ParseError with 1-based row/column positions.
Matrix parse_matrix(std::string_view text, std::string_view source = "<memory>");
Matrix load_matrix(const std::filesystem::path& path);

// 9 significant digits, shortest "%g" form, negative zero printed as "0".
std::string format_real(double value);
std::string format_matrix(const Matrix& m);
// Throws ArgumentError for non-finite input and IoError if the file cannot be written.
void save_matrix(const Matrix& m, const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);

}  // namespace agrifid
