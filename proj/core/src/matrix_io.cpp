#include "agrifid/matrix_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "agrifid/error.hpp"

namespace agrifid {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

double parse_token(std::string_view token, std::string_view source, std::size_t row,
                   std::size_t col) {
  token = trim(token);
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double value = 0.0;
  const auto* first = token.data();
  const auto* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (token.empty() || ec != std::errc() || ptr != last || !std::isfinite(value)) {
    throw ParseError(std::string(source) + ": row " + std::to_string(row) + ", column " +
                     std::to_string(col) + ": '" + std::string(token) + "' is not a number");
  }
  return value;
}

}  // namespace

Matrix parse_matrix(std::string_view text, std::string_view source) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto nl = text.find('\n', start);
    const auto end = nl == std::string_view::npos ? text.size() : nl;
    lines.push_back(text.substr(start, end - start));
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) throw FormatError(std::string(source) + ": matrix file is empty");

  std::vector<double> values;
  std::size_t cols = 0;
  for (std::size_t r = 0; r < lines.size(); ++r) {
    const auto line = trim(lines[r]);
    std::size_t col = 0;
    std::size_t pos = 0;
    while (true) {
      const auto comma = line.find(',', pos);
      const auto token =
          line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
      values.push_back(parse_token(token, source, r + 1, col + 1));
      ++col;
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    if (r == 0) {
      cols = col;
    } else if (col != cols) {
      throw FormatError(std::string(source) + ": row " + std::to_string(r + 1) + " has " +
                        std::to_string(col) + " columns, expected " + std::to_string(cols));
    }
  }
  return Matrix(lines.size(), cols, std::move(values));
}

Matrix load_matrix(const std::filesystem::path& path) {
  return parse_matrix(read_text_file(path), path.string());
}

std::string format_real(double value) {
  if (value == 0.0) return "0";
  char buf[40];
  const int n = std::snprintf(buf, sizeof buf, "%.9g", value);
  return std::string(buf, static_cast<std::size_t>(n));
}

std::string format_matrix(const Matrix& m) {
  if (!m.all_finite()) throw ArgumentError("cannot serialize a matrix with non-finite values");
  std::string out;
  out.reserve(m.size() * 12);
  for (std::size_t t = 0; t < m.rows(); ++t) {
    for (std::size_t f = 0; f < m.cols(); ++f) {
      if (f) out.push_back(',');
      out += format_real(m(t, f));
    }
    out.push_back('\n');
  }
  return out;
}

void save_matrix(const Matrix& m, const std::filesystem::path& path) {
  write_text_file(path, format_matrix(m));
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failure on '" + path.string() + "'");
  return std::move(ss).str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

}  // namespace agrifid
