#include "iatr/text_io.hpp"

#include <charconv>
#include <cmath>

#include "iatr/error.hpp"

namespace iatr::text {

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view field, const std::string& context) {
  field = trim(field);
  double value = 0.0;
  const auto* end = field.data() + field.size();
  const auto res = std::from_chars(field.data(), end, value);
  if (field.empty() || res.ec != std::errc{} || res.ptr != end || !std::isfinite(value))
    throw Error(ErrorCode::ParseError, context + ": invalid number '" + std::string(field) + "'");
  return value;
}

std::size_t parse_size(std::string_view field, const std::string& context) {
  field = trim(field);
  std::size_t value = 0;
  const auto* end = field.data() + field.size();
  const auto res = std::from_chars(field.data(), end, value);
  if (field.empty() || res.ec != std::errc{} || res.ptr != end)
    throw Error(ErrorCode::ParseError, context + ": invalid count '" + std::string(field) + "'");
  return value;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

void require_plain_field(std::string_view field, const std::string& what) {
  if (field.empty() || field.find_first_of(",\"\r\n") != std::string_view::npos)
    throw Error(ErrorCode::InvalidInput, what + " '" + std::string(field) + "' cannot be written as a CSV field");
}

}  // namespace iatr::text
