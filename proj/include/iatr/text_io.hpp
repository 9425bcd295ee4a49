#pragma once

// Small helpers shared by the CSV readers/writers.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace iatr::text {

/// Shortest decimal string that parses back to the same double.
std::string format_double(double value);

/// Strict parse of a whole field. Throws ParseError mentioning `context`.
double parse_double(std::string_view field, const std::string& context);
std::size_t parse_size(std::string_view field, const std::string& context);

/// Splits on commas. Fields are neither quoted nor escaped.
std::vector<std::string_view> split_csv(std::string_view line);

std::string_view trim(std::string_view s);

/// Rejects labels that cannot be written to an unquoted CSV field.
void require_plain_field(std::string_view field, const std::string& what);

}  // namespace iatr::text
