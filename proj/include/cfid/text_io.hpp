#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace cfid::text {

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

/// Strict parse of a whole field; throws ParseError mentioning `context`.
double parse_double(std::string_view field, const std::string& context);
long long parse_int(std::string_view field, const std::string& context);

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);

/// Comma-separated list of doubles, e.g. "0.1, 0.1".
std::vector<double> parse_double_list(std::string_view s, const std::string& context);
std::string join_doubles(const std::vector<double>& values, char sep = ',');

}  // namespace cfid::text
