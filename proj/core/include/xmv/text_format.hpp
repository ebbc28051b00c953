#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace xmv {

// Shortest decimal text that parses back to exactly the same value.
// Infinities are written as "inf"/"-inf", NaN as "nan".
std::string format_double(double x);
std::string format_float(float x);

std::optional<double> parse_double(std::string_view s);
std::optional<float> parse_float(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

// Splits one CSV line on commas. Quoting is not supported; the writers in
// this project never emit fields containing commas or quotes.
std::vector<std::string_view> split_csv_line(std::string_view line);

// Strips a trailing '\r' so files written on Windows parse the same.
std::string_view trim_line_end(std::string_view line);

}  // namespace xmv
