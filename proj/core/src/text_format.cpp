#include "xmv/text_format.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <system_error>

namespace xmv {

namespace {

template <typename T>
std::string format_floating(T x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

template <typename T>
std::optional<T> parse_floating(std::string_view s) {
  if (s == "inf" || s == "+inf") return std::numeric_limits<T>::infinity();
  if (s == "-inf") return -std::numeric_limits<T>::infinity();
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  T value{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return value;
}

}  // namespace

std::string format_double(double x) { return format_floating(x); }
std::string format_float(float x) { return format_floating(x); }

std::optional<double> parse_double(std::string_view s) { return parse_floating<double>(s); }
std::optional<float> parse_float(std::string_view s) { return parse_floating<float>(s); }

std::optional<long long> parse_int(std::string_view s) {
  long long value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return value;
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

std::string_view trim_line_end(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

}  // namespace xmv
