#include "cxstat/format.hpp"

#include <array>
#include <charconv>
#include <cmath>

namespace cxstat {

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) return "0";
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value,
                                 std::chars_format::general, 9);
  return std::string(buf.data(), end);
}

std::string format_exact(double value) {
  if (!std::isfinite(value)) return format_number(value);
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), end);
}

std::string format_decimal(double value) {
  const double mag = std::fabs(value);
  if (!std::isfinite(value) || value == 0.0 || mag < 1e-9 || mag >= 1e15) {
    return format_number(value);
  }
  // Round to 9 significant digits first, then print without an exponent.
  double rounded = 0.0;
  parse_number(format_number(value), rounded);
  std::array<char, 128> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), rounded,
                                 std::chars_format::fixed);
  return std::string(buf.data(), end);
}

bool parse_number(std::string_view text, double& out) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
    text.remove_suffix(1);
  }
  if (text.empty()) return false;
  if (text == "nan") {
    out = std::nan("");
    return true;
  }
  if (text.front() == '+') text.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

}  // namespace cxstat
