#pragma once

#include <string>
#include <string_view>

namespace cxstat {

// 9 significant digits, shortest of fixed/scientific, locale-independent.
std::string format_number(double value);

// Shortest text that parses back to exactly `value`.
std::string format_exact(double value);

// Plain decimal (no exponent) for values that read naturally that way, e.g.
// 0.00001; falls back to format_number for very large or tiny magnitudes.
std::string format_decimal(double value);

// Strict locale-independent parse of the whole string; false on failure.
bool parse_number(std::string_view text, double& out);

}  // namespace cxstat
