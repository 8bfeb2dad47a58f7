#pragma once

// Locale-independent number formatting for every file the tools write.

#include <string>
#include <string_view>

namespace ltmtex {

/// Fixed-point with `digits` decimals; never emits "-0.000".
std::string format_fixed(double value, int digits);

/// `digits` significant digits (printf %g style).
std::string format_significant(double value, int digits);

/// Shortest text that parses back to the same double.
std::string format_roundtrip(double value);

/// Compact weight rendering: 0.1 -> ".1", 5 -> "5", 2.5 -> "2.5".
std::string format_weight(double value);

double parse_double(std::string_view text);

}  // namespace ltmtex
