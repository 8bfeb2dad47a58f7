#include "ltmtex/format.hpp"

#include "ltmtex/error.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <string>
#include <system_error>

namespace ltmtex {

namespace {

std::string strip_negative_zero(std::string s) {
    if (!s.empty() && s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
    return s;
}

}  // namespace

std::string format_fixed(double value, int digits) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed, digits);
    return strip_negative_zero(std::string(buf, r.ptr));
}

std::string format_significant(double value, int digits) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, digits);
    return strip_negative_zero(std::string(buf, r.ptr));
}

std::string format_roundtrip(double value) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, r.ptr);
}

std::string format_weight(double value) {
    std::string s = format_roundtrip(value);
    if (s.starts_with("0.")) s.erase(0, 1);
    return s;
}

double parse_double(std::string_view text) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
        throw ValidationError("cannot parse number '" + std::string(text) + "'");
    }
    return v;
}

}  // namespace ltmtex
