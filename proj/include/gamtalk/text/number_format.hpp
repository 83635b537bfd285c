#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace gamtalk::text {

// Correctly rounded to `decimals` places (ties resolved on the exact binary
// value, as Python's round does). Negative zero becomes zero.
double round_to(double value, int decimals);

// Shortest round-trip representation in Python's float repr style:
// "0.91", "2.0", "1e-05", "1e+16". Negative zero prints as "0.0".
std::string float_repr(double value);

// float_repr(round_to(value, decimals)).
std::string format_rounded(double value, int decimals);

// Parses a complete decimal number; nullopt on any trailing garbage.
std::optional<double> parse_double(std::string_view text);

}  // namespace gamtalk::text
