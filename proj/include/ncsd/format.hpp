#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace ncsd {

/// Shortest decimal that parses back to the same double. NaN prints as "nan",
/// infinities as "inf" / "-inf".
std::string format_real(double value);

/// Inverse of format_real; nullopt on trailing garbage or empty input.
std::optional<double> parse_real(std::string_view text);

}  // namespace ncsd
