#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace cgft {

/// UTC instant with one-second resolution. All wire and API timestamps use it.
using Timestamp = std::chrono::sys_seconds;

/// `YYYY-MM-DDTHH:MM:SSZ`
std::string format_rfc3339(Timestamp t);

/// Strict inverse of format_rfc3339: exactly `YYYY-MM-DDTHH:MM:SSZ`, calendar
/// date must be valid, year in [1970, 9999].
std::optional<Timestamp> parse_rfc3339(std::string_view text);

/// Throws InvalidArgument naming `what` when the text does not parse.
Timestamp parse_rfc3339_or_throw(std::string_view text, std::string_view what);

} // namespace cgft
