#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace towcast {

/// UTC instant with second resolution, seconds since the Unix epoch.
using UnixSeconds = std::int64_t;

/// Parses "YYYY-MM-DDTHH:MM:SS" (a space instead of 'T' is accepted),
/// interpreted as UTC. Returns nullopt on malformed input.
std::optional<UnixSeconds> parse_timestamp(std::string_view text);

/// Formats as "YYYY-MM-DDTHH:MM:SS" UTC.
std::string format_timestamp(UnixSeconds t);

}  // namespace towcast
