#pragma once

#include <cstdint>
#include <string>

namespace bns {

inline constexpr std::int64_t kSecondsPerMinute = 60;
inline constexpr std::int64_t kSecondsPerHour = 3600;
inline constexpr std::int64_t kSecondsPerDay = 86400;

inline std::int64_t hours_to_seconds(std::int64_t h) { return h * kSecondsPerHour; }
inline std::int64_t days_to_seconds(std::int64_t d) { return d * kSecondsPerDay; }

// Parses "YYYY-MM-DDTHH:MM:SSZ" (also accepts a space separator and a missing
// trailing Z) into UTC epoch seconds. Plain integer strings pass through as
// epoch seconds.
std::int64_t parse_time_utc(const std::string& text);

// Epoch seconds -> "YYYY-MM-DDTHH:MM:SSZ".
std::string format_time_utc(std::int64_t epoch_seconds);

}  // namespace bns
