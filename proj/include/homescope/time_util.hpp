#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace homescope {

// All pipeline timestamps are microseconds on a scenario-local clock where
// epoch 0 is a local midnight and day 0 is a Monday. No OS timezone is ever
// consulted; this keeps every operation pure and runs byte-reproducible.

constexpr int64_t kMicrosPerSecond = 1'000'000;
constexpr int64_t kSecondsPerDay = 86'400;
constexpr int64_t kSecondsPerHour = 3'600;

inline int64_t seconds_to_us(double s) { return int64_t(s * double(kMicrosPerSecond)); }

inline int64_t day_index(int64_t ts_us) {
    int64_t s = ts_us / kMicrosPerSecond;
    return s >= 0 ? s / kSecondsPerDay : (s - kSecondsPerDay + 1) / kSecondsPerDay;
}

/// Weekday 0..6 with day 0 = Monday.
inline int weekday(int64_t ts_us) { return int(((day_index(ts_us) % 7) + 7) % 7); }

inline int second_of_day(int64_t ts_us) {
    int64_t s = ts_us / kMicrosPerSecond;
    return int(((s % kSecondsPerDay) + kSecondsPerDay) % kSecondsPerDay);
}

inline int hour_of_day(int64_t ts_us) { return second_of_day(ts_us) / int(kSecondsPerHour); }

/// "YYYY-MM-DDTHH:MM:SS" on the scenario-local clock, day 0 = 2024-01-01
/// (a Monday). Sub-second precision is intentionally dropped in reports.
std::string format_iso(int64_t ts_us);

/// Inverse of format_iso; nullopt on malformed text.
std::optional<int64_t> parse_iso(const std::string& text);

/// "HH:MM" -> seconds of day; nullopt on malformed text.
std::optional<int> parse_time_of_day(const std::string& text);

} // namespace homescope
