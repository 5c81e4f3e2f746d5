#include "homescope/time_util.hpp"

#include <cstdio>

namespace homescope {

namespace {

// Days between 1970-01-01 and 2024-01-01 (the scenario epoch, a Monday).
constexpr int64_t kEpochDays = 19723;

// Civil-date conversion, Howard Hinnant's algorithms.
int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    int64_t era = (y >= 0 ? y : y - 399) / 400;
    int yoe = int(y - era * 400);
    int doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    int doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + doe - 719468;
}

void civil_from_days(int64_t z, int& y, int& m, int& d) {
    z += 719468;
    int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    int doe = int(z - era * 146097);
    int yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    int64_t yy = int64_t(yoe) + era * 400;
    int doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    int mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y = int(yy + (m <= 2));
}

} // namespace

std::string format_iso(int64_t ts_us) {
    int64_t day = day_index(ts_us);
    int sod = second_of_day(ts_us);
    int y, m, d;
    civil_from_days(day + kEpochDays, y, m, d);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d", y, m, d,
                  sod / 3600, (sod / 60) % 60, sod % 60);
    return buf;
}

std::optional<int64_t> parse_iso(const std::string& text) {
    int y, mo, d, h, mi, s;
    if (std::sscanf(text.c_str(), "%d-%d-%dT%d:%d:%d", &y, &mo, &d, &h, &mi, &s) != 6)
        return std::nullopt;
    int64_t day = days_from_civil(y, mo, d) - kEpochDays;
    return (day * kSecondsPerDay + h * 3600 + mi * 60 + s) * kMicrosPerSecond;
}

std::optional<int> parse_time_of_day(const std::string& text) {
    int h, m;
    if (std::sscanf(text.c_str(), "%d:%d", &h, &m) != 2) return std::nullopt;
    if (h < 0 || h > 24 || m < 0 || m > 59) return std::nullopt;
    return h * 3600 + m * 60;
}

} // namespace homescope
