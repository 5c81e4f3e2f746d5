#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "homescope/frame.hpp"
#include "homescope/identity.hpp"
#include "homescope/time_util.hpp"

namespace homescope {

struct TrafficWindow {
    uint32_t up_pkts = 0;
    uint32_t down_pkts = 0;
    uint64_t up_bytes = 0;
    uint64_t down_bytes = 0;

    uint32_t total_pkts() const { return up_pkts + down_pkts; }
    bool operator==(const TrafficWindow&) const = default;
};

/// Windowed uplink/downlink counters for one device. Window i covers
/// [start_ts + i*window_s, start_ts + (i+1)*window_s).
struct TrafficSeries {
    MacAddress device;
    int window_s = 10;
    int64_t start_ts_us = 0;
    std::vector<TrafficWindow> windows;
    uint64_t untracked_pkts = 0; // peer/broadcast and AP-to-AP frames

    int64_t window_start_us(size_t i) const {
        return start_ts_us + int64_t(i) * window_s * kMicrosPerSecond;
    }
    int64_t end_ts_us() const { return window_start_us(windows.size()); }
};

enum class DeviceState : uint8_t { Off = 0, Idle = 1, Active = 2 };
const char* device_state_name(DeviceState s);

struct StateConfig {
    double th = 1.0;          // per-device active threshold, packets per window
    int off_gap_windows = 30; // consecutive empty windows before Off (5 min at 10 s)
};

struct StateTimeline {
    MacAddress device;
    int window_s = 10;
    int64_t start_ts_us = 0;
    std::vector<DeviceState> states;
};

struct PresenceIntervals {
    MacAddress device;
    int64_t gap_us = 0;
    std::vector<std::pair<int64_t, int64_t>> intervals; // disjoint, sorted, end > start
};

/// Bins one device's frames into traffic windows. Uplink/downlink frames feed
/// the directional counters; peer/broadcast (and AP-to-AP) frames go to the
/// untracked tally. Frames outside [start_ts, end_ts) are ignored.
/// Throws InvalidRange when end_ts <= start_ts.
TrafficSeries aggregate_windows(const std::vector<FrameRecord>& frames, const MacAddress& device,
                                int window_s, int64_t start_ts_us, int64_t end_ts_us);

/// Median of the nonzero per-window packet totals; 1.0 when every window is
/// zero. Even-count medians average the two middle values.
double compute_threshold(const TrafficSeries& series);

/// Off = inside a run of >= off_gap_windows zero-total windows; otherwise
/// Active iff total >= th (boundary inclusive), else Idle.
StateTimeline classify_states(const TrafficSeries& series, const StateConfig& config);

/// Centered moving average of the per-window totals, edges clipped to bounds.
/// k must be odd; k = 1 is the identity. Throws InvalidParameter on even k.
std::vector<double> rolling_mean(const TrafficSeries& series, int k);
std::vector<double> rolling_mean(const std::vector<double>& totals, int k);

struct KindConfig {
    int night_start_hour = 1; // night window 01:00..05:00
    int night_end_hour = 5;
    double smart_coverage = 0.90;
    double smart_night_coverage = 0.75;
    double manual_night_coverage = 0.25;
};

/// Smart devices talk around the clock; manually-controlled ones go silent at
/// night. Decided from hourly coverage (fraction of hour cells with >= 1
/// packet) and its restriction to the night window.
/// Throws InsufficientData when the series spans less than 20 hours.
DeviceKind classify_device_kind(const TrafficSeries& series, const KindConfig& config = {});

/// Merges nonzero windows separated by gaps shorter than gap_s into maximal
/// presence intervals. gap_s must be >= the series window.
PresenceIntervals presence_intervals(const TrafficSeries& series, int gap_s = 600);

struct RecurringAbsence {
    int weekday = 0;    // 0 = Monday
    int start_hour = 0; // inclusive
    int end_hour = 0;   // exclusive
    double day_support = 0;
};

struct WeeklyRoutine {
    double presence_prob[7][24] = {};
    int days_observed[7] = {};
    std::vector<RecurringAbsence> absences;
    std::optional<int> wake_hour; // earliest hour jumping from <=0.25 to >=0.75
};

/// Folds per-day presence intervals (>= 5 days) onto a weekday-hour grid.
/// Recurring absences are maximal hour runs with presence probability <= 0.25
/// holding on >= 60% of the matching weekdays.
WeeklyRoutine weekly_routine(const std::vector<PresenceIntervals>& days, const MacAddress& device);

/// CSV export: device,window_start_iso,up_pkts,down_pkts,up_bytes,down_bytes,state
std::string series_to_csv(const TrafficSeries& series, const StateTimeline& states);
std::string series_csv_header();

} // namespace homescope
