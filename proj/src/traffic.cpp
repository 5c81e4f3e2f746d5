#include "homescope/traffic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "homescope/time_util.hpp"

namespace homescope {

const char* device_state_name(DeviceState s) {
    switch (s) {
    case DeviceState::Off: return "off";
    case DeviceState::Idle: return "idle";
    case DeviceState::Active: return "active";
    }
    return "?";
}

TrafficSeries aggregate_windows(const std::vector<FrameRecord>& frames, const MacAddress& device,
                                int window_s, int64_t start_ts_us, int64_t end_ts_us) {
    if (end_ts_us <= start_ts_us) raise(ErrorCode::InvalidRange, "end_ts <= start_ts");
    if (window_s < 1) raise(ErrorCode::InvalidParameter, "window_s must be >= 1");

    TrafficSeries series;
    series.device = device;
    series.window_s = window_s;
    series.start_ts_us = start_ts_us;
    int64_t window_us = int64_t(window_s) * kMicrosPerSecond;
    size_t n = size_t((end_ts_us - start_ts_us + window_us - 1) / window_us);
    series.windows.resize(n);

    for (const FrameRecord& f : frames) {
        int64_t ts = f.ts_us();
        if (ts < start_ts_us || ts >= end_ts_us) continue;
        size_t i = size_t((ts - start_ts_us) / window_us);
        TrafficWindow& w = series.windows[i];
        switch (f.direction) {
        case Direction::Uplink:
            ++w.up_pkts;
            w.up_bytes += f.body_len_bytes;
            break;
        case Direction::Downlink:
            ++w.down_pkts;
            w.down_bytes += f.body_len_bytes;
            break;
        default:
            ++series.untracked_pkts;
            break;
        }
    }
    return series;
}

double compute_threshold(const TrafficSeries& series) {
    std::vector<uint32_t> nonzero;
    for (const TrafficWindow& w : series.windows)
        if (w.total_pkts() > 0) nonzero.push_back(w.total_pkts());
    if (nonzero.empty()) return 1.0;
    std::sort(nonzero.begin(), nonzero.end());
    size_t n = nonzero.size();
    if (n % 2 == 1) return double(nonzero[n / 2]);
    return (double(nonzero[n / 2 - 1]) + double(nonzero[n / 2])) / 2.0;
}

StateTimeline classify_states(const TrafficSeries& series, const StateConfig& config) {
    StateTimeline tl;
    tl.device = series.device;
    tl.window_s = series.window_s;
    tl.start_ts_us = series.start_ts_us;
    size_t n = series.windows.size();
    tl.states.resize(n, DeviceState::Idle);

    size_t i = 0;
    while (i < n) {
        if (series.windows[i].total_pkts() == 0) {
            size_t j = i;
            while (j < n && series.windows[j].total_pkts() == 0) ++j;
            DeviceState s = (j - i >= size_t(config.off_gap_windows)) ? DeviceState::Off
                                                                      : DeviceState::Idle;
            for (size_t k = i; k < j; ++k) tl.states[k] = s;
            i = j;
        } else {
            tl.states[i] = double(series.windows[i].total_pkts()) >= config.th ? DeviceState::Active
                                                                               : DeviceState::Idle;
            ++i;
        }
    }
    return tl;
}

std::vector<double> rolling_mean(const std::vector<double>& totals, int k) {
    if (k < 1 || k % 2 == 0) raise(ErrorCode::InvalidParameter, "window size must be odd and >= 1");
    std::vector<double> out(totals.size());
    int half = (k - 1) / 2;
    int n = int(totals.size());
    for (int i = 0; i < n; ++i) {
        int lo = std::max(0, i - half);
        int hi = std::min(n - 1, i + half);
        double sum = 0;
        for (int j = lo; j <= hi; ++j) sum += totals[size_t(j)];
        out[size_t(i)] = sum / double(hi - lo + 1);
    }
    return out;
}

std::vector<double> rolling_mean(const TrafficSeries& series, int k) {
    std::vector<double> totals;
    totals.reserve(series.windows.size());
    for (const TrafficWindow& w : series.windows) totals.push_back(double(w.total_pkts()));
    return rolling_mean(totals, k);
}

DeviceKind classify_device_kind(const TrafficSeries& series, const KindConfig& config) {
    int64_t span_s = int64_t(series.windows.size()) * series.window_s;
    if (span_s < 20 * kSecondsPerHour)
        raise(ErrorCode::InsufficientData, "series spans " + std::to_string(span_s) +
                                               " s, need 20 h for kind classification");

    int64_t first_hour = series.start_ts_us / kMicrosPerSecond / kSecondsPerHour;
    int64_t last_hour = (series.end_ts_us() - 1) / kMicrosPerSecond / kSecondsPerHour;
    size_t cells = size_t(last_hour - first_hour + 1);
    std::vector<bool> covered(cells, false);

    int64_t window_us = int64_t(series.window_s) * kMicrosPerSecond;
    for (size_t i = 0; i < series.windows.size(); ++i) {
        if (series.windows[i].total_pkts() == 0) continue;
        int64_t ws = series.window_start_us(i);
        int64_t we = ws + window_us - 1;
        covered[size_t(ws / kMicrosPerSecond / kSecondsPerHour - first_hour)] = true;
        covered[size_t(we / kMicrosPerSecond / kSecondsPerHour - first_hour)] = true;
    }

    size_t total = 0, total_hit = 0, night = 0, night_hit = 0;
    for (size_t c = 0; c < cells; ++c) {
        int hod = int((first_hour + int64_t(c)) % 24);
        ++total;
        total_hit += covered[c];
        if (hod >= config.night_start_hour && hod < config.night_end_hour) {
            ++night;
            night_hit += covered[c];
        }
    }
    double coverage = total ? double(total_hit) / double(total) : 0.0;
    double night_coverage = night ? double(night_hit) / double(night) : 0.0;

    if (coverage >= config.smart_coverage && night_coverage >= config.smart_night_coverage)
        return DeviceKind::Smart;
    if (night_coverage <= config.manual_night_coverage) return DeviceKind::ManuallyControlled;
    return DeviceKind::Unknown;
}

PresenceIntervals presence_intervals(const TrafficSeries& series, int gap_s) {
    if (gap_s < series.window_s) raise(ErrorCode::InvalidParameter, "gap_s below window size");
    PresenceIntervals out;
    out.device = series.device;
    out.gap_us = int64_t(gap_s) * kMicrosPerSecond;
    int64_t window_us = int64_t(series.window_s) * kMicrosPerSecond;

    for (size_t i = 0; i < series.windows.size(); ++i) {
        if (series.windows[i].total_pkts() == 0) continue;
        int64_t ws = series.window_start_us(i);
        int64_t we = ws + window_us;
        if (!out.intervals.empty() && ws - out.intervals.back().second < out.gap_us)
            out.intervals.back().second = we;
        else
            out.intervals.emplace_back(ws, we);
    }
    return out;
}

WeeklyRoutine weekly_routine(const std::vector<PresenceIntervals>& days, const MacAddress&) {
    struct DayBits {
        int weekday = 0;
        std::array<bool, 24> present{};
    };
    std::vector<DayBits> observed;
    for (const PresenceIntervals& day : days) {
        if (day.intervals.empty()) continue;
        DayBits bits;
        int64_t day_start = day_index(day.intervals.front().first) * kSecondsPerDay *
                            kMicrosPerSecond;
        bits.weekday = weekday(day.intervals.front().first);
        for (const auto& [a, b] : day.intervals) {
            int64_t lo = std::max(a, day_start) - day_start;
            int64_t hi = std::min(b, day_start + kSecondsPerDay * kMicrosPerSecond) - day_start;
            if (hi <= lo) continue;
            int h0 = int(lo / kMicrosPerSecond / kSecondsPerHour);
            int h1 = int((hi - 1) / kMicrosPerSecond / kSecondsPerHour);
            for (int h = h0; h <= std::min(h1, 23); ++h) bits.present[size_t(h)] = true;
        }
        observed.push_back(bits);
    }
    if (observed.size() < 5)
        raise(ErrorCode::InsufficientData, "need >= 5 days of presence, have " +
                                               std::to_string(observed.size()));

    WeeklyRoutine routine;
    int present_count[7][24] = {};
    for (const DayBits& d : observed) {
        ++routine.days_observed[d.weekday];
        for (int h = 0; h < 24; ++h)
            if (d.present[size_t(h)]) ++present_count[d.weekday][h];
    }
    for (int wd = 0; wd < 7; ++wd)
        for (int h = 0; h < 24; ++h)
            routine.presence_prob[wd][h] = routine.days_observed[wd]
                                               ? double(present_count[wd][h]) /
                                                     double(routine.days_observed[wd])
                                               : 0.0;

    for (int wd = 0; wd < 7; ++wd) {
        if (!routine.days_observed[wd]) continue;
        int h = 0;
        while (h < 24) {
            if (routine.presence_prob[wd][h] > 0.25) {
                ++h;
                continue;
            }
            int start = h;
            while (h < 24 && routine.presence_prob[wd][h] <= 0.25) ++h;
            // Run-level support: days of this weekday absent over the whole run.
            int absent_days = 0;
            for (const DayBits& d : observed) {
                if (d.weekday != wd) continue;
                bool absent = true;
                for (int k = start; k < h; ++k) absent = absent && !d.present[size_t(k)];
                absent_days += absent;
            }
            double support = double(absent_days) / double(routine.days_observed[wd]);
            if (support >= 0.60)
                routine.absences.push_back({wd, start, h, support});
        }
    }

    // Wake edge on the all-days aggregate.
    double agg[24];
    for (int h = 0; h < 24; ++h) {
        int hits = 0;
        for (const DayBits& d : observed) hits += d.present[size_t(h)];
        agg[h] = double(hits) / double(observed.size());
    }
    for (int h = 1; h < 24; ++h) {
        if (agg[h - 1] <= 0.25 && agg[h] >= 0.75) {
            routine.wake_hour = h;
            break;
        }
    }
    return routine;
}

std::string series_csv_header() {
    return "device,window_start_iso,up_pkts,down_pkts,up_bytes,down_bytes,state";
}

std::string series_to_csv(const TrafficSeries& series, const StateTimeline& states) {
    std::ostringstream out;
    std::string mac = series.device.to_string();
    for (size_t i = 0; i < series.windows.size(); ++i) {
        const TrafficWindow& w = series.windows[i];
        out << mac << ',' << format_iso(series.window_start_us(i)) << ',' << w.up_pkts << ','
            << w.down_pkts << ',' << w.up_bytes << ',' << w.down_bytes << ','
            << (i < states.states.size() ? device_state_name(states.states[i]) : "?") << '\n';
    }
    return out.str();
}

} // namespace homescope
