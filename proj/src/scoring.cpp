#include "homescope/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace homescope::sim {

namespace {

double quantile_sorted(const std::vector<double>& v, double q) {
    if (v.empty()) return 0;
    double pos = q * double(v.size() - 1);
    size_t lo = size_t(pos);
    double frac = pos - double(lo);
    if (lo + 1 >= v.size()) return v.back();
    return v[lo] * (1 - frac) + v[lo + 1] * frac;
}

} // namespace

ScoreReport score_against_truth(const GroundTruth& truth, const PipelinePredictions& predictions) {
    ScoreReport report;

    size_t hits = 0, total = 0;
    for (const auto& [mac, truth_states] : truth.state) {
        auto it = predictions.states.find(mac);
        if (it == predictions.states.end()) continue;
        const StateTimeline& predicted = it->second;
        if (predicted.window_s != truth.window_s || predicted.start_ts_us != truth.start_ts_us)
            raise(ErrorCode::GridMismatch, "state timeline for " + mac.to_string() +
                                               " is off the truth grid");
        size_t n = std::min(truth_states.size(), predicted.states.size());
        size_t device_hits = 0;
        for (size_t i = 0; i < n; ++i) device_hits += predicted.states[i] == truth_states[i];
        report.per_device_state_accuracy[mac] = n ? double(device_hits) / double(n) : 0.0;
        hits += device_hits;
        total += n;
    }
    report.state_windows = total;
    report.state_accuracy = total ? double(hits) / double(total) : 0.0;

    size_t zone_hits = 0, zone_total = 0;
    for (const auto& [mac, truth_zones] : truth.zone) {
        auto it = predictions.zones.find(mac);
        if (it == predictions.zones.end()) continue;
        size_t n = std::min(truth_zones.size(), it->second.size());
        for (size_t i = 0; i < n; ++i) {
            const auto& tz = truth_zones[i];
            const auto& pz = it->second[i];
            if (!tz || !pz) continue;
            if (truth.excluded_zones.count(*tz)) continue;
            ++zone_total;
            zone_hits += *tz == *pz;
        }
    }
    report.zone_windows = zone_total;
    report.zone_accuracy = zone_total ? double(zone_hits) / double(zone_total) : 0.0;

    for (const auto& [mac, is_mobile] : truth.mobile) {
        auto it = predictions.stationarity.find(mac);
        if (it == predictions.stationarity.end()) continue;
        int t = is_mobile ? 1 : 0;
        int p = it->second == Locomotion::Mobile ? 1 : 0;
        ++report.stationarity_confusion[t][p];
    }

    std::vector<double> errors;
    for (const auto& [mac, truth_pos] : truth.position) {
        auto it = predictions.positions.find(mac);
        if (it == predictions.positions.end()) continue;
        size_t n = std::min(truth_pos.size(), it->second.size());
        for (size_t i = 0; i < n; ++i) {
            if (!truth_pos[i] || !it->second[i]) continue;
            errors.push_back((*truth_pos[i] - *it->second[i]).norm());
        }
    }
    std::sort(errors.begin(), errors.end());
    report.position_windows = errors.size();
    report.position_error_p50 = quantile_sorted(errors, 0.5);
    report.position_error_p90 = quantile_sorted(errors, 0.9);
    report.position_error_max = errors.empty() ? 0 : errors.back();

    size_t kind_hits = 0, kind_total = 0;
    for (const auto& [mac, truth_kind] : truth.kind) {
        auto it = predictions.kinds.find(mac);
        if (it == predictions.kinds.end()) continue;
        ++kind_total;
        kind_hits += it->second == truth_kind;
    }
    report.kind_devices = kind_total;
    report.kind_accuracy = kind_total ? double(kind_hits) / double(kind_total) : 0.0;

    size_t minutes = 0, covered = 0;
    for (const ActivityTruthSpan& span : truth.activities) {
        for (int64_t m = span.start_us; m < span.end_us; m += 60 * kMicrosPerSecond) {
            int64_t m_end = std::min(span.end_us, m + 60 * kMicrosPerSecond);
            ++minutes;
            for (const ActivityEvent& ev : predictions.events) {
                if (ev.label != span.label) continue;
                if (ev.start_us < m_end && ev.end_us > m) {
                    ++covered;
                    break;
                }
            }
        }
    }
    report.activity_minutes = minutes;
    report.activity_minute_coverage = minutes ? double(covered) / double(minutes) : 0.0;

    for (const GroundTruth::Guest& g : truth.guests) {
        ScoreReport::GuestBoundaryError err;
        err.mac = g.mac;
        for (const GuestEvent& ev : predictions.guests) {
            if (ev.guest_mac != g.mac) continue;
            err.matched = true;
            err.arrival_error_s = std::abs(double(ev.arrival_us - g.arrival_us)) / 1e6;
            err.departure_error_s = ev.departure_us
                                        ? std::abs(double(*ev.departure_us - g.departure_us)) / 1e6
                                        : -1.0;
            break;
        }
        report.guest_errors.push_back(err);
    }
    return report;
}

std::string ScoreReport::to_text() const {
    std::ostringstream out;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "state_accuracy\t%.6f\t(%zu windows)\n", state_accuracy,
                  state_windows);
    out << buf;
    for (const auto& [mac, acc] : per_device_state_accuracy) {
        std::snprintf(buf, sizeof(buf), "state_accuracy_device\t%s\t%.6f\n", mac.to_string().c_str(),
                      acc);
        out << buf;
    }
    std::snprintf(buf, sizeof(buf), "zone_accuracy\t%.6f\t(%zu windows)\n", zone_accuracy,
                  zone_windows);
    out << buf;
    std::snprintf(buf, sizeof(buf),
                  "stationarity_confusion\tss=%d sm=%d ms=%d mm=%d\n",
                  stationarity_confusion[0][0], stationarity_confusion[0][1],
                  stationarity_confusion[1][0], stationarity_confusion[1][1]);
    out << buf;
    std::snprintf(buf, sizeof(buf),
                  "position_error_m\tp50=%.4f\tp90=%.4f\tmax=%.4f\t(%zu windows)\n",
                  position_error_p50, position_error_p90, position_error_max, position_windows);
    out << buf;
    std::snprintf(buf, sizeof(buf), "kind_accuracy\t%.6f\t(%zu devices)\n", kind_accuracy,
                  kind_devices);
    out << buf;
    std::snprintf(buf, sizeof(buf), "activity_minute_coverage\t%.6f\t(%zu minutes)\n",
                  activity_minute_coverage, activity_minutes);
    out << buf;
    for (const GuestBoundaryError& g : guest_errors) {
        std::snprintf(buf, sizeof(buf), "guest\t%s\tmatched=%d\tarrival_err_s=%.1f\tdeparture_err_s=%.1f\n",
                      g.mac.to_string().c_str(), g.matched ? 1 : 0, g.arrival_error_s,
                      g.departure_error_s);
        out << buf;
    }
    return out.str();
}

} // namespace homescope::sim
