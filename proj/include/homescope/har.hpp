#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "homescope/identity.hpp"
#include "homescope/traffic.hpp"

namespace homescope {

/// Zone label per analysis window for one device (nullopt = no usable
/// fingerprint in that window). Shares the grid of the state timelines.
struct ZoneTrack {
    MacAddress device;
    int window_s = 10;
    int64_t start_ts_us = 0;
    std::vector<std::optional<std::string>> zones;
};

/// What rules may select on: a device's traffic-derived kind plus free labels
/// ("router", "tv", "laptop", ...) collected during identification.
struct CatalogEntry {
    DeviceKind kind = DeviceKind::Unknown;
    std::vector<std::string> labels;
};
using DeviceCatalog = std::map<MacAddress, CatalogEntry>;

struct RuleCondition {
    enum class Kind { State, Zone, Time };
    Kind kind = Kind::State;
    std::string selector;   // mac, profile kind, or free label (State/Zone)
    DeviceState state = DeviceState::Active;
    std::string zone_label;
    double min_fraction = 1.0;  // State/Zone, in (0, 1]
    int tod_start_s = 0;        // Time; the range may wrap midnight
    int tod_end_s = 0;
};

struct ActivityRule {
    std::string name;
    int priority = 0;
    int min_duration_s = 0;
    std::string emit_label;
    std::vector<RuleCondition> conditions;
};

/// Parses the rule file (one block per rule):
///
///   rule <name>
///   priority <int>
///   min_duration_s <int>
///   emit <label>
///   state <device-selector> <off|idle|active> <min_fraction>
///   zone <device-selector> <zone-label> <min_fraction>
///   time <HH:MM>-<HH:MM>
///
/// '#' starts a comment. Rules come back sorted by priority, descending.
/// Throws RuleError with the offending line on any schema violation.
std::vector<ActivityRule> compile_rules(const std::string& text);
std::vector<ActivityRule> load_rules(const std::string& path);

struct ActivityEvidence {
    MacAddress device;
    std::string condition; // human-readable condition that the device satisfied
};

struct ActivityEvent {
    std::string label;
    int64_t start_us = 0;
    int64_t end_us = 0;
    double confidence = 0; // minimum condition fraction achieved, in (0, 1]
    std::vector<ActivityEvidence> evidence;
};

/// Slides each rule's min_duration window across the shared grid; a rule
/// fires where every condition meets its fraction. Overlapping firings of one
/// rule merge; different rules may overlap and are all emitted, ordered by
/// priority then start. Throws GridMismatch when inputs disagree on the grid.
std::vector<ActivityEvent> evaluate_rules(const std::vector<ActivityRule>& rules,
                                          const std::vector<StateTimeline>& timelines,
                                          const std::vector<ZoneTrack>& tracks,
                                          const DeviceCatalog& catalog);

enum class GuestResemblance { Unknown, Multimedia };

struct GuestEvent {
    MacAddress guest_mac;
    int64_t arrival_us = 0;
    std::optional<int64_t> departure_us; // absent while the guest is still around
    GuestResemblance resembles = GuestResemblance::Unknown;
};

struct GuestConfig {
    int64_t departure_silence_us = 3600 * kMicrosPerSecond; // 1 h
    int window_s = 10;
};

/// New station macs appearing after the baseline period. Arrival is the first
/// frame; departure the last frame once the capture stays silent for the
/// configured hour. Devices whose bursty traffic resembles a multimedia
/// profile are marked as such.
std::vector<GuestEvent> detect_guests(const std::vector<FrameRecord>& frames,
                                      const std::map<MacAddress, DeviceProfile>& baseline,
                                      int64_t observation_start_us, const GuestConfig& config = {});

struct SleepWake {
    int64_t wake_us = 0;
    int64_t sleep_us = 0;
};

/// Day boundaries of inhabitant activity from manually-controlled devices.
/// The day pivots at 03:00 so late nights attribute to the preceding day:
/// wake is the first time after the pivot that any device leaves silence for
/// three consecutive windows, sleep the end of the last such run before the
/// next pivot. Nullopt when the pattern is absent (e.g. traffic around the
/// clock).
std::optional<SleepWake> detect_sleep_wake(const std::vector<TrafficSeries>& manual_series,
                                           int64_t day_start_us);

/// CSV export: label,start_iso,end_iso,confidence,evidence
std::string events_to_csv(const std::vector<ActivityEvent>& events);
std::string events_csv_header();

} // namespace homescope
