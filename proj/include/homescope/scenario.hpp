#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "homescope/identity.hpp"
#include "homescope/localization.hpp"
#include "homescope/traffic.hpp"

namespace homescope::sim {

struct Wall {
    double x1 = 0, y1 = 0, x2 = 0, y2 = 0;
    double attenuation_db = 5.0;
};

struct Room {
    std::string label;
    double min_x = 0, min_y = 0, max_x = 0, max_y = 0;
    bool excluded = false; // in truth but not a localization target

    bool contains(double x, double y) const {
        return x >= min_x && x < max_x && y >= min_y && y < max_y;
    }
};

struct TimeSpan {
    int64_t start_us = 0;
    int64_t end_us = 0;

    bool contains(int64_t t) const { return t >= start_us && t < end_us; }
};

struct PeriodicModel {
    double interval_s = 60;
    int pkts = 1;
    int bytes = 100;
    bool uplink = true;
};

struct DiurnalModel {
    std::vector<TimeSpan> active;  // Poisson bursts at burst_rate
    std::vector<TimeSpan> idle;    // background chatter at idle_rate
    double burst_rate_hz = 1.0;
    double idle_rate_hz = 0.05;
    double down_fraction = 0.7;
    int bytes = 400;
};

struct StreamingModel {
    std::vector<TimeSpan> windows; // sustained downlink
    double down_rate_hz = 3.0;
    int bytes = 1200;
};

enum class TrafficKind { Periodic, Diurnal, Streaming };

struct TrafficModel {
    TrafficKind kind = TrafficKind::Periodic;
    PeriodicModel periodic;
    DiurnalModel diurnal;
    StreamingModel streaming;
};

struct BleSpec {
    std::string local_name;
    std::vector<uint16_t> services;
    double adv_interval_s = 5.0;
};

struct Waypoint {
    int64_t t_us = 0;
    double x = 0, y = 0;
};

struct DeviceSpec {
    MacAddress mac;
    std::string name;                // scenario-internal handle
    std::string network = "main";    // or "decoy"
    std::optional<double> p0_dbm;    // per-device transmit reference
    double x = 0, y = 0;             // fixed position
    std::optional<std::string> carried_by;
    TrafficModel traffic;
    std::optional<BleSpec> ble;
    std::optional<TimeSpan> presence; // guests: absent outside this span
    std::optional<std::string> expected_vendor;
};

struct Inhabitant {
    std::string name;
    std::vector<Waypoint> waypoints; // piecewise-linear path, clamped at the ends
};

struct ActivityTruthSpan {
    std::string who;
    std::string label;
    int64_t start_us = 0;
    int64_t end_us = 0;
};

struct ChannelModel {
    double n = 4.0;
    double shadowing_sigma_db = 2.0;
    double default_p0_dbm = -40.0;
    bool packet_loss = true; // RSSI-dependent drop ramp
};

struct Scenario {
    std::string name;
    uint64_t seed = 1;
    int64_t duration_us = 0;
    int64_t start_ts_us = 0;
    int window_s = 10; // analysis/truth grid
    MacAddress bssid;
    std::optional<MacAddress> decoy_bssid;
    ChannelModel channel;
    SnifferLayout layout;
    std::vector<Wall> walls;
    std::vector<Room> rooms;
    std::vector<DeviceSpec> devices;
    std::vector<Inhabitant> inhabitants;
    std::vector<ActivityTruthSpan> activities;

    const DeviceSpec* find_device(const MacAddress& mac) const;
    const Inhabitant* find_inhabitant(const std::string& name) const;
    /// Device position at an instant (fixed, or along the carrier's path).
    Vec2 device_position(const DeviceSpec& device, int64_t t_us) const;
    std::optional<std::string> room_label_at(double x, double y) const;
};

/// Parses and validates a scenario file (JSON). Recurring "tod"-based windows
/// and waypoints are expanded to absolute times over the duration here.
/// Throws ScenarioError naming the offending path on any violation.
Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& json_text, const std::string& origin = "scenario");

} // namespace homescope::sim
