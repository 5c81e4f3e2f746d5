#pragma once

#include <random>

#include "homescope/ble.hpp"
#include "homescope/scenario.hpp"

namespace homescope::sim {

struct TrafficEvent {
    int64_t t_us = 0;
    Direction direction = Direction::Uplink;
    int bytes = 0;
};

/// Log-distance channel: p0 - 10 n log10(d) - wall losses + Normal(0, sigma).
/// Distance clamps at 0.1 m; wall crossings are exact segment intersections.
double sample_rssi(const Vec2& tx, const Vec2& rx, const ChannelModel& channel, double p0_dbm,
                   const std::vector<Wall>& walls, std::mt19937_64& rng);

/// Deterministic per (scenario seed, device mac): the same spec and seed
/// always produce byte-identical event streams, independent of other devices.
std::vector<TrafficEvent> generate_traffic(const DeviceSpec& device, const Scenario& scenario,
                                           uint64_t seed);

struct GroundTruth {
    int64_t start_ts_us = 0;
    int window_s = 10;
    size_t n_windows = 0;

    std::map<MacAddress, std::vector<DeviceState>> state;
    std::map<MacAddress, std::vector<std::optional<Vec2>>> position;
    std::map<MacAddress, std::vector<std::optional<std::string>>> zone;
    std::map<MacAddress, bool> mobile;
    std::map<MacAddress, DeviceKind> kind;
    std::map<MacAddress, std::string> network;
    std::map<MacAddress, std::string> vendor; // expected OUI vendor, when declared
    std::set<std::string> excluded_zones;
    std::vector<ActivityTruthSpan> activities;

    struct Guest {
        MacAddress mac;
        int64_t arrival_us = 0;
        int64_t departure_us = 0;
    };
    std::vector<Guest> guests;

    int64_t window_start_us(size_t i) const {
        return start_ts_us + int64_t(i) * window_s * kMicrosPerSecond;
    }
};

struct SimOutput {
    std::vector<FrameRecord> frames; // all sniffers, sorted by time
    std::vector<BleAdvRecord> ble;
    GroundTruth truth;

    // conservation bookkeeping: per device, observations = received + dropped
    std::map<MacAddress, uint64_t> generated_events;
    std::map<MacAddress, uint64_t> received;
    std::map<MacAddress, uint64_t> dropped;
};

/// Runs the full scenario: traffic events per device, per-sniffer channel
/// observations with the RSSI-dependent drop ramp, BLE advertisements, and
/// the grid-aligned ground truth. Bit-identical for a fixed seed.
SimOutput simulate(const Scenario& scenario);

void save_truth(const std::string& path, const GroundTruth& truth);
GroundTruth load_truth(const std::string& path);

/// Collapses multi-sniffer observations of one air frame (same timestamp and
/// endpoints) into one record for traffic analysis. Keeps the first sniffer's
/// copy in time order.
std::vector<FrameRecord> dedup_frames(const std::vector<FrameRecord>& frames);

} // namespace homescope::sim
