#pragma once

#include <filesystem>

#include "homescope/geolocate.hpp"
#include "homescope/har.hpp"
#include "homescope/localization.hpp"
#include "homescope/scoring.hpp"
#include "homescope/traffic.hpp"

namespace homescope {

/// Station a frame's traffic belongs to: the non-AP endpoint (transmitter for
/// broadcast downlink). Nullopt for AP-to-AP frames.
std::optional<MacAddress> station_of(const FrameRecord& frame);

struct AnalysisConfig {
    int window_s = 10;
    int off_gap_windows = 30;
    int presence_gap_s = 600;
    PathLossParams pathloss;
    StationarityConfig stationarity;
    /// Grid origin; defaults to the local midnight preceding the first frame.
    std::optional<int64_t> start_ts_us;
    std::optional<int64_t> end_ts_us;
};

/// Everything the analysis derives from one capture, on one shared grid.
struct Analysis {
    int64_t start_ts_us = 0;
    int64_t end_ts_us = 0;
    int window_s = 10;
    size_t n_windows = 0;

    std::vector<MacAddress> devices; // stations, sorted
    std::map<MacAddress, TrafficSeries> series;
    std::map<MacAddress, double> thresholds;
    std::map<MacAddress, StateTimeline> states;
    std::map<MacAddress, DeviceKind> kinds; // devices with >= 20 h of data
    std::map<MacAddress, std::vector<RssiFingerprint>> fingerprints;
    std::map<MacAddress, Locomotion> stationarity;
    std::map<MacAddress, std::vector<std::optional<PositionEstimate>>> track; // per grid window
    std::map<MacAddress, std::vector<std::optional<std::string>>> zones;
};

/// Runs windowing, thresholds, states, kinds, fingerprints, stationarity and
/// (given a layout) the position track; zones additionally need a model.
Analysis analyze(const std::vector<FrameRecord>& frames, const SnifferLayout* layout,
                 const ZoneModel* zones, const AnalysisConfig& config = {});

/// Grid-aligned fingerprint lookup used to build tracks and zone assignments.
std::map<MacAddress, std::vector<std::optional<RssiFingerprint>>> fingerprint_grid(
    const std::map<MacAddress, std::vector<RssiFingerprint>>& fingerprints, int64_t start_ts_us,
    size_t n_windows, int window_s);

ZoneTrack zone_track_of(const Analysis& analysis, const MacAddress& device);

/// Writes a file atomically (temp file + rename) so interrupted runs never
/// leave half-written outputs.
void atomic_write(const std::filesystem::path& path, const std::string& content);

struct ReportInputs {
    const Analysis* analysis = nullptr;
    const std::map<MacAddress, DeviceProfile>* profiles = nullptr;
    const ProbeInventory* probes = nullptr;
    const std::vector<ActivityEvent>* events = nullptr;
    const std::vector<GuestEvent>* guests = nullptr;
};

/// Report bundle: summary.txt (device table, state statistics, zone table,
/// event timeline) plus per-device plot-data files (uplink, downlink,
/// smoothed totals) under plots/. Pure data, renderable by any plotting tool.
void emit_report(const ReportInputs& inputs, const std::filesystem::path& out_dir);

} // namespace homescope
