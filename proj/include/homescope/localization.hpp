#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "homescope/frame.hpp"

namespace homescope {

using Vec2 = Eigen::Vector2d;

struct Sniffer {
    std::string id;
    double x = 0;
    double y = 0;

    Vec2 position() const { return {x, y}; }
};

/// Positions of the capture antennas in the model plane. Trilateration needs
/// at least three non-collinear sniffers.
struct SnifferLayout {
    std::vector<Sniffer> sniffers;

    size_t size() const { return sniffers.size(); }
    std::optional<size_t> index_of(const std::string& id) const;
    Vec2 centroid() const;
    bool collinear(double min_area = 1e-6) const;

    static SnifferLayout load(const std::string& path); // "id<TAB>x_m<TAB>y_m"
    void save(const std::string& path) const;
};

/// Log-distance path loss: p0 is the received power at the 1 m reference, n
/// the decay exponent (~2 free space, up to ~4+ indoors).
struct PathLossParams {
    double p0_dbm = -40.0;
    double n = 4.0;
};

/// d = 10^((p0 - rssi) / (10 n)); strictly decreasing in rssi, d(p0) = 1.
double rssi_to_distance(double rssi_dbm, const PathLossParams& params);

/// Per-sniffer median RSSI over one time window. Sniffers with no readings
/// stay absent; absence is evidence of range or obstruction, never imputed.
struct RssiFingerprint {
    MacAddress device;
    int64_t window_start_us = 0;
    std::vector<std::optional<double>> values; // aligned with SnifferLayout order
    std::vector<int> support;                  // readings per sniffer

    size_t present_count() const;
    bool usable() const { return present_count() >= 3; }
};

/// Median per-device per-window per-sniffer RSSI from multi-sniffer frames.
/// Only frames carrying an RSSI and a known sniffer id contribute.
std::map<MacAddress, std::vector<RssiFingerprint>> build_fingerprints(
    const std::vector<FrameRecord>& frames, const SnifferLayout& layout, int window_s);

struct PositionEstimate {
    double x = 0;
    double y = 0;
    std::optional<Vec2> direction; // unit vector from the layout centroid
    double residual = 0;           // RMS range mismatch, meters
    bool usable = false;

    Vec2 position() const { return {x, y}; }
};

/// Inverts per-sniffer pseudo-distances and solves the linearized circle
/// system (rows 2(s_i - s_0) . p = d_0^2 - d_i^2 + |s_i|^2 - |s_0|^2) by least
/// squares. Fewer than three present sniffers yields usable = false; a
/// collinear layout throws DegenerateLayout.
PositionEstimate trilaterate(const RssiFingerprint& fingerprint, const SnifferLayout& layout,
                             const PathLossParams& params);

/// normalize(p - centroid). The scale of the plane is arbitrary; the
/// direction is the part that survives unknown transmit powers.
/// Throws UndefinedDirection when the estimate sits on the centroid.
Vec2 direction_vector(const PositionEstimate& estimate, const SnifferLayout& layout);

enum class Locomotion { Stationary, Mobile };

struct StationarityConfig {
    double iqr_threshold_db = 4.0;
    size_t min_fingerprints = 50;
};

/// Stationary iff no sniffer's interquartile range of median RSSI across
/// windows exceeds the threshold. Order of windows is irrelevant.
/// Throws InsufficientData below the fingerprint minimum.
Locomotion classify_stationarity(const std::vector<RssiFingerprint>& fingerprints,
                                 const SnifferLayout& layout,
                                 const StationarityConfig& config = {});

/// Labeled reference fingerprints for nearest-match room recognition.
struct ZoneModel {
    struct Reference {
        std::string label;
        std::vector<std::optional<double>> values; // aligned with layout order
    };
    std::vector<Reference> references;

    static ZoneModel load(const std::string& path, size_t sniffer_count);
    void save(const std::string& path) const;
};

/// Component-wise median fingerprint per label. Each label needs >= 10
/// fingerprints with >= 3 present sniffers; duplicate labels are rejected.
ZoneModel learn_reference_points(
    const std::vector<std::pair<std::string, std::vector<RssiFingerprint>>>& labeled_sets);

struct ZoneMatch {
    std::string label;
    double distance_db = 0;
};

/// Nearest reference by RMS distance in dB space over mutually present
/// sniffers (>= 2 required per comparable reference); ties break to the
/// lexicographically smaller label. Throws NoComparableReference when no
/// reference shares enough sniffers.
ZoneMatch match_zone(const ZoneModel& model, const RssiFingerprint& fingerprint);

/// Distance used by match_zone, symmetric in its arguments; nullopt when
/// fewer than two components are mutually present.
std::optional<double> fingerprint_distance_db(const std::vector<std::optional<double>>& a,
                                              const std::vector<std::optional<double>>& b);

} // namespace homescope
