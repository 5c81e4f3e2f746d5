#pragma once

#include "homescope/har.hpp"
#include "homescope/localization.hpp"
#include "homescope/sim.hpp"
#include "homescope/traffic.hpp"

namespace homescope::sim {

/// What the analysis pipeline predicted, grid-aligned with the truth.
struct PipelinePredictions {
    std::map<MacAddress, StateTimeline> states;
    std::map<MacAddress, std::vector<std::optional<std::string>>> zones;
    std::map<MacAddress, Locomotion> stationarity;
    std::map<MacAddress, std::vector<std::optional<Vec2>>> positions;
    std::map<MacAddress, DeviceKind> kinds;
    std::vector<ActivityEvent> events;
    std::vector<GuestEvent> guests;
};

struct ScoreReport {
    double state_accuracy = 0;
    size_t state_windows = 0;
    std::map<MacAddress, double> per_device_state_accuracy;

    double zone_accuracy = 0;
    size_t zone_windows = 0;

    // confusion[truth][predicted], 0 = stationary, 1 = mobile
    int stationarity_confusion[2][2] = {};

    double position_error_p50 = 0;
    double position_error_p90 = 0;
    double position_error_max = 0;
    size_t position_windows = 0;

    double kind_accuracy = 0;
    size_t kind_devices = 0;

    double activity_minute_coverage = 0;
    size_t activity_minutes = 0;

    struct GuestBoundaryError {
        MacAddress mac;
        double arrival_error_s = 0;
        double departure_error_s = 0;
        bool matched = false;
    };
    std::vector<GuestBoundaryError> guest_errors;

    std::string to_text() const;
};

/// Compares pipeline outputs against the simulator's labeled truth.
/// Throws GridMismatch when the prediction grid disagrees with the truth grid.
ScoreReport score_against_truth(const GroundTruth& truth, const PipelinePredictions& predictions);

} // namespace homescope::sim
