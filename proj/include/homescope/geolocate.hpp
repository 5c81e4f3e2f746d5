#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

namespace homescope {

struct GeoHit {
    double latitude = 0;
    double longitude = 0;
    std::string last_seen_iso;

    bool operator==(const GeoHit&) const = default;
};

/// SSID geolocation against a wardriving database. Two modes:
///   - fixture: a local "ssid<TAB>lat<TAB>lon<TAB>last_seen_iso" table; never
///     touches the network (the default, keeps the test suite hermetic)
///   - live: one HTTP GET per SSID against a network-search endpoint with
///     basic auth, serialized with a minimum interval between requests
/// Unknown SSIDs yield an empty list; transport and auth failures raise
/// RetriableLookupError. Hits are sorted most recent first.
class GeoClient {
public:
    static GeoClient fixture(const std::string& path);
    static GeoClient fixture_from_text(const std::string& text);
    static GeoClient live(std::string base_url, std::string user, std::string password,
                          std::chrono::milliseconds min_interval = std::chrono::milliseconds(1500));

    std::vector<GeoHit> lookup(const std::string& ssid);

private:
    GeoClient() = default;

    bool live_mode_ = false;
    // fixture mode
    std::vector<std::pair<std::string, GeoHit>> table_;
    // live mode
    std::string base_url_, user_, password_;
    std::chrono::milliseconds min_interval_{0};
    std::chrono::steady_clock::time_point last_request_{};
};

} // namespace homescope
