#include "homescope/geolocate.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "homescope/error.hpp"

namespace homescope {

using nlohmann::json;

GeoClient GeoClient::fixture(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorCode::IoError, "cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return fixture_from_text(ss.str());
}

GeoClient GeoClient::fixture_from_text(const std::string& text) {
    GeoClient c;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream row(line);
        std::string ssid, lat, lon, seen;
        if (!std::getline(row, ssid, '\t') || !std::getline(row, lat, '\t') ||
            !std::getline(row, lon, '\t') || !std::getline(row, seen))
            continue;
        try {
            c.table_.emplace_back(ssid, GeoHit{std::stod(lat), std::stod(lon), seen});
        } catch (...) {
        }
    }
    return c;
}

GeoClient GeoClient::live(std::string base_url, std::string user, std::string password,
                          std::chrono::milliseconds min_interval) {
    GeoClient c;
    c.live_mode_ = true;
    c.base_url_ = std::move(base_url);
    c.user_ = std::move(user);
    c.password_ = std::move(password);
    c.min_interval_ = min_interval;
    return c;
}

std::vector<GeoHit> GeoClient::lookup(const std::string& ssid) {
    std::vector<GeoHit> hits;
    if (!live_mode_) {
        for (const auto& [name, hit] : table_)
            if (name == ssid) hits.push_back(hit);
    } else {
        auto now = std::chrono::steady_clock::now();
        if (last_request_.time_since_epoch().count() != 0 && now - last_request_ < min_interval_)
            std::this_thread::sleep_for(min_interval_ - (now - last_request_));
        last_request_ = std::chrono::steady_clock::now();

        httplib::Client client(base_url_);
        client.set_basic_auth(user_, password_);
        client.set_connection_timeout(10);
        httplib::Params params{{"ssid", ssid}};
        auto res = client.Get("/api/v2/network/search", params, httplib::Headers{});
        if (!res) raise(ErrorCode::RetriableLookupError, "transport failure querying " + base_url_);
        if (res->status == 401 || res->status == 403)
            raise(ErrorCode::RetriableLookupError, "authentication rejected");
        if (res->status != 200)
            raise(ErrorCode::RetriableLookupError, "HTTP " + std::to_string(res->status));
        json j = json::parse(res->body, nullptr, false);
        if (j.is_discarded() || !j.contains("results") || !j["results"].is_array())
            raise(ErrorCode::RetriableLookupError, "unparseable response body");
        for (const json& row : j["results"]) {
            GeoHit hit;
            if (!row.contains("trilat") || !row.contains("trilong")) continue;
            hit.latitude = row["trilat"].get<double>();
            hit.longitude = row["trilong"].get<double>();
            if (row.contains("lastupdt") && row["lastupdt"].is_string())
                hit.last_seen_iso = row["lastupdt"].get<std::string>();
            hits.push_back(hit);
        }
    }
    std::stable_sort(hits.begin(), hits.end(),
                     [](const GeoHit& a, const GeoHit& b) { return a.last_seen_iso > b.last_seen_iso; });
    return hits;
}

} // namespace homescope
