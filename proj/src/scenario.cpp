#include "homescope/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "homescope/time_util.hpp"

namespace homescope::sim {

using nlohmann::json;

const DeviceSpec* Scenario::find_device(const MacAddress& mac) const {
    for (const DeviceSpec& d : devices)
        if (d.mac == mac) return &d;
    return nullptr;
}

const Inhabitant* Scenario::find_inhabitant(const std::string& name) const {
    for (const Inhabitant& i : inhabitants)
        if (i.name == name) return &i;
    return nullptr;
}

Vec2 Scenario::device_position(const DeviceSpec& device, int64_t t_us) const {
    if (!device.carried_by) return {device.x, device.y};
    const Inhabitant* carrier = find_inhabitant(*device.carried_by);
    if (!carrier || carrier->waypoints.empty()) return {device.x, device.y};
    const auto& wp = carrier->waypoints;
    if (t_us <= wp.front().t_us) return {wp.front().x, wp.front().y};
    if (t_us >= wp.back().t_us) return {wp.back().x, wp.back().y};
    for (size_t i = 1; i < wp.size(); ++i) {
        if (t_us > wp[i].t_us) continue;
        double span = double(wp[i].t_us - wp[i - 1].t_us);
        double f = span > 0 ? double(t_us - wp[i - 1].t_us) / span : 1.0;
        return {wp[i - 1].x + f * (wp[i].x - wp[i - 1].x),
                wp[i - 1].y + f * (wp[i].y - wp[i - 1].y)};
    }
    return {wp.back().x, wp.back().y};
}

std::optional<std::string> Scenario::room_label_at(double x, double y) const {
    for (const Room& r : rooms)
        if (r.contains(x, y)) return r.label;
    return std::nullopt;
}

namespace {

[[noreturn]] void bad(const std::string& path, const std::string& what) {
    raise(ErrorCode::ScenarioError, path + ": " + what);
}

double need_num(const json& j, const char* key, const std::string& path) {
    if (!j.contains(key) || !j[key].is_number()) bad(path, std::string("missing number '") + key + "'");
    return j[key].get<double>();
}

std::string need_str(const json& j, const char* key, const std::string& path) {
    if (!j.contains(key) || !j[key].is_string()) bad(path, std::string("missing string '") + key + "'");
    return j[key].get<std::string>();
}

MacAddress need_mac(const json& j, const char* key, const std::string& path) {
    auto mac = MacAddress::parse(need_str(j, key, path));
    if (!mac) bad(path, std::string("bad mac in '") + key + "'");
    return *mac;
}

int64_t tod_us(const json& j, const char* key, const std::string& path) {
    auto t = parse_time_of_day(need_str(j, key, path));
    if (!t) bad(path, std::string("bad time of day in '") + key + "'");
    return int64_t(*t) * kMicrosPerSecond;
}

// A span is either absolute {start_s, end_s} or a recurrence
// {start_tod, end_tod, weekdays?} expanded over the scenario duration.
std::vector<TimeSpan> parse_spans(const json& arr, const Scenario& sc, const std::string& path) {
    if (!arr.is_array()) bad(path, "expected an array of time spans");
    std::vector<TimeSpan> out;
    for (size_t i = 0; i < arr.size(); ++i) {
        const json& j = arr[i];
        std::string p = path + "[" + std::to_string(i) + "]";
        if (j.contains("start_s")) {
            TimeSpan span{seconds_to_us(need_num(j, "start_s", p)),
                          seconds_to_us(need_num(j, "end_s", p))};
            if (span.end_us <= span.start_us) bad(p, "span end before start");
            out.push_back(span);
            continue;
        }
        int64_t a = tod_us(j, "start_tod", p);
        int64_t b = tod_us(j, "end_tod", p);
        std::set<int> weekdays;
        if (j.contains("weekdays")) {
            for (const json& w : j["weekdays"]) weekdays.insert(w.get<int>());
        }
        int64_t day_us = kSecondsPerDay * kMicrosPerSecond;
        int64_t end = sc.start_ts_us + sc.duration_us;
        for (int64_t day0 = day_index(sc.start_ts_us) * day_us; day0 < end; day0 += day_us) {
            if (!weekdays.empty() && !weekdays.count(weekday(day0))) continue;
            TimeSpan span{day0 + a, day0 + (b > a ? b : b + day_us)};
            span.start_us = std::max(span.start_us, sc.start_ts_us);
            span.end_us = std::min(span.end_us, end);
            if (span.end_us > span.start_us) out.push_back(span);
        }
    }
    std::sort(out.begin(), out.end(),
              [](const TimeSpan& a, const TimeSpan& b) { return a.start_us < b.start_us; });
    return out;
}

TrafficModel parse_traffic(const json& j, const Scenario& sc, const std::string& path) {
    TrafficModel m;
    std::string model = need_str(j, "model", path);
    if (model == "periodic") {
        m.kind = TrafficKind::Periodic;
        m.periodic.interval_s = need_num(j, "interval_s", path);
        m.periodic.pkts = int(need_num(j, "pkts", path));
        m.periodic.bytes = int(need_num(j, "bytes", path));
        if (j.contains("uplink")) m.periodic.uplink = j["uplink"].get<bool>();
        if (m.periodic.interval_s <= 0) bad(path, "interval_s must be positive");
        if (m.periodic.pkts <= 0 || m.periodic.bytes <= 0) bad(path, "pkts/bytes must be positive");
    } else if (model == "diurnal") {
        m.kind = TrafficKind::Diurnal;
        if (j.contains("active")) m.diurnal.active = parse_spans(j["active"], sc, path + ".active");
        if (j.contains("idle")) m.diurnal.idle = parse_spans(j["idle"], sc, path + ".idle");
        m.diurnal.burst_rate_hz = need_num(j, "burst_rate_hz", path);
        m.diurnal.idle_rate_hz = need_num(j, "idle_rate_hz", path);
        if (j.contains("down_fraction")) m.diurnal.down_fraction = j["down_fraction"].get<double>();
        m.diurnal.bytes = int(need_num(j, "bytes", path));
        if (m.diurnal.burst_rate_hz <= 0 || m.diurnal.idle_rate_hz < 0)
            bad(path, "rates must be positive");
        if (m.diurnal.down_fraction < 0 || m.diurnal.down_fraction > 1)
            bad(path, "down_fraction must be in [0, 1]");
    } else if (model == "streaming") {
        m.kind = TrafficKind::Streaming;
        if (j.contains("windows"))
            m.streaming.windows = parse_spans(j["windows"], sc, path + ".windows");
        m.streaming.down_rate_hz = need_num(j, "down_rate_hz", path);
        m.streaming.bytes = int(need_num(j, "bytes", path));
        if (m.streaming.down_rate_hz <= 0) bad(path, "down_rate_hz must be positive");
    } else {
        bad(path, "unknown traffic model '" + model + "'");
    }
    return m;
}

} // namespace

Scenario parse_scenario(const std::string& json_text, const std::string& origin) {
    json j = json::parse(json_text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) bad(origin, "not a JSON object");

    Scenario sc;
    sc.name = j.value("name", origin);
    if (j.contains("seed")) sc.seed = j["seed"].get<uint64_t>();
    double duration_s = need_num(j, "duration_s", origin);
    if (duration_s <= 0) bad(origin + ".duration_s", "duration must be positive");
    sc.duration_us = seconds_to_us(duration_s);
    if (j.contains("start_s")) sc.start_ts_us = seconds_to_us(j["start_s"].get<double>());
    if (j.contains("window_s")) sc.window_s = j["window_s"].get<int>();
    if (sc.window_s < 1) bad(origin + ".window_s", "window must be >= 1 s");
    sc.bssid = need_mac(j, "bssid", origin);
    if (j.contains("decoy_bssid")) sc.decoy_bssid = need_mac(j, "decoy_bssid", origin);

    if (j.contains("channel")) {
        const json& c = j["channel"];
        std::string p = origin + ".channel";
        if (c.contains("n")) sc.channel.n = c["n"].get<double>();
        if (c.contains("shadowing_sigma_db"))
            sc.channel.shadowing_sigma_db = c["shadowing_sigma_db"].get<double>();
        if (c.contains("default_p0_dbm")) sc.channel.default_p0_dbm = c["default_p0_dbm"].get<double>();
        if (c.contains("packet_loss")) sc.channel.packet_loss = c["packet_loss"].get<bool>();
        if (sc.channel.n <= 0) bad(p, "path-loss exponent must be positive");
        if (sc.channel.shadowing_sigma_db < 0) bad(p, "sigma must be >= 0");
    }

    if (!j.contains("sniffers") || !j["sniffers"].is_array()) bad(origin, "missing sniffers");
    for (size_t i = 0; i < j["sniffers"].size(); ++i) {
        const json& s = j["sniffers"][i];
        std::string p = origin + ".sniffers[" + std::to_string(i) + "]";
        sc.layout.sniffers.push_back(
            {need_str(s, "id", p), need_num(s, "x", p), need_num(s, "y", p)});
    }

    if (j.contains("walls")) {
        for (size_t i = 0; i < j["walls"].size(); ++i) {
            const json& w = j["walls"][i];
            std::string p = origin + ".walls[" + std::to_string(i) + "]";
            sc.walls.push_back({need_num(w, "x1", p), need_num(w, "y1", p), need_num(w, "x2", p),
                                need_num(w, "y2", p), w.value("attenuation_db", 5.0)});
        }
    }

    if (j.contains("rooms")) {
        for (size_t i = 0; i < j["rooms"].size(); ++i) {
            const json& r = j["rooms"][i];
            std::string p = origin + ".rooms[" + std::to_string(i) + "]";
            Room room;
            room.label = need_str(r, "label", p);
            room.min_x = need_num(r, "min_x", p);
            room.min_y = need_num(r, "min_y", p);
            room.max_x = need_num(r, "max_x", p);
            room.max_y = need_num(r, "max_y", p);
            room.excluded = r.value("excluded", false);
            if (room.max_x <= room.min_x || room.max_y <= room.min_y) bad(p, "empty room rectangle");
            sc.rooms.push_back(room);
        }
    }

    if (j.contains("inhabitants")) {
        for (size_t i = 0; i < j["inhabitants"].size(); ++i) {
            const json& h = j["inhabitants"][i];
            std::string p = origin + ".inhabitants[" + std::to_string(i) + "]";
            Inhabitant inh;
            inh.name = need_str(h, "name", p);
            bool daily = h.value("daily", false);
            if (!h.contains("waypoints") || !h["waypoints"].is_array()) bad(p, "missing waypoints");
            std::vector<Waypoint> base;
            for (size_t k = 0; k < h["waypoints"].size(); ++k) {
                const json& w = h["waypoints"][k];
                std::string wp = p + ".waypoints[" + std::to_string(k) + "]";
                Waypoint point;
                if (w.contains("t_s")) point.t_us = seconds_to_us(need_num(w, "t_s", wp));
                else point.t_us = tod_us(w, "tod", wp);
                point.x = need_num(w, "x", wp);
                point.y = need_num(w, "y", wp);
                base.push_back(point);
            }
            if (daily) {
                int64_t day_us = kSecondsPerDay * kMicrosPerSecond;
                int64_t end = sc.start_ts_us + sc.duration_us;
                for (int64_t day0 = day_index(sc.start_ts_us) * day_us; day0 < end; day0 += day_us)
                    for (const Waypoint& b : base)
                        inh.waypoints.push_back({day0 + b.t_us, b.x, b.y});
            } else {
                inh.waypoints = base;
            }
            std::sort(inh.waypoints.begin(), inh.waypoints.end(),
                      [](const Waypoint& a, const Waypoint& b) { return a.t_us < b.t_us; });
            sc.inhabitants.push_back(std::move(inh));
        }
    }

    if (!j.contains("devices") || !j["devices"].is_array()) bad(origin, "missing devices");
    for (size_t i = 0; i < j["devices"].size(); ++i) {
        const json& d = j["devices"][i];
        std::string p = origin + ".devices[" + std::to_string(i) + "]";
        DeviceSpec dev;
        dev.mac = need_mac(d, "mac", p);
        dev.name = d.value("name", dev.mac.to_string());
        dev.network = d.value("network", std::string("main"));
        if (dev.network != "main" && dev.network != "decoy") bad(p, "network must be main or decoy");
        if (d.contains("p0_dbm")) dev.p0_dbm = d["p0_dbm"].get<double>();
        if (d.contains("position")) {
            dev.x = need_num(d["position"], "x", p + ".position");
            dev.y = need_num(d["position"], "y", p + ".position");
        } else if (d.contains("carried_by")) {
            dev.carried_by = d["carried_by"].get<std::string>();
            if (!sc.find_inhabitant(*dev.carried_by))
                bad(p, "carried_by names unknown inhabitant '" + *dev.carried_by + "'");
        } else {
            bad(p, "device needs a position or a carrier");
        }
        if (d.contains("presence")) {
            const json& pr = d["presence"];
            dev.presence = TimeSpan{seconds_to_us(need_num(pr, "start_s", p + ".presence")),
                                    seconds_to_us(need_num(pr, "end_s", p + ".presence"))};
            if (dev.presence->end_us <= dev.presence->start_us) bad(p + ".presence", "empty span");
        }
        if (!d.contains("traffic")) bad(p, "missing traffic model");
        dev.traffic = parse_traffic(d["traffic"], sc, p + ".traffic");
        if (d.contains("ble")) {
            const json& b = d["ble"];
            std::string bp = p + ".ble";
            BleSpec ble;
            ble.local_name = need_str(b, "local_name", bp);
            if (b.contains("services")) {
                for (const json& s : b["services"]) {
                    unsigned v = 0;
                    if (s.is_string()) v = unsigned(std::stoul(s.get<std::string>(), nullptr, 16));
                    else v = s.get<unsigned>();
                    if (v > 0xffff) bad(bp, "service uuid out of 16-bit range");
                    ble.services.push_back(uint16_t(v));
                }
            }
            if (b.contains("adv_interval_s")) ble.adv_interval_s = b["adv_interval_s"].get<double>();
            if (ble.adv_interval_s <= 0) bad(bp, "adv_interval_s must be positive");
            dev.ble = std::move(ble);
        }
        if (d.contains("expected_vendor")) dev.expected_vendor = d["expected_vendor"].get<std::string>();
        for (const DeviceSpec& other : sc.devices)
            if (other.mac == dev.mac) bad(p, "duplicate device mac " + dev.mac.to_string());
        sc.devices.push_back(std::move(dev));
    }

    if (j.contains("activities")) {
        for (size_t i = 0; i < j["activities"].size(); ++i) {
            const json& a = j["activities"][i];
            std::string p = origin + ".activities[" + std::to_string(i) + "]";
            std::string who = a.value("who", std::string("resident"));
            std::string label = need_str(a, "label", p);
            json spans = json::array({a});
            for (const TimeSpan& span : parse_spans(spans, sc, p))
                sc.activities.push_back({who, label, span.start_us, span.end_us});
        }
    }
    return sc;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorCode::ScenarioError, "cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str(), path);
}

} // namespace homescope::sim
