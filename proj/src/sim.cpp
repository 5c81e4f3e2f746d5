#include "homescope/sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace homescope::sim {

namespace {

uint64_t fnv1a64(std::string_view data, uint64_t seed) {
    uint64_t h = 14695981039346656037ull ^ seed;
    for (char c : data) {
        h ^= uint8_t(c);
        h *= 1099511628211ull;
    }
    return h;
}

uint64_t stream_seed(uint64_t scenario_seed, const MacAddress& mac, std::string_view tag) {
    return fnv1a64(mac.to_string() + "/" + std::string(tag), scenario_seed);
}

bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    auto cross = [](const Vec2& u, const Vec2& v) { return u.x() * v.y() - u.y() * v.x(); };
    double d1 = cross(d - c, a - c);
    double d2 = cross(d - c, b - c);
    double d3 = cross(b - a, c - a);
    double d4 = cross(b - a, d - a);
    return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

double drop_probability(double rssi_dbm) {
    // Linear ramp: 0% at >= -70 dBm up to 90% at <= -95 dBm.
    if (rssi_dbm >= -70.0) return 0.0;
    if (rssi_dbm <= -95.0) return 0.9;
    return 0.9 * (-70.0 - rssi_dbm) / 25.0;
}

} // namespace

double sample_rssi(const Vec2& tx, const Vec2& rx, const ChannelModel& channel, double p0_dbm,
                   const std::vector<Wall>& walls, std::mt19937_64& rng) {
    double d = std::max(0.1, (tx - rx).norm());
    double rssi = p0_dbm - 10.0 * channel.n * std::log10(d);
    for (const Wall& w : walls)
        if (segments_intersect(tx, rx, {w.x1, w.y1}, {w.x2, w.y2})) rssi -= w.attenuation_db;
    if (channel.shadowing_sigma_db > 0) {
        std::normal_distribution<double> noise(0.0, channel.shadowing_sigma_db);
        rssi += noise(rng);
    }
    return rssi;
}

namespace {

TimeSpan device_span(const DeviceSpec& device, const Scenario& sc) {
    TimeSpan span{sc.start_ts_us, sc.start_ts_us + sc.duration_us};
    if (device.presence) {
        span.start_us = std::max(span.start_us, device.presence->start_us);
        span.end_us = std::min(span.end_us, device.presence->end_us);
    }
    return span;
}

std::vector<TimeSpan> clip_spans(const std::vector<TimeSpan>& spans, const TimeSpan& bound) {
    std::vector<TimeSpan> out;
    for (const TimeSpan& s : spans) {
        TimeSpan c{std::max(s.start_us, bound.start_us), std::min(s.end_us, bound.end_us)};
        if (c.end_us > c.start_us) out.push_back(c);
    }
    return out;
}

void poisson_arrivals(std::vector<TrafficEvent>& out, const TimeSpan& span, double rate_hz,
                      double down_fraction, int bytes, std::mt19937_64& rng) {
    if (rate_hz <= 0) return;
    std::exponential_distribution<double> gap(rate_hz);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    double t = double(span.start_us) / double(kMicrosPerSecond);
    double end = double(span.end_us) / double(kMicrosPerSecond);
    while (true) {
        t += gap(rng);
        if (t >= end) break;
        Direction dir = coin(rng) < down_fraction ? Direction::Downlink : Direction::Uplink;
        out.push_back({int64_t(t * double(kMicrosPerSecond)), dir, bytes});
    }
}

} // namespace

std::vector<TrafficEvent> generate_traffic(const DeviceSpec& device, const Scenario& scenario,
                                           uint64_t seed) {
    std::mt19937_64 rng(stream_seed(seed, device.mac, "traffic"));
    std::vector<TrafficEvent> events;
    TimeSpan bound = device_span(device, scenario);
    if (bound.end_us <= bound.start_us) return events;

    const TrafficModel& model = device.traffic;
    switch (model.kind) {
    case TrafficKind::Periodic: {
        const PeriodicModel& m = model.periodic;
        int64_t interval_us = seconds_to_us(m.interval_s);
        Direction dir = m.uplink ? Direction::Uplink : Direction::Downlink;
        for (int64_t t = bound.start_us; t < bound.end_us; t += interval_us)
            for (int k = 0; k < m.pkts; ++k) {
                int64_t at = t + int64_t(k) * 2000; // 2 ms intra-burst spacing
                if (at < bound.end_us) events.push_back({at, dir, m.bytes});
            }
        break;
    }
    case TrafficKind::Diurnal: {
        const DiurnalModel& m = model.diurnal;
        for (const TimeSpan& span : clip_spans(m.active, bound)) {
            // Deterministic frames at the window edges stand in for the
            // association burst and teardown; they pin scripted boundaries.
            events.push_back({span.start_us, Direction::Uplink, m.bytes});
            events.push_back({span.end_us - 1000, Direction::Uplink, m.bytes});
            poisson_arrivals(events, span, m.burst_rate_hz, m.down_fraction, m.bytes, rng);
        }
        for (const TimeSpan& span : clip_spans(m.idle, bound))
            poisson_arrivals(events, span, m.idle_rate_hz, m.down_fraction, m.bytes, rng);
        break;
    }
    case TrafficKind::Streaming: {
        const StreamingModel& m = model.streaming;
        for (const TimeSpan& span : clip_spans(m.windows, bound)) {
            events.push_back({span.start_us, Direction::Downlink, m.bytes});
            events.push_back({span.end_us - 1000, Direction::Downlink, m.bytes});
            poisson_arrivals(events, span, m.down_rate_hz, 1.0, m.bytes, rng);
        }
        break;
    }
    }
    std::stable_sort(events.begin(), events.end(),
                     [](const TrafficEvent& a, const TrafficEvent& b) { return a.t_us < b.t_us; });
    return events;
}

namespace {

FrameRecord make_frame(const DeviceSpec& device, const Scenario& sc, const TrafficEvent& ev,
                       const std::string& sniffer_id, int rssi_dbm) {
    MacAddress bssid = device.network == "decoy" && sc.decoy_bssid ? *sc.decoy_bssid : sc.bssid;
    bool is_ap = device.mac == bssid;

    FrameRecord r;
    r.sniffer_id = sniffer_id;
    r.meta.timestamp_us = uint64_t(ev.t_us);
    r.meta.rssi_dbm = rssi_dbm;
    r.meta.channel_freq_mhz = 2447; // channel 8
    r.fc.ftype = FrameType::Data;
    r.fc.subtype = kSubtypeQosData;
    r.fc.to_ds = ev.direction == Direction::Uplink;
    r.fc.from_ds = ev.direction == Direction::Downlink;
    r.fc.raw_flags = uint8_t((r.fc.from_ds ? 2 : 0) | (r.fc.to_ds ? 1 : 0));
    r.direction = ev.direction;
    r.body_len_bytes = uint32_t(ev.bytes);

    ResolvedAddresses& a = r.addrs;
    a.bssid = bssid;
    if (ev.direction == Direction::Uplink) {
        a.ra = bssid;
        a.ta = device.mac;
        a.sa = device.mac;
        a.da = bssid; // gateway
    } else if (is_ap) {
        // The AP's own chatter (DTIM/group traffic) goes out as broadcast.
        a.ra = MacAddress::broadcast();
        a.da = MacAddress::broadcast();
        a.ta = bssid;
        a.sa = bssid;
    } else {
        a.ra = device.mac;
        a.da = device.mac;
        a.ta = bssid;
        a.sa = bssid;
    }
    return r;
}

struct ModelPhase {
    enum Level { Silent = 0, Background = 1, Burst = 2 };

    static Level at(const DeviceSpec& device, const Scenario& sc, int64_t t_us) {
        TimeSpan bound = device_span(device, sc);
        if (!bound.contains(t_us)) return Silent;
        const TrafficModel& m = device.traffic;
        switch (m.kind) {
        case TrafficKind::Periodic:
            return Burst; // resolved per window against the burst grid
        case TrafficKind::Diurnal:
            for (const TimeSpan& s : m.diurnal.active)
                if (s.contains(t_us)) return Burst;
            for (const TimeSpan& s : m.diurnal.idle)
                if (s.contains(t_us)) return Background;
            return Silent;
        case TrafficKind::Streaming:
            for (const TimeSpan& s : m.streaming.windows)
                if (s.contains(t_us)) return Burst;
            return Silent;
        }
        return Silent;
    }
};

// Truth state of a periodic device's window: Active when a scheduled burst
// lands inside it, otherwise part of the inter-burst silence.
bool periodic_burst_in_window(const DeviceSpec& device, const Scenario& sc, int64_t ws,
                              int64_t we) {
    TimeSpan bound = device_span(device, sc);
    int64_t interval_us = seconds_to_us(device.traffic.periodic.interval_s);
    if (interval_us <= 0) return false;
    int64_t lo = std::max(ws, bound.start_us);
    if (lo >= bound.end_us || we <= bound.start_us) return false;
    int64_t k = (lo - bound.start_us + interval_us - 1) / interval_us;
    int64_t burst = bound.start_us + k * interval_us;
    return burst < std::min(we, bound.end_us);
}

std::vector<DeviceState> truth_states(const DeviceSpec& device, const Scenario& sc,
                                      size_t n_windows, int off_gap_windows) {
    int64_t window_us = int64_t(sc.window_s) * kMicrosPerSecond;
    std::vector<DeviceState> states(n_windows, DeviceState::Idle);
    std::vector<bool> silent(n_windows, false);
    for (size_t i = 0; i < n_windows; ++i) {
        int64_t ws = sc.start_ts_us + int64_t(i) * window_us;
        int64_t mid = ws + window_us / 2;
        ModelPhase::Level level = ModelPhase::at(device, sc, mid);
        if (device.traffic.kind == TrafficKind::Periodic) {
            if (periodic_burst_in_window(device, sc, ws, ws + window_us))
                states[i] = DeviceState::Active;
            else if (level == ModelPhase::Silent)
                silent[i] = true;
            else
                states[i] = DeviceState::Idle;
        } else if (level == ModelPhase::Burst) {
            states[i] = DeviceState::Active;
        } else if (level == ModelPhase::Background) {
            states[i] = DeviceState::Idle;
        } else {
            silent[i] = true;
        }
    }
    // Silence becomes Off only across runs long enough to outlast the gap.
    size_t i = 0;
    while (i < n_windows) {
        if (!silent[i]) {
            ++i;
            continue;
        }
        size_t j = i;
        while (j < n_windows && silent[j]) ++j;
        DeviceState s = (j - i >= size_t(off_gap_windows)) ? DeviceState::Off : DeviceState::Idle;
        for (size_t k = i; k < j; ++k) states[k] = s;
        i = j;
    }
    return states;
}

} // namespace

SimOutput simulate(const Scenario& sc) {
    SimOutput out;
    GroundTruth& truth = out.truth;
    truth.start_ts_us = sc.start_ts_us;
    truth.window_s = sc.window_s;
    int64_t window_us = int64_t(sc.window_s) * kMicrosPerSecond;
    truth.n_windows = size_t((sc.duration_us + window_us - 1) / window_us);
    truth.activities = sc.activities;

    for (const DeviceSpec& device : sc.devices) {
        double p0 = device.p0_dbm.value_or(sc.channel.default_p0_dbm);
        std::vector<TrafficEvent> events = generate_traffic(device, sc, sc.seed);
        out.generated_events[device.mac] = events.size();

        std::vector<std::mt19937_64> obs_rng;
        obs_rng.reserve(sc.layout.size());
        for (const Sniffer& sniffer : sc.layout.sniffers)
            obs_rng.emplace_back(stream_seed(sc.seed, device.mac, "obs/" + sniffer.id));

        uint64_t received = 0, dropped = 0;
        std::uniform_real_distribution<double> coin(0.0, 1.0);
        for (const TrafficEvent& ev : events) {
            Vec2 pos = sc.device_position(device, ev.t_us);
            for (size_t si = 0; si < sc.layout.size(); ++si) {
                double rssi = sample_rssi(pos, sc.layout.sniffers[si].position(), sc.channel, p0,
                                          sc.walls, obs_rng[si]);
                bool drop = sc.channel.packet_loss && coin(obs_rng[si]) < drop_probability(rssi);
                if (drop) {
                    ++dropped;
                    continue;
                }
                ++received;
                out.frames.push_back(make_frame(device, sc, ev, sc.layout.sniffers[si].id,
                                                int(std::lround(rssi))));
            }
        }
        out.received[device.mac] = received;
        out.dropped[device.mac] = dropped;

        if (device.ble) {
            std::vector<AdStructure> structures;
            AdStructure name;
            name.ad_type = kAdCompleteName;
            name.value.assign(device.ble->local_name.begin(), device.ble->local_name.end());
            structures.push_back(std::move(name));
            if (!device.ble->services.empty()) {
                AdStructure uuids;
                uuids.ad_type = kAdUuid16Complete;
                for (uint16_t u : device.ble->services) {
                    uuids.value.push_back(uint8_t(u));
                    uuids.value.push_back(uint8_t(u >> 8));
                }
                structures.push_back(std::move(uuids));
            }
            Bytes payload = serialize_ad_structures(structures);

            std::vector<std::mt19937_64> ble_rng;
            for (const Sniffer& sniffer : sc.layout.sniffers)
                ble_rng.emplace_back(stream_seed(sc.seed, device.mac, "ble/" + sniffer.id));
            TimeSpan bound = device_span(device, sc);
            int64_t adv_us = seconds_to_us(device.ble->adv_interval_s);
            for (int64_t t = bound.start_us; t < bound.end_us; t += adv_us) {
                Vec2 pos = sc.device_position(device, t);
                for (size_t si = 0; si < sc.layout.size(); ++si) {
                    double rssi = sample_rssi(pos, sc.layout.sniffers[si].position(), sc.channel,
                                              p0, sc.walls, ble_rng[si]);
                    if (sc.channel.packet_loss && coin(ble_rng[si]) < drop_probability(rssi))
                        continue;
                    out.ble.push_back(make_ble_record(t, sc.layout.sniffers[si].id, device.mac,
                                                      int(std::lround(rssi)), payload));
                }
            }
        }

        // Ground truth for main-network devices.
        if (device.network != "main") {
            truth.network[device.mac] = device.network;
            continue;
        }
        truth.network[device.mac] = "main";
        truth.state[device.mac] = truth_states(device, sc, truth.n_windows, 30);
        truth.mobile[device.mac] = device.carried_by.has_value();
        truth.kind[device.mac] = device.traffic.kind == TrafficKind::Periodic
                                     ? DeviceKind::Smart
                                     : DeviceKind::ManuallyControlled;
        if (device.expected_vendor) truth.vendor[device.mac] = *device.expected_vendor;

        auto& positions = truth.position[device.mac];
        auto& zones = truth.zone[device.mac];
        positions.resize(truth.n_windows);
        zones.resize(truth.n_windows);
        TimeSpan bound = device_span(device, sc);
        for (size_t i = 0; i < truth.n_windows; ++i) {
            int64_t mid = truth.window_start_us(i) + window_us / 2;
            if (!bound.contains(mid)) continue;
            Vec2 pos = sc.device_position(device, mid);
            positions[i] = pos;
            zones[i] = sc.room_label_at(pos.x(), pos.y());
        }

        if (device.presence)
            truth.guests.push_back({device.mac, device.presence->start_us, device.presence->end_us});
    }

    for (const Room& room : sc.rooms)
        if (room.excluded) truth.excluded_zones.insert(room.label);

    std::stable_sort(out.frames.begin(), out.frames.end(),
                     [](const FrameRecord& a, const FrameRecord& b) {
                         if (a.ts_us() != b.ts_us()) return a.ts_us() < b.ts_us();
                         return a.sniffer_id < b.sniffer_id;
                     });
    std::stable_sort(out.ble.begin(), out.ble.end(),
                     [](const BleAdvRecord& a, const BleAdvRecord& b) {
                         if (a.timestamp_us != b.timestamp_us) return a.timestamp_us < b.timestamp_us;
                         return a.sniffer_id < b.sniffer_id;
                     });
    return out;
}

std::vector<FrameRecord> dedup_frames(const std::vector<FrameRecord>& frames) {
    std::vector<FrameRecord> sorted = frames;
    std::stable_sort(sorted.begin(), sorted.end(), [](const FrameRecord& a, const FrameRecord& b) {
        if (a.ts_us() != b.ts_us()) return a.ts_us() < b.ts_us();
        return a.sniffer_id < b.sniffer_id;
    });
    std::vector<FrameRecord> out;
    for (const FrameRecord& f : sorted) {
        if (!out.empty()) {
            const FrameRecord& last = out.back();
            if (last.ts_us() == f.ts_us() && last.addrs.sa == f.addrs.sa &&
                last.addrs.da == f.addrs.da && last.body_len_bytes == f.body_len_bytes)
                continue;
        }
        out.push_back(f);
    }
    return out;
}

namespace {

char state_char(DeviceState s) {
    switch (s) {
    case DeviceState::Off: return 'O';
    case DeviceState::Idle: return 'I';
    case DeviceState::Active: return 'A';
    }
    return '?';
}

DeviceState state_from_char(char c) {
    if (c == 'O') return DeviceState::Off;
    if (c == 'A') return DeviceState::Active;
    return DeviceState::Idle;
}

} // namespace

void save_truth(const std::string& path, const GroundTruth& truth) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) raise(ErrorCode::IoError, "cannot write " + path);
    char buf[96];
    out << "meta\t" << truth.start_ts_us << '\t' << truth.window_s << '\t' << truth.n_windows
        << '\n';
    for (const auto& [mac, network] : truth.network) {
        out << "device\t" << mac.to_string() << '\t' << network;
        auto kind = truth.kind.find(mac);
        out << '\t' << (kind != truth.kind.end() ? device_kind_name(kind->second) : "unknown");
        auto mobile = truth.mobile.find(mac);
        out << '\t' << (mobile != truth.mobile.end() && mobile->second ? 1 : 0);
        auto vendor = truth.vendor.find(mac);
        out << '\t' << (vendor != truth.vendor.end() ? vendor->second : "-") << '\n';
    }
    for (const auto& [mac, states] : truth.state) {
        out << "state\t" << mac.to_string() << '\t';
        for (DeviceState s : states) out << state_char(s);
        out << '\n';
    }
    for (const auto& [mac, positions] : truth.position) {
        const auto& zones = truth.zone.at(mac);
        for (size_t i = 0; i < positions.size(); ++i) {
            if (!positions[i]) continue;
            std::snprintf(buf, sizeof(buf), "%.17g\t%.17g", positions[i]->x(), positions[i]->y());
            out << "pos\t" << mac.to_string() << '\t' << i << '\t' << buf << '\t'
                << (zones[i] ? *zones[i] : "-") << '\n';
        }
    }
    for (const std::string& z : truth.excluded_zones) out << "excluded_zone\t" << z << '\n';
    for (const ActivityTruthSpan& a : truth.activities)
        out << "activity\t" << a.who << '\t' << a.label << '\t' << a.start_us << '\t' << a.end_us
            << '\n';
    for (const GroundTruth::Guest& g : truth.guests)
        out << "guest\t" << g.mac.to_string() << '\t' << g.arrival_us << '\t' << g.departure_us
            << '\n';
}

GroundTruth load_truth(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorCode::IoError, "cannot open " + path);
    GroundTruth truth;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string kind;
        std::getline(row, kind, '\t');
        auto fail = [&]() {
            raise(ErrorCode::ParseError, path + " line " + std::to_string(line_no));
        };
        auto next = [&]() {
            std::string cell;
            if (!std::getline(row, cell, '\t')) fail();
            return cell;
        };
        if (kind == "meta") {
            truth.start_ts_us = std::stoll(next());
            truth.window_s = std::stoi(next());
            truth.n_windows = size_t(std::stoull(next()));
        } else if (kind == "device") {
            auto mac = MacAddress::parse(next());
            if (!mac) fail();
            truth.network[*mac] = next();
            std::string k = next();
            truth.kind[*mac] = k == "smart" ? DeviceKind::Smart
                               : k == "manually-controlled" ? DeviceKind::ManuallyControlled
                                                            : DeviceKind::Unknown;
            truth.mobile[*mac] = next() == "1";
            std::string vendor = next();
            if (vendor != "-") truth.vendor[*mac] = vendor;
        } else if (kind == "state") {
            auto mac = MacAddress::parse(next());
            if (!mac) fail();
            std::string chars = next();
            auto& states = truth.state[*mac];
            states.reserve(chars.size());
            for (char c : chars) states.push_back(state_from_char(c));
        } else if (kind == "pos") {
            auto mac = MacAddress::parse(next());
            if (!mac) fail();
            size_t i = size_t(std::stoull(next()));
            auto& positions = truth.position[*mac];
            auto& zones = truth.zone[*mac];
            if (positions.size() < truth.n_windows) positions.resize(truth.n_windows);
            if (zones.size() < truth.n_windows) zones.resize(truth.n_windows);
            if (i >= positions.size()) fail();
            double x = std::stod(next());
            double y = std::stod(next());
            positions[i] = Vec2{x, y};
            std::string zone = next();
            if (zone != "-") zones[i] = zone;
        } else if (kind == "excluded_zone") {
            truth.excluded_zones.insert(next());
        } else if (kind == "activity") {
            ActivityTruthSpan a;
            a.who = next();
            a.label = next();
            a.start_us = std::stoll(next());
            a.end_us = std::stoll(next());
            truth.activities.push_back(a);
        } else if (kind == "guest") {
            auto mac = MacAddress::parse(next());
            if (!mac) fail();
            GroundTruth::Guest g;
            g.mac = *mac;
            g.arrival_us = std::stoll(next());
            g.departure_us = std::stoll(next());
            truth.guests.push_back(g);
        } else {
            fail();
        }
    }
    return truth;
}

} // namespace homescope::sim
