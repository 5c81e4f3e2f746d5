#include "homescope/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "homescope/sim.hpp"
#include "homescope/time_util.hpp"

namespace homescope {

namespace fs = std::filesystem;

std::optional<MacAddress> station_of(const FrameRecord& frame) {
    switch (frame.direction) {
    case Direction::Uplink:
        return frame.addrs.sa;
    case Direction::Downlink:
        return frame.addrs.da.is_broadcast() ? frame.addrs.sa : frame.addrs.da;
    case Direction::PeerOrBroadcast:
        return frame.addrs.sa.is_broadcast() ? std::optional<MacAddress>{} : frame.addrs.sa;
    case Direction::ApToAp:
        return std::nullopt;
    }
    return std::nullopt;
}

std::map<MacAddress, std::vector<std::optional<RssiFingerprint>>> fingerprint_grid(
    const std::map<MacAddress, std::vector<RssiFingerprint>>& fingerprints, int64_t start_ts_us,
    size_t n_windows, int window_s) {
    std::map<MacAddress, std::vector<std::optional<RssiFingerprint>>> grid;
    int64_t window_us = int64_t(window_s) * kMicrosPerSecond;
    for (const auto& [mac, list] : fingerprints) {
        auto& cells = grid[mac];
        cells.resize(n_windows);
        for (const RssiFingerprint& fp : list) {
            int64_t off = fp.window_start_us - start_ts_us;
            if (off < 0 || off % window_us != 0) continue;
            size_t i = size_t(off / window_us);
            if (i < n_windows) cells[i] = fp;
        }
    }
    return grid;
}

Analysis analyze(const std::vector<FrameRecord>& frames, const SnifferLayout* layout,
                 const ZoneModel* zone_model, const AnalysisConfig& config) {
    Analysis a;
    a.window_s = config.window_s;

    std::vector<FrameRecord> unique = sim::dedup_frames(frames);
    int64_t min_ts = 0, max_ts = 0;
    if (!unique.empty()) {
        min_ts = unique.front().ts_us();
        max_ts = unique.front().ts_us();
        for (const FrameRecord& f : unique) {
            min_ts = std::min(min_ts, f.ts_us());
            max_ts = std::max(max_ts, f.ts_us());
        }
    }
    int64_t day_us = kSecondsPerDay * kMicrosPerSecond;
    a.start_ts_us = config.start_ts_us.value_or(day_index(min_ts) * day_us);
    int64_t window_us = int64_t(a.window_s) * kMicrosPerSecond;
    int64_t raw_end = config.end_ts_us.value_or(max_ts + 1);
    a.end_ts_us = a.start_ts_us + (std::max<int64_t>(raw_end - a.start_ts_us, window_us) + window_us - 1) /
                                      window_us * window_us;
    a.n_windows = size_t((a.end_ts_us - a.start_ts_us) / window_us);

    std::map<MacAddress, std::vector<FrameRecord>> per_station;
    for (const FrameRecord& f : unique) {
        auto mac = station_of(f);
        if (mac) per_station[*mac].push_back(f);
    }
    for (const auto& [mac, list] : per_station) a.devices.push_back(mac);

    for (const auto& [mac, list] : per_station) {
        TrafficSeries series = aggregate_windows(list, mac, a.window_s, a.start_ts_us, a.end_ts_us);
        double th = compute_threshold(series);
        a.thresholds[mac] = th;
        StateConfig sc{th, config.off_gap_windows};
        a.states[mac] = classify_states(series, sc);
        try {
            a.kinds[mac] = classify_device_kind(series);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::InsufficientData) throw;
        }
        a.series[mac] = std::move(series);
    }

    if (layout) {
        a.fingerprints = build_fingerprints(frames, *layout, a.window_s);
        for (const auto& [mac, list] : a.fingerprints) {
            try {
                a.stationarity[mac] = classify_stationarity(list, *layout, config.stationarity);
            } catch (const Error& e) {
                if (e.code() != ErrorCode::InsufficientData) throw;
            }
        }
        auto grid = fingerprint_grid(a.fingerprints, a.start_ts_us, a.n_windows, a.window_s);
        for (const auto& [mac, cells] : grid) {
            auto& track = a.track[mac];
            auto& zones = a.zones[mac];
            track.resize(a.n_windows);
            zones.resize(a.n_windows);
            for (size_t i = 0; i < a.n_windows; ++i) {
                if (!cells[i] || !cells[i]->usable()) continue;
                PositionEstimate est = trilaterate(*cells[i], *layout, config.pathloss);
                if (!est.usable) continue;
                track[i] = est;
                if (zone_model) {
                    try {
                        zones[i] = match_zone(*zone_model, *cells[i]).label;
                    } catch (const Error& e) {
                        if (e.code() != ErrorCode::NoComparableReference) throw;
                    }
                }
            }
        }
    }
    return a;
}

ZoneTrack zone_track_of(const Analysis& analysis, const MacAddress& device) {
    ZoneTrack track;
    track.device = device;
    track.window_s = analysis.window_s;
    track.start_ts_us = analysis.start_ts_us;
    auto it = analysis.zones.find(device);
    if (it != analysis.zones.end()) track.zones = it->second;
    else track.zones.resize(analysis.n_windows);
    return track;
}

void atomic_write(const fs::path& path, const std::string& content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) raise(ErrorCode::IoError, "cannot write " + tmp.string());
        out.write(content.data(), std::streamsize(content.size()));
        if (!out) raise(ErrorCode::IoError, "short write to " + tmp.string());
    }
    fs::rename(tmp, path);
}

namespace {

std::string plot_series(const TrafficSeries& series, bool uplink) {
    std::ostringstream out;
    for (size_t i = 0; i < series.windows.size(); ++i) {
        uint32_t v = uplink ? series.windows[i].up_pkts : series.windows[i].down_pkts;
        if (v == 0) continue; // sparse output keeps plot files small
        out << series.window_start_us(i) / kMicrosPerSecond << '\t' << v << '\n';
    }
    return out.str();
}

std::string plot_smoothed(const TrafficSeries& series, int k) {
    std::vector<double> smooth = rolling_mean(series, k);
    std::ostringstream out;
    char buf[32];
    for (size_t i = 0; i < smooth.size(); ++i) {
        if (smooth[i] == 0) continue;
        std::snprintf(buf, sizeof(buf), "%.4f", smooth[i]);
        out << series.window_start_us(i) / kMicrosPerSecond << '\t' << buf << '\n';
    }
    return out.str();
}

std::string mac_file_stem(const MacAddress& mac) {
    std::string s = mac.to_string();
    std::replace(s.begin(), s.end(), ':', '-');
    return s;
}

std::string profile_type(const DeviceProfile& profile) {
    static const char* known[] = {"tv",      "laptop", "console", "phone",
                                  "sensor",  "bulb",   "plug",    "router"};
    for (const char* label : known)
        if (profile.has_label(label)) return label;
    return device_kind_name(profile.kind);
}

std::string profile_source(const DeviceProfile& profile) {
    if (profile.has_label("router")) return "mac address & addressing";
    if (profile.ble_name) return "ble";
    return "mac address";
}

} // namespace

void emit_report(const ReportInputs& inputs, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    fs::create_directories(out_dir / "plots");

    std::ostringstream summary;
    summary << "# passive capture analysis report\n";

    if (inputs.analysis) {
        const Analysis& a = *inputs.analysis;
        summary << "grid\tstart=" << format_iso(a.start_ts_us) << "\twindow_s=" << a.window_s
                << "\twindows=" << a.n_windows << '\n';

        std::ostringstream states_csv;
        states_csv << series_csv_header() << '\n';
        for (const MacAddress& mac : a.devices) {
            const TrafficSeries& series = a.series.at(mac);
            states_csv << series_to_csv(series, a.states.at(mac));
            std::string stem = mac_file_stem(mac);
            atomic_write(out_dir / "plots" / (stem + "_uplink.tsv"), plot_series(series, true));
            atomic_write(out_dir / "plots" / (stem + "_downlink.tsv"), plot_series(series, false));
            atomic_write(out_dir / "plots" / (stem + "_smoothed.tsv"), plot_smoothed(series, 31));
        }
        atomic_write(out_dir / "states.csv", states_csv.str());

        std::ostringstream track_csv;
        track_csv << "device,window_start_iso,x,y,dir_x,dir_y,residual,zone_label\n";
        char buf[200];
        for (const auto& [mac, track] : a.track) {
            const auto& zones = a.zones.at(mac);
            for (size_t i = 0; i < track.size(); ++i) {
                if (!track[i]) continue;
                const PositionEstimate& est = *track[i];
                double dx = est.direction ? est.direction->x() : 0.0;
                double dy = est.direction ? est.direction->y() : 0.0;
                std::snprintf(buf, sizeof(buf), "%s,%s,%.4f,%.4f,%.6f,%.6f,%.4f,%s\n",
                              mac.to_string().c_str(),
                              format_iso(a.start_ts_us +
                                         int64_t(i) * a.window_s * kMicrosPerSecond)
                                  .c_str(),
                              est.x, est.y, dx, dy, est.residual,
                              zones[i] ? zones[i]->c_str() : "-");
                track_csv << buf;
            }
        }
        atomic_write(out_dir / "track.csv", track_csv.str());

        summary << "\n## device states\n";
        for (const MacAddress& mac : a.devices) {
            const StateTimeline& tl = a.states.at(mac);
            size_t off = 0, idle = 0, active = 0;
            for (DeviceState s : tl.states) {
                off += s == DeviceState::Off;
                idle += s == DeviceState::Idle;
                active += s == DeviceState::Active;
            }
            summary << mac.to_string() << "\tth=" << a.thresholds.at(mac) << "\toff=" << off
                    << "\tidle=" << idle << "\tactive=" << active;
            auto kind = a.kinds.find(mac);
            if (kind != a.kinds.end()) summary << "\tkind=" << device_kind_name(kind->second);
            auto loco = a.stationarity.find(mac);
            if (loco != a.stationarity.end())
                summary << "\tstationary="
                        << (loco->second == Locomotion::Stationary ? "yes" : "no");
            summary << '\n';
        }
    }

    if (inputs.profiles) {
        summary << "\n## devices (mac / type / manufacturer / model / source)\n";
        for (const auto& [mac, p] : *inputs.profiles) {
            summary << mac.to_string() << '\t' << profile_type(p) << '\t'
                    << p.vendor.value_or(p.randomized_mac ? "randomized" : "Unknown") << '\t'
                    << p.ble_name.value_or("Unknown") << '\t' << profile_source(p) << '\n';
        }
    }

    if (inputs.probes && !inputs.probes->empty()) {
        summary << "\n## probed networks\n";
        for (const auto& [mac, entries] : *inputs.probes) {
            summary << mac.to_string() << '\t';
            for (size_t i = 0; i < entries.size(); ++i) {
                if (i) summary << ' ';
                summary << utf8_lossy(entries[i].ssid);
            }
            summary << '\n';
        }
    }

    if (inputs.events) {
        std::ostringstream events_csv;
        events_csv << events_csv_header() << '\n' << events_to_csv(*inputs.events);
        atomic_write(out_dir / "events.csv", events_csv.str());
        summary << "\n## activity timeline\n";
        for (const ActivityEvent& ev : *inputs.events)
            summary << format_iso(ev.start_us) << " .. " << format_iso(ev.end_us) << '\t'
                    << ev.label << '\n';
    }

    if (inputs.guests) {
        summary << "\n## guests\n";
        for (const GuestEvent& g : *inputs.guests) {
            summary << g.guest_mac.to_string() << "\tarrival=" << format_iso(g.arrival_us);
            if (g.departure_us) summary << "\tdeparture=" << format_iso(*g.departure_us);
            summary << "\tresembles="
                    << (g.resembles == GuestResemblance::Multimedia ? "multimedia" : "unknown")
                    << '\n';
        }
    }

    atomic_write(out_dir / "summary.txt", summary.str());
}

} // namespace homescope
