#include "homescope/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "homescope/frame_io.hpp"
#include "homescope/pcap.hpp"
#include "homescope/pipeline.hpp"
#include "homescope/scenario.hpp"

namespace homescope {

namespace fs = std::filesystem;
using sim::GroundTruth;
using sim::Scenario;
using sim::SimOutput;

std::string default_data_dir() {
    if (const char* env = std::getenv("HOMESCOPE_DATA")) return env;
#ifdef HOMESCOPE_DATA_DIR
    return HOMESCOPE_DATA_DIR;
#else
    return "data";
#endif
}

namespace {

std::vector<FrameRecord> load_frames_any(const std::vector<std::string>& inputs) {
    std::vector<FrameRecord> frames;
    for (const std::string& path : inputs) {
        std::ifstream probe(path, std::ios::binary);
        if (!probe) raise(ErrorCode::IoError, "cannot open " + path);
        char head[4] = {};
        probe.read(head, 4);
        probe.close();
        bool is_pcap = uint8_t(head[0]) == 0xa1 || uint8_t(head[0]) == 0xd4 ||
                       uint8_t(head[0]) == 0x4d;
        if (is_pcap) {
            std::string sniffer = fs::path(path).stem().string();
            PcapContents capture = read_pcap_file(path);
            if (capture.truncated)
                std::cerr << "warning: " << path << " ends mid-record; kept "
                          << capture.packets.size() << " packets\n";
            for (const PcapPacket& pkt : capture.packets) {
                auto rec = decode_frame(sniffer, pkt.ts_us, pkt.data);
                if (rec) frames.push_back(std::move(*rec));
            }
        } else {
            std::vector<FrameRecord> part = load_frame_records(path);
            frames.insert(frames.end(), part.begin(), part.end());
        }
    }
    std::stable_sort(frames.begin(), frames.end(), [](const FrameRecord& a, const FrameRecord& b) {
        if (a.ts_us() != b.ts_us()) return a.ts_us() < b.ts_us();
        return a.sniffer_id < b.sniffer_id;
    });
    return frames;
}

std::string frames_to_text(const std::vector<FrameRecord>& frames) {
    std::ostringstream out;
    write_frame_records(out, frames);
    return out.str();
}

fs::path resolve_scenario(const std::string& name) {
    if (fs::exists(name)) return name;
    fs::path bundled = fs::path(default_data_dir()) / "scenarios" / (name + ".json");
    if (fs::exists(bundled)) return bundled;
    raise(ErrorCode::ScenarioError, "no scenario file or bundled scenario named '" + name + "'");
}

DeviceCatalog catalog_from(const std::map<MacAddress, DeviceProfile>& profiles,
                           const Analysis& analysis) {
    DeviceCatalog catalog;
    for (const auto& [mac, p] : profiles) {
        CatalogEntry entry;
        entry.labels = p.labels;
        auto kind = analysis.kinds.find(mac);
        entry.kind = kind != analysis.kinds.end() ? kind->second : p.kind;
        catalog[mac] = entry;
    }
    for (const auto& [mac, kind] : analysis.kinds) {
        if (catalog.count(mac)) continue;
        CatalogEntry entry;
        entry.kind = kind;
        catalog[mac] = entry;
    }
    return catalog;
}

std::map<MacAddress, DeviceProfile> identify_profiles(const std::vector<FrameRecord>& frames,
                                                      const std::string& ble_path,
                                                      const std::string& oui_path,
                                                      const std::string& types_path,
                                                      const Analysis* analysis) {
    std::vector<BleAdvRecord> ble;
    if (!ble_path.empty()) ble = load_ble_records(ble_path);
    OuiDatabase oui;
    fs::path oui_file = oui_path.empty() ? fs::path(default_data_dir()) / "oui.txt" : fs::path(oui_path);
    if (fs::exists(oui_file)) oui = OuiDatabase::load(oui_file.string());
    auto profiles = build_profiles(frames, ble, oui);
    fs::path types_file =
        types_path.empty() ? fs::path(default_data_dir()) / "device_types.tsv" : fs::path(types_path);
    if (fs::exists(types_file)) apply_type_rules(profiles, load_type_rules(types_file.string()));
    if (analysis) {
        for (auto& [mac, p] : profiles) {
            auto kind = analysis->kinds.find(mac);
            if (kind != analysis->kinds.end()) p.kind = kind->second;
        }
    }
    return profiles;
}

std::string devices_table(const std::map<MacAddress, DeviceProfile>& profiles) {
    std::ostringstream out;
    out << "mac\ttype\tmanufacturer\tmodel\tsource\tkind\tble_services\n";
    for (const auto& [mac, p] : profiles) {
        std::string type = device_kind_name(p.kind);
        static const char* known[] = {"tv",     "laptop", "console", "phone",
                                      "sensor", "bulb",   "plug",    "router"};
        for (const char* label : known)
            if (p.has_label(label)) {
                type = label;
                break;
            }
        out << mac.to_string() << '\t' << type << '\t'
            << p.vendor.value_or(p.randomized_mac ? "randomized" : "Unknown") << '\t'
            << p.ble_name.value_or("Unknown") << '\t'
            << (p.has_label("router") ? "mac address & addressing"
                                      : (p.ble_name ? "ble" : "mac address"))
            << '\t' << device_kind_name(p.kind) << '\t';
        for (size_t i = 0; i < p.ble_services.size(); ++i) {
            if (i) out << ' ';
            char buf[8];
            std::snprintf(buf, sizeof(buf), "%04x", p.ble_services[i]);
            out << buf;
        }
        out << '\n';
    }
    return out.str();
}

std::string probes_table(const ProbeInventory& probes) {
    std::ostringstream out;
    out << "mac\tssid\tcount\tfirst_seen\tlast_seen\n";
    for (const auto& [mac, entries] : probes)
        for (const ProbeEntry& e : entries)
            out << mac.to_string() << '\t' << utf8_lossy(e.ssid) << '\t' << e.count << '\t'
                << format_iso(e.first_seen_us) << '\t' << format_iso(e.last_seen_us) << '\n';
    return out.str();
}

int cmd_simulate(const std::string& scenario_name, const std::string& out_dir,
                 std::optional<uint64_t> seed, bool write_pcap) {
    Scenario scenario = sim::load_scenario(resolve_scenario(scenario_name).string());
    if (seed) scenario.seed = *seed;
    SimOutput output = sim::simulate(scenario);

    fs::create_directories(out_dir);
    atomic_write(fs::path(out_dir) / "frames.jsonl", frames_to_text(output.frames));
    std::ostringstream ble;
    for (const BleAdvRecord& r : output.ble) ble << ble_record_to_line(r) << '\n';
    atomic_write(fs::path(out_dir) / "ble.jsonl", ble.str());
    sim::save_truth((fs::path(out_dir) / "truth.tsv").string(), output.truth);
    scenario.layout.save((fs::path(out_dir) / "layout.tsv").string());

    if (write_pcap) {
        for (const Sniffer& sniffer : scenario.layout.sniffers) {
            PcapWriter writer;
            for (const FrameRecord& f : output.frames)
                if (f.sniffer_id == sniffer.id) writer.add(f.ts_us(), encode_frame(f));
            writer.save((fs::path(out_dir) / (sniffer.id + ".pcap")).string());
        }
    }
    std::cout << "simulated " << scenario.name << ": " << output.frames.size() << " frames, "
              << output.ble.size() << " ble records, " << output.truth.n_windows << " windows\n";
    return 0;
}

int cmd_score(const std::string& frames_path, const std::string& ble_path,
              const std::string& truth_path, const std::string& layout_path,
              const std::string& rules_path, const std::string& out_path) {
    std::vector<FrameRecord> frames = load_frames_any({frames_path});
    GroundTruth truth = sim::load_truth(truth_path);
    SnifferLayout layout = SnifferLayout::load(layout_path);

    AnalysisConfig config;
    config.window_s = truth.window_s;
    config.start_ts_us = truth.start_ts_us;
    config.end_ts_us = truth.start_ts_us +
                       int64_t(truth.n_windows) * truth.window_s * kMicrosPerSecond;

    // Offline phase: reference points from truth-labeled fingerprints of the
    // mobile device(s), excluded zones left out.
    Analysis pre = analyze(frames, &layout, nullptr, config);
    std::vector<std::pair<std::string, std::vector<RssiFingerprint>>> labeled;
    for (const auto& [mac, is_mobile] : truth.mobile) {
        if (!is_mobile) continue;
        auto fps = pre.fingerprints.find(mac);
        auto zones = truth.zone.find(mac);
        if (fps == pre.fingerprints.end() || zones == truth.zone.end()) continue;
        auto grid = fingerprint_grid({{mac, fps->second}}, truth.start_ts_us, truth.n_windows,
                                     truth.window_s);
        std::map<std::string, std::vector<RssiFingerprint>> by_zone;
        const auto& cells = grid.at(mac);
        for (size_t i = 0; i < truth.n_windows; ++i) {
            if (!cells[i] || !zones->second[i]) continue;
            if (truth.excluded_zones.count(*zones->second[i])) continue;
            by_zone[*zones->second[i]].push_back(*cells[i]);
        }
        for (auto& [label, fps_in_zone] : by_zone) labeled.emplace_back(label, std::move(fps_in_zone));
    }
    ZoneModel zones;
    if (!labeled.empty()) zones = learn_reference_points(labeled);

    Analysis analysis = analyze(frames, &layout, zones.references.empty() ? nullptr : &zones, config);
    auto profiles = identify_profiles(frames_path.empty() ? frames : frames, ble_path, "", "",
                                      &analysis);

    std::vector<ActivityEvent> events;
    if (!rules_path.empty() || fs::exists(fs::path(default_data_dir()) / "rules" / "default.rules")) {
        fs::path rules_file = rules_path.empty()
                                  ? fs::path(default_data_dir()) / "rules" / "default.rules"
                                  : fs::path(rules_path);
        std::vector<ActivityRule> rules = load_rules(rules_file.string());
        std::vector<StateTimeline> timelines;
        for (const auto& [mac, tl] : analysis.states) timelines.push_back(tl);
        std::vector<ZoneTrack> tracks;
        for (const auto& [mac, z] : analysis.zones) tracks.push_back(zone_track_of(analysis, mac));
        events = evaluate_rules(rules, timelines, tracks, catalog_from(profiles, analysis));
    }

    // Guests: baseline = profiles of devices seen in the first eighth of the
    // capture, observation starts afterwards.
    int64_t baseline_end = analysis.start_ts_us +
                           (analysis.end_ts_us - analysis.start_ts_us) / 8;
    std::vector<FrameRecord> baseline_frames;
    for (const FrameRecord& f : frames)
        if (f.ts_us() < baseline_end) baseline_frames.push_back(f);
    auto baseline = build_profiles(baseline_frames, {}, OuiDatabase{});
    std::vector<GuestEvent> guests = detect_guests(frames, baseline, baseline_end);

    sim::PipelinePredictions predictions;
    predictions.states = analysis.states;
    predictions.zones = analysis.zones;
    predictions.stationarity = analysis.stationarity;
    predictions.kinds = analysis.kinds;
    for (const auto& [mac, track] : analysis.track) {
        auto& positions = predictions.positions[mac];
        positions.resize(track.size());
        for (size_t i = 0; i < track.size(); ++i)
            if (track[i]) positions[i] = track[i]->position();
    }
    predictions.events = events;
    predictions.guests = guests;

    sim::ScoreReport report = sim::score_against_truth(truth, predictions);
    atomic_write(out_path, report.to_text());
    std::cout << report.to_text();
    return 0;
}

} // namespace

int run_subcommand(const std::vector<std::string>& argv) {
    CLI::App app{"passive smart-home traffic inference toolkit"};
    app.require_subcommand(1);

    // ingest
    auto* ingest = app.add_subcommand("ingest", "decode captures into the interchange format");
    std::vector<std::string> in_inputs;
    std::string in_bssid, in_out;
    bool in_no_probes = false;
    ingest->add_option("--input", in_inputs, "pcap or jsonl inputs")->required()->expected(-1);
    ingest->add_option("--bssid", in_bssid, "keep only this network");
    ingest->add_option("--out", in_out, "output frames.jsonl")->required();
    ingest->add_flag("--no-probes", in_no_probes, "drop probe requests when filtering");

    // identify
    auto* identify = app.add_subcommand("identify", "device profiles and probe inventory");
    std::string id_input, id_ble, id_oui, id_types, id_out;
    identify->add_option("--input", id_input, "frames.jsonl")->required();
    identify->add_option("--ble", id_ble, "ble.jsonl");
    identify->add_option("--oui", id_oui, "IEEE oui.txt registry");
    identify->add_option("--types", id_types, "type rules tsv");
    identify->add_option("--out", id_out, "output directory")->required();

    // states
    auto* states = app.add_subcommand("states", "windowed traffic and off/idle/active states");
    std::string st_input, st_out, st_format = "csv";
    int st_window = 10;
    states->add_option("--input", st_input, "frames.jsonl")->required();
    states->add_option("--window", st_window, "window seconds");
    states->add_option("--out", st_out, "output csv")->required();
    states->add_option("--format", st_format, "csv or lines")
        ->check(CLI::IsMember({"csv", "lines"}));

    // localize
    auto* localize = app.add_subcommand("localize", "fingerprints, positions, zones");
    std::string lo_input, lo_layout, lo_zones, lo_out, lo_train_truth, lo_zones_out;
    double lo_n = 4.0, lo_p0 = -40.0;
    int lo_window = 10;
    localize->add_option("--input", lo_input, "frames.jsonl")->required();
    localize->add_option("--layout", lo_layout, "sniffer layout tsv")->required();
    localize->add_option("--zones", lo_zones, "zone model file");
    localize->add_option("--pathloss-n", lo_n, "path loss exponent");
    localize->add_option("--pathloss-p0", lo_p0, "reference power dBm at 1 m");
    localize->add_option("--window", lo_window, "window seconds");
    localize->add_option("--out", lo_out, "track csv")->required();
    localize->add_option("--train-truth", lo_train_truth, "learn zone references from this truth file");
    localize->add_option("--zones-out", lo_zones_out, "write the learned zone model here");

    // schedule
    auto* schedule = app.add_subcommand("schedule", "presence intervals and weekly routine");
    std::string sc_input, sc_out, sc_device;
    int sc_window = 10, sc_gap = 600;
    schedule->add_option("--input", sc_input, "frames.jsonl")->required();
    schedule->add_option("--device", sc_device, "device mac (default: all)");
    schedule->add_option("--window", sc_window, "window seconds");
    schedule->add_option("--gap", sc_gap, "presence merge gap seconds");
    schedule->add_option("--out", sc_out, "schedule report")->required();

    // har
    auto* har = app.add_subcommand("har", "activity events, guests, sleep/wake");
    std::string ha_input, ha_rules, ha_layout, ha_zones, ha_out;
    double ha_baseline_hours = 3.0;
    har->add_option("--input", ha_input, "frames.jsonl")->required();
    har->add_option("--rules", ha_rules, "rule file");
    har->add_option("--layout", ha_layout, "sniffer layout tsv");
    har->add_option("--zones", ha_zones, "zone model file");
    har->add_option("--baseline-hours", ha_baseline_hours, "guest baseline period");
    har->add_option("--out", ha_out, "output directory")->required();

    // simulate
    auto* simulate = app.add_subcommand("simulate", "generate a labeled synthetic capture");
    std::string si_scenario, si_out;
    std::optional<uint64_t> si_seed;
    bool si_pcap = false;
    simulate->add_option("--scenario", si_scenario, "bundled name or scenario file")->required();
    simulate->add_option("--seed", si_seed, "override the scenario seed");
    simulate->add_option("--out", si_out, "output directory")->required();
    simulate->add_flag("--pcap", si_pcap, "also write per-sniffer pcap files");

    // score
    auto* score = app.add_subcommand("score", "run the pipeline and score against truth");
    std::string sco_frames, sco_ble, sco_truth, sco_layout, sco_rules, sco_out;
    score->add_option("--input", sco_frames, "frames.jsonl")->required();
    score->add_option("--ble", sco_ble, "ble.jsonl");
    score->add_option("--truth", sco_truth, "truth.tsv")->required();
    score->add_option("--layout", sco_layout, "layout.tsv")->required();
    score->add_option("--rules", sco_rules, "rule file");
    score->add_option("--out", sco_out, "metrics file")->required();

    // report
    auto* report = app.add_subcommand("report", "full analysis report bundle");
    std::string re_input, re_ble, re_layout, re_zones, re_rules, re_out;
    report->add_option("--input", re_input, "frames.jsonl")->required();
    report->add_option("--ble", re_ble, "ble.jsonl");
    report->add_option("--layout", re_layout, "layout.tsv");
    report->add_option("--zones", re_zones, "zone model file");
    report->add_option("--rules", re_rules, "rule file");
    report->add_option("--out", re_out, "report directory")->required();

    std::vector<const char*> cargs;
    cargs.push_back("homescope");
    for (const std::string& a : argv) cargs.push_back(a.c_str());

    try {
        app.parse(int(cargs.size()), cargs.data());
    } catch (const CLI::ParseError& e) {
        std::ostringstream help;
        if (e.get_exit_code() == 0) {
            std::cout << app.help();
            return 0;
        }
        std::cerr << e.what() << '\n' << app.help();
        return 1;
    }

    try {
        if (*ingest) {
            std::vector<FrameRecord> frames = load_frames_any(in_inputs);
            if (!in_bssid.empty()) {
                auto bssid = MacAddress::parse(in_bssid);
                if (!bssid) raise(ErrorCode::ParseError, "bad --bssid");
                frames = filter_network(frames, *bssid, !in_no_probes);
            }
            atomic_write(in_out, frames_to_text(frames));
            std::cout << "wrote " << frames.size() << " records\n";
        } else if (*identify) {
            std::vector<FrameRecord> frames = load_frames_any({id_input});
            Analysis analysis = analyze(frames, nullptr, nullptr, {});
            auto profiles = identify_profiles(frames, id_ble, id_oui, id_types, &analysis);
            fs::create_directories(id_out);
            atomic_write(fs::path(id_out) / "devices.tsv", devices_table(profiles));
            atomic_write(fs::path(id_out) / "probes.tsv", probes_table(probe_inventory(frames)));
        } else if (*states) {
            std::vector<FrameRecord> frames = load_frames_any({st_input});
            AnalysisConfig config;
            config.window_s = st_window;
            Analysis analysis = analyze(frames, nullptr, nullptr, config);
            std::ostringstream out;
            if (st_format == "csv") {
                out << series_csv_header() << '\n';
                for (const MacAddress& mac : analysis.devices)
                    out << series_to_csv(analysis.series.at(mac), analysis.states.at(mac));
            } else {
                for (const MacAddress& mac : analysis.devices) {
                    const TrafficSeries& s = analysis.series.at(mac);
                    const StateTimeline& tl = analysis.states.at(mac);
                    for (size_t i = 0; i < s.windows.size(); ++i) {
                        out << "{\"device\":\"" << mac.to_string() << "\",\"ts_us\":"
                            << s.window_start_us(i) << ",\"up\":" << s.windows[i].up_pkts
                            << ",\"down\":" << s.windows[i].down_pkts << ",\"state\":\""
                            << device_state_name(tl.states[i]) << "\"}\n";
                    }
                }
            }
            atomic_write(st_out, out.str());
        } else if (*localize) {
            std::vector<FrameRecord> frames = load_frames_any({lo_input});
            SnifferLayout layout = SnifferLayout::load(lo_layout);
            AnalysisConfig config;
            config.window_s = lo_window;
            config.pathloss = {lo_p0, lo_n};

            ZoneModel zone_model;
            bool have_zones = false;
            if (!lo_train_truth.empty()) {
                GroundTruth truth = sim::load_truth(lo_train_truth);
                config.window_s = truth.window_s;
                config.start_ts_us = truth.start_ts_us;
                Analysis pre = analyze(frames, &layout, nullptr, config);
                std::vector<std::pair<std::string, std::vector<RssiFingerprint>>> labeled;
                for (const auto& [mac, is_mobile] : truth.mobile) {
                    if (!is_mobile) continue;
                    auto fps = pre.fingerprints.find(mac);
                    auto zones_it = truth.zone.find(mac);
                    if (fps == pre.fingerprints.end() || zones_it == truth.zone.end()) continue;
                    auto grid = fingerprint_grid({{mac, fps->second}}, truth.start_ts_us,
                                                 truth.n_windows, truth.window_s);
                    std::map<std::string, std::vector<RssiFingerprint>> by_zone;
                    const auto& cells = grid.at(mac);
                    for (size_t i = 0; i < truth.n_windows && i < zones_it->second.size(); ++i) {
                        if (!cells[i] || !zones_it->second[i]) continue;
                        if (truth.excluded_zones.count(*zones_it->second[i])) continue;
                        by_zone[*zones_it->second[i]].push_back(*cells[i]);
                    }
                    for (auto& [label, fps_in_zone] : by_zone)
                        labeled.emplace_back(label, std::move(fps_in_zone));
                }
                zone_model = learn_reference_points(labeled);
                have_zones = true;
                if (!lo_zones_out.empty()) zone_model.save(lo_zones_out);
            } else if (!lo_zones.empty()) {
                zone_model = ZoneModel::load(lo_zones, layout.size());
                have_zones = true;
            }

            Analysis analysis = analyze(frames, &layout, have_zones ? &zone_model : nullptr, config);
            std::ostringstream out;
            out << "device,window_start_iso,x,y,dir_x,dir_y,residual,zone_label\n";
            char buf[200];
            for (const auto& [mac, track] : analysis.track) {
                const auto& zones = analysis.zones.at(mac);
                for (size_t i = 0; i < track.size(); ++i) {
                    if (!track[i]) continue;
                    const PositionEstimate& est = *track[i];
                    std::snprintf(
                        buf, sizeof(buf), "%s,%s,%.4f,%.4f,%.6f,%.6f,%.4f,%s\n",
                        mac.to_string().c_str(),
                        format_iso(analysis.start_ts_us +
                                   int64_t(i) * analysis.window_s * kMicrosPerSecond)
                            .c_str(),
                        est.x, est.y, est.direction ? est.direction->x() : 0.0,
                        est.direction ? est.direction->y() : 0.0, est.residual,
                        zones[i] ? zones[i]->c_str() : "-");
                    out << buf;
                }
            }
            atomic_write(lo_out, out.str());
        } else if (*schedule) {
            std::vector<FrameRecord> frames = load_frames_any({sc_input});
            AnalysisConfig config;
            config.window_s = sc_window;
            Analysis analysis = analyze(frames, nullptr, nullptr, config);
            std::ostringstream out;
            for (const MacAddress& mac : analysis.devices) {
                if (!sc_device.empty() && mac.to_string() != sc_device) continue;
                const TrafficSeries& series = analysis.series.at(mac);
                out << "device\t" << mac.to_string() << '\n';
                PresenceIntervals all = presence_intervals(series, sc_gap);
                for (const auto& [a, b] : all.intervals)
                    out << "presence\t" << format_iso(a) << '\t' << format_iso(b) << '\n';

                // Fold per-day intervals into the weekly routine when the
                // series spans enough days.
                std::vector<PresenceIntervals> days;
                int64_t day_us = kSecondsPerDay * kMicrosPerSecond;
                int64_t first_day = day_index(series.start_ts_us);
                int64_t last_day = day_index(series.end_ts_us() - 1);
                for (int64_t d = first_day; d <= last_day; ++d) {
                    PresenceIntervals day;
                    day.device = mac;
                    day.gap_us = all.gap_us;
                    for (const auto& [a, b] : all.intervals) {
                        int64_t lo = std::max(a, d * day_us);
                        int64_t hi = std::min(b, (d + 1) * day_us);
                        if (hi > lo) day.intervals.emplace_back(lo, hi);
                    }
                    days.push_back(std::move(day));
                }
                try {
                    WeeklyRoutine routine = weekly_routine(days, mac);
                    for (const RecurringAbsence& ab : routine.absences)
                        out << "routine_absence\tweekday=" << ab.weekday << "\thours=" << ab.start_hour
                            << ".." << ab.end_hour << "\tsupport=" << ab.day_support << '\n';
                    if (routine.wake_hour) out << "wake_hour\t" << *routine.wake_hour << '\n';
                } catch (const Error& e) {
                    if (e.code() != ErrorCode::InsufficientData) throw;
                    out << "routine\tinsufficient days\n";
                }
            }
            atomic_write(sc_out, out.str());
        } else if (*har) {
            std::vector<FrameRecord> frames = load_frames_any({ha_input});
            AnalysisConfig config;
            SnifferLayout layout;
            ZoneModel zone_model;
            bool have_layout = !ha_layout.empty();
            bool have_zones = false;
            if (have_layout) layout = SnifferLayout::load(ha_layout);
            if (!ha_zones.empty() && have_layout) {
                zone_model = ZoneModel::load(ha_zones, layout.size());
                have_zones = true;
            }
            Analysis analysis = analyze(frames, have_layout ? &layout : nullptr,
                                        have_zones ? &zone_model : nullptr, config);
            auto profiles = identify_profiles(frames, "", "", "", &analysis);
            fs::path rules_file = ha_rules.empty()
                                      ? fs::path(default_data_dir()) / "rules" / "default.rules"
                                      : fs::path(ha_rules);
            std::vector<ActivityRule> rules = load_rules(rules_file.string());
            std::vector<StateTimeline> timelines;
            for (const auto& [mac, tl] : analysis.states) timelines.push_back(tl);
            std::vector<ZoneTrack> tracks;
            for (const auto& [mac, z] : analysis.zones) tracks.push_back(zone_track_of(analysis, mac));
            std::vector<ActivityEvent> events =
                evaluate_rules(rules, timelines, tracks, catalog_from(profiles, analysis));

            int64_t baseline_end =
                analysis.start_ts_us + int64_t(ha_baseline_hours * 3600.0 * 1e6);
            std::vector<FrameRecord> baseline_frames;
            for (const FrameRecord& f : frames)
                if (f.ts_us() < baseline_end) baseline_frames.push_back(f);
            auto baseline = build_profiles(baseline_frames, {}, OuiDatabase{});
            std::vector<GuestEvent> guests = detect_guests(frames, baseline, baseline_end);

            fs::create_directories(ha_out);
            std::ostringstream events_csv;
            events_csv << events_csv_header() << '\n' << events_to_csv(events);
            atomic_write(fs::path(ha_out) / "events.csv", events_csv.str());
            std::ostringstream guests_csv;
            guests_csv << "mac,arrival_iso,departure_iso,resembles\n";
            for (const GuestEvent& g : guests) {
                guests_csv << g.guest_mac.to_string() << ',' << format_iso(g.arrival_us) << ','
                           << (g.departure_us ? format_iso(*g.departure_us) : "-") << ','
                           << (g.resembles == GuestResemblance::Multimedia ? "multimedia"
                                                                           : "unknown")
                           << '\n';
            }
            atomic_write(fs::path(ha_out) / "guests.csv", guests_csv.str());
        } else if (*simulate) {
            return cmd_simulate(si_scenario, si_out, si_seed, si_pcap);
        } else if (*score) {
            return cmd_score(sco_frames, sco_ble, sco_truth, sco_layout, sco_rules, sco_out);
        } else if (*report) {
            std::vector<FrameRecord> frames = load_frames_any({re_input});
            SnifferLayout layout;
            ZoneModel zone_model;
            bool have_layout = !re_layout.empty();
            bool have_zones = false;
            if (have_layout) layout = SnifferLayout::load(re_layout);
            if (!re_zones.empty() && have_layout) {
                zone_model = ZoneModel::load(re_zones, layout.size());
                have_zones = true;
            }
            Analysis analysis = analyze(frames, have_layout ? &layout : nullptr,
                                        have_zones ? &zone_model : nullptr, {});
            auto profiles = identify_profiles(frames, re_ble, "", "", &analysis);
            ProbeInventory probes = probe_inventory(frames);

            std::vector<ActivityEvent> events;
            std::vector<GuestEvent> guests;
            fs::path rules_file = re_rules.empty()
                                      ? fs::path(default_data_dir()) / "rules" / "default.rules"
                                      : fs::path(re_rules);
            if (fs::exists(rules_file)) {
                std::vector<ActivityRule> rules = load_rules(rules_file.string());
                std::vector<StateTimeline> timelines;
                for (const auto& [mac, tl] : analysis.states) timelines.push_back(tl);
                std::vector<ZoneTrack> tracks;
                for (const auto& [mac, z] : analysis.zones)
                    tracks.push_back(zone_track_of(analysis, mac));
                events = evaluate_rules(rules, timelines, tracks, catalog_from(profiles, analysis));
            }

            ReportInputs inputs;
            inputs.analysis = &analysis;
            inputs.profiles = &profiles;
            inputs.probes = &probes;
            inputs.events = &events;
            inputs.guests = &guests;
            emit_report(inputs, re_out);
        }
        return 0;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 2;
    }
}

} // namespace homescope
