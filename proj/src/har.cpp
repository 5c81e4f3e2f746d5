#include "homescope/har.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "homescope/time_util.hpp"

namespace homescope {

namespace {

[[noreturn]] void rule_error(size_t line_no, const std::string& what) {
    raise(ErrorCode::RuleError, "line " + std::to_string(line_no) + ": " + what);
}

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream in(line);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

std::optional<DeviceState> state_from_name(const std::string& s) {
    if (s == "off") return DeviceState::Off;
    if (s == "idle") return DeviceState::Idle;
    if (s == "active") return DeviceState::Active;
    return std::nullopt;
}

} // namespace

std::vector<ActivityRule> compile_rules(const std::string& text) {
    std::vector<ActivityRule> rules;
    std::optional<ActivityRule> current;
    std::istringstream in(text);
    std::string line;
    size_t line_no = 0;

    auto finish = [&](size_t at) {
        if (!current) return;
        if (current->conditions.empty()) rule_error(at, "rule '" + current->name + "' has no conditions");
        if (current->emit_label.empty()) current->emit_label = current->name;
        if (current->min_duration_s <= 0) rule_error(at, "rule '" + current->name + "' needs min_duration_s");
        rules.push_back(std::move(*current));
        current.reset();
    };

    while (std::getline(in, line)) {
        ++line_no;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::vector<std::string> tok = split_ws(line);
        if (tok.empty()) continue;
        const std::string& key = tok[0];

        if (key == "rule") {
            finish(line_no);
            if (tok.size() != 2) rule_error(line_no, "expected: rule <name>");
            current = ActivityRule{};
            current->name = tok[1];
            continue;
        }
        if (!current) rule_error(line_no, "'" + key + "' outside a rule block");

        if (key == "priority") {
            if (tok.size() != 2) rule_error(line_no, "expected: priority <int>");
            try {
                current->priority = std::stoi(tok[1]);
            } catch (...) {
                rule_error(line_no, "bad priority");
            }
        } else if (key == "min_duration_s") {
            if (tok.size() != 2) rule_error(line_no, "expected: min_duration_s <int>");
            try {
                current->min_duration_s = std::stoi(tok[1]);
            } catch (...) {
                rule_error(line_no, "bad min_duration_s");
            }
            if (current->min_duration_s <= 0) rule_error(line_no, "min_duration_s must be positive");
        } else if (key == "emit") {
            if (tok.size() != 2) rule_error(line_no, "expected: emit <label>");
            current->emit_label = tok[1];
        } else if (key == "state" || key == "zone") {
            if (tok.size() != 4) rule_error(line_no, "expected: " + key + " <selector> <value> <fraction>");
            RuleCondition c;
            c.kind = key == "state" ? RuleCondition::Kind::State : RuleCondition::Kind::Zone;
            c.selector = tok[1];
            if (c.kind == RuleCondition::Kind::State) {
                auto s = state_from_name(tok[2]);
                if (!s) rule_error(line_no, "unknown state '" + tok[2] + "'");
                c.state = *s;
            } else {
                c.zone_label = tok[2];
            }
            try {
                c.min_fraction = std::stod(tok[3]);
            } catch (...) {
                rule_error(line_no, "bad fraction");
            }
            if (!(c.min_fraction > 0.0 && c.min_fraction <= 1.0))
                rule_error(line_no, "fraction must be in (0, 1]");
            current->conditions.push_back(std::move(c));
        } else if (key == "time") {
            if (tok.size() != 2) rule_error(line_no, "expected: time <HH:MM>-<HH:MM>");
            size_t dash = tok[1].find('-');
            if (dash == std::string::npos) rule_error(line_no, "expected: time <HH:MM>-<HH:MM>");
            auto a = parse_time_of_day(tok[1].substr(0, dash));
            auto b = parse_time_of_day(tok[1].substr(dash + 1));
            if (!a || !b) rule_error(line_no, "bad time of day");
            RuleCondition c;
            c.kind = RuleCondition::Kind::Time;
            c.tod_start_s = *a;
            c.tod_end_s = *b;
            current->conditions.push_back(std::move(c));
        } else {
            rule_error(line_no, "unknown predicate '" + key + "'");
        }
    }
    finish(line_no);
    std::stable_sort(rules.begin(), rules.end(),
                     [](const ActivityRule& a, const ActivityRule& b) { return a.priority > b.priority; });
    return rules;
}

std::vector<ActivityRule> load_rules(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorCode::IoError, "cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return compile_rules(ss.str());
}

namespace {

bool selector_matches(const std::string& selector, const MacAddress& mac, const CatalogEntry& entry) {
    if (auto as_mac = MacAddress::parse(selector)) return *as_mac == mac;
    if (selector == "smart") return entry.kind == DeviceKind::Smart;
    if (selector == "manual" || selector == "manually-controlled")
        return entry.kind == DeviceKind::ManuallyControlled;
    if (selector == "unknown") return entry.kind == DeviceKind::Unknown;
    return std::find(entry.labels.begin(), entry.labels.end(), selector) != entry.labels.end();
}

bool tod_in_range(int sod, int start, int end) {
    if (start <= end) return sod >= start && sod < end;
    return sod >= start || sod < end; // wraps midnight
}

struct Firing {
    size_t begin = 0, end = 0; // window span
    double confidence = 0;
    std::vector<ActivityEvidence> evidence;
};

} // namespace

std::vector<ActivityEvent> evaluate_rules(const std::vector<ActivityRule>& rules,
                                          const std::vector<StateTimeline>& timelines,
                                          const std::vector<ZoneTrack>& tracks,
                                          const DeviceCatalog& catalog) {
    if (timelines.empty() && tracks.empty()) return {};
    int window_s = !timelines.empty() ? timelines.front().window_s : tracks.front().window_s;
    int64_t start_us = !timelines.empty() ? timelines.front().start_ts_us : tracks.front().start_ts_us;
    size_t n = 0;
    for (const StateTimeline& t : timelines) {
        if (t.window_s != window_s || t.start_ts_us != start_us)
            raise(ErrorCode::GridMismatch, "state timeline off the shared grid");
        n = std::max(n, t.states.size());
    }
    for (const ZoneTrack& t : tracks) {
        if (t.window_s != window_s || t.start_ts_us != start_us)
            raise(ErrorCode::GridMismatch, "zone track off the shared grid");
        n = std::max(n, t.zones.size());
    }
    if (n == 0) return {};
    int64_t window_us = int64_t(window_s) * kMicrosPerSecond;

    // Priority order is re-established here so the caller's list order never
    // shows through.
    std::vector<const ActivityRule*> ordered;
    for (const ActivityRule& r : rules) ordered.push_back(&r);
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const ActivityRule* a, const ActivityRule* b) {
                         if (a->priority != b->priority) return a->priority > b->priority;
                         return a->name < b->name;
                     });

    std::vector<ActivityEvent> events;
    for (const ActivityRule* rule : ordered) {
        size_t span = size_t(std::max<int64_t>(1, rule->min_duration_s / window_s));
        if (span > n) continue;

        // Per condition, per matching device: prefix counts of hit windows.
        struct CandidateSet {
            const RuleCondition* cond;
            std::vector<std::pair<MacAddress, std::vector<uint32_t>>> prefix;
        };
        std::vector<CandidateSet> sets;
        bool impossible = false;
        for (const RuleCondition& cond : rule->conditions) {
            if (cond.kind == RuleCondition::Kind::Time) {
                sets.push_back({&cond, {}});
                continue;
            }
            CandidateSet cs{&cond, {}};
            if (cond.kind == RuleCondition::Kind::State) {
                for (const StateTimeline& tl : timelines) {
                    auto cat = catalog.find(tl.device);
                    if (!selector_matches(cond.selector, tl.device, cat == catalog.end() ? CatalogEntry{} : cat->second))
                        continue;
                    std::vector<uint32_t> pre(n + 1, 0);
                    for (size_t i = 0; i < n; ++i)
                        pre[i + 1] = pre[i] + (i < tl.states.size() && tl.states[i] == cond.state ? 1 : 0);
                    cs.prefix.emplace_back(tl.device, std::move(pre));
                }
            } else {
                for (const ZoneTrack& tr : tracks) {
                    auto cat = catalog.find(tr.device);
                    if (!selector_matches(cond.selector, tr.device, cat == catalog.end() ? CatalogEntry{} : cat->second))
                        continue;
                    std::vector<uint32_t> pre(n + 1, 0);
                    for (size_t i = 0; i < n; ++i)
                        pre[i + 1] = pre[i] + (i < tr.zones.size() && tr.zones[i] &&
                                                       *tr.zones[i] == cond.zone_label
                                                   ? 1
                                                   : 0);
                    cs.prefix.emplace_back(tr.device, std::move(pre));
                }
            }
            if (cs.prefix.empty()) impossible = true;
            sets.push_back(std::move(cs));
        }
        if (impossible) continue;

        std::vector<Firing> merged;
        for (size_t t = 0; t + span <= n; ++t) {
            double confidence = 1.0;
            std::vector<ActivityEvidence> evidence;
            bool ok = true;
            for (const CandidateSet& cs : sets) {
                const RuleCondition& cond = *cs.cond;
                if (cond.kind == RuleCondition::Kind::Time) {
                    bool all_in = true;
                    for (size_t i = t; i < t + span && all_in; ++i) {
                        int sod = second_of_day(start_us + int64_t(i) * window_us);
                        all_in = tod_in_range(sod, cond.tod_start_s, cond.tod_end_s);
                    }
                    if (!all_in) {
                        ok = false;
                        break;
                    }
                    continue;
                }
                double best = -1;
                const MacAddress* best_mac = nullptr;
                for (const auto& [mac, pre] : cs.prefix) {
                    double frac = double(pre[t + span] - pre[t]) / double(span);
                    if (frac > best) {
                        best = frac;
                        best_mac = &mac;
                    }
                }
                if (best < cond.min_fraction) {
                    ok = false;
                    break;
                }
                confidence = std::min(confidence, best);
                std::ostringstream desc;
                if (cond.kind == RuleCondition::Kind::State)
                    desc << "state=" << device_state_name(cond.state);
                else
                    desc << "zone=" << cond.zone_label;
                evidence.push_back({*best_mac, desc.str()});
            }
            if (!ok) continue;
            if (!merged.empty() && t <= merged.back().end) {
                Firing& f = merged.back();
                f.end = t + span;
                if (confidence > f.confidence) {
                    f.confidence = confidence;
                    f.evidence = std::move(evidence);
                }
            } else {
                merged.push_back({t, t + span, confidence, std::move(evidence)});
            }
        }
        for (const Firing& f : merged) {
            ActivityEvent ev;
            ev.label = rule->emit_label;
            ev.start_us = start_us + int64_t(f.begin) * window_us;
            ev.end_us = start_us + int64_t(f.end) * window_us;
            ev.confidence = f.confidence;
            ev.evidence = f.evidence;
            events.push_back(std::move(ev));
        }
    }
    return events;
}

std::vector<GuestEvent> detect_guests(const std::vector<FrameRecord>& frames,
                                      const std::map<MacAddress, DeviceProfile>& baseline,
                                      int64_t observation_start_us, const GuestConfig& config) {
    int64_t capture_end = observation_start_us;
    std::set<MacAddress> bssids;
    for (const FrameRecord& f : frames) {
        capture_end = std::max(capture_end, f.ts_us());
        if (f.fc.ftype == FrameType::Data && f.addrs.bssid) bssids.insert(*f.addrs.bssid);
    }

    std::map<MacAddress, std::vector<int64_t>> sightings;
    for (const FrameRecord& f : frames) {
        if (f.ts_us() < observation_start_us) continue;
        for (const MacAddress& m : {f.addrs.sa, f.addrs.ta}) {
            if (m.is_broadcast() || baseline.count(m) || bssids.count(m)) continue;
            sightings[m].push_back(f.ts_us());
        }
    }

    std::vector<GuestEvent> out;
    for (auto& [mac, times] : sightings) {
        std::sort(times.begin(), times.end());
        GuestEvent ev;
        ev.guest_mac = mac;
        ev.arrival_us = times.front();
        if (capture_end - times.back() >= config.departure_silence_us) ev.departure_us = times.back();

        // Burstiness of the nonzero windows separates human-driven devices
        // from constant-rate ones.
        int64_t window_us = int64_t(config.window_s) * kMicrosPerSecond;
        std::map<int64_t, uint32_t> win;
        for (int64_t t : times) ++win[t / window_us];
        double mean = 0;
        for (const auto& [w, c] : win) mean += c;
        mean /= double(win.size());
        double var = 0;
        for (const auto& [w, c] : win) var += (c - mean) * (c - mean);
        var /= double(win.size());
        double cv = mean > 0 ? std::sqrt(var) / mean : 0;
        ev.resembles = cv >= 0.5 ? GuestResemblance::Multimedia : GuestResemblance::Unknown;
        out.push_back(ev);
    }
    std::sort(out.begin(), out.end(),
              [](const GuestEvent& a, const GuestEvent& b) { return a.arrival_us < b.arrival_us; });
    return out;
}

std::optional<SleepWake> detect_sleep_wake(const std::vector<TrafficSeries>& manual_series,
                                           int64_t day_start_us) {
    constexpr int kRunWindows = 3;
    int64_t pivot_start = day_start_us + 3 * kSecondsPerHour * kMicrosPerSecond;
    int64_t pivot_end = pivot_start + kSecondsPerDay * kMicrosPerSecond;

    std::optional<int64_t> wake, sleep;
    for (const TrafficSeries& series : manual_series) {
        size_t n = series.windows.size();
        size_t i = 0;
        while (i < n) {
            if (series.windows[i].total_pkts() == 0) {
                ++i;
                continue;
            }
            size_t j = i;
            while (j < n && series.windows[j].total_pkts() > 0) ++j;
            int64_t run_start = series.window_start_us(i);
            int64_t run_end = series.window_start_us(j);
            bool preceded_by_silence = i > 0 && series.windows[i - 1].total_pkts() == 0;
            bool followed_by_silence = j == n || series.windows[j].total_pkts() == 0;
            if (j - i >= kRunWindows) {
                if (preceded_by_silence && run_start >= pivot_start && run_start < pivot_end)
                    wake = wake ? std::min(*wake, run_start) : run_start;
                if (followed_by_silence && run_end > pivot_start && run_end <= pivot_end)
                    sleep = sleep ? std::max(*sleep, run_end) : run_end;
            }
            i = j;
        }
    }
    if (!wake || !sleep) return std::nullopt;
    return SleepWake{*wake, *sleep};
}

std::string events_csv_header() { return "label,start_iso,end_iso,confidence,evidence"; }

std::string events_to_csv(const std::vector<ActivityEvent>& events) {
    std::ostringstream out;
    for (const ActivityEvent& ev : events) {
        out << ev.label << ',' << format_iso(ev.start_us) << ',' << format_iso(ev.end_us) << ',';
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%.3f", ev.confidence);
        out << buf << ',';
        for (size_t i = 0; i < ev.evidence.size(); ++i) {
            if (i) out << ';';
            out << ev.evidence[i].device.to_string() << ':' << ev.evidence[i].condition;
        }
        out << '\n';
    }
    return out.str();
}

} // namespace homescope
