#include "homescope/identity.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace homescope {

const char* device_kind_name(DeviceKind k) {
    switch (k) {
    case DeviceKind::Smart: return "smart";
    case DeviceKind::ManuallyControlled: return "manually-controlled";
    case DeviceKind::Unknown: return "unknown";
    }
    return "?";
}

bool DeviceProfile::has_label(const std::string& label) const {
    return std::find(labels.begin(), labels.end(), label) != labels.end();
}

std::vector<FrameRecord> filter_network(const std::vector<FrameRecord>& frames,
                                        const MacAddress& target_bssid, bool include_probes) {
    std::set<MacAddress> stations;
    for (const FrameRecord& f : frames) {
        if (!f.addrs.bssid || *f.addrs.bssid != target_bssid) continue;
        for (const MacAddress& m : {f.addrs.sa, f.addrs.ta, f.addrs.da, f.addrs.ra})
            if (!m.is_broadcast()) stations.insert(m);
    }
    std::vector<FrameRecord> out;
    for (const FrameRecord& f : frames) {
        if (f.addrs.bssid && *f.addrs.bssid == target_bssid) {
            out.push_back(f);
            continue;
        }
        if (include_probes && f.fc.ftype == FrameType::Management &&
            f.fc.subtype == kSubtypeProbeRequest && stations.count(f.addrs.sa)) {
            out.push_back(f);
        }
    }
    return out;
}

namespace {

std::string mac_hex(const MacAddress& mac) {
    std::string hex = mac.to_string();
    std::erase(hex, ':');
    return hex;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

bool fuzzy_name_match(const std::string& ble_name, const MacAddress& mac) {
    std::string name = lower(ble_name);
    std::string hex = mac_hex(mac);
    return name.find(hex.substr(0, 4)) != std::string::npos ||
           name.find(hex.substr(8, 4)) != std::string::npos;
}

void enrich(DeviceProfile& p, const BleAdvRecord& r) {
    if (r.decoded.local_name && (!p.ble_name || r.decoded.name_complete))
        p.ble_name = r.decoded.local_name;
    for (uint16_t u : r.decoded.service_uuids16)
        if (std::find(p.ble_services.begin(), p.ble_services.end(), u) == p.ble_services.end())
            p.ble_services.push_back(u);
}

} // namespace

std::map<MacAddress, DeviceProfile> build_profiles(const std::vector<FrameRecord>& frames,
                                                   const std::vector<BleAdvRecord>& ble_records,
                                                   const OuiDatabase& oui_db,
                                                   const ProfileOptions& options) {
    std::map<MacAddress, DeviceProfile> profiles;
    std::set<MacAddress> bssids;

    for (const FrameRecord& f : frames) {
        if (f.fc.ftype == FrameType::Data && f.addrs.bssid) bssids.insert(*f.addrs.bssid);
        for (const MacAddress& m : {f.addrs.sa, f.addrs.ta}) {
            if (m.is_broadcast()) continue;
            auto [it, fresh] = profiles.try_emplace(m);
            DeviceProfile& p = it->second;
            if (fresh) {
                p.mac = m;
                VendorLookup v = lookup_vendor(oui_db, m);
                p.vendor = v.vendor;
                p.randomized_mac = v.randomized;
                p.first_seen_us = p.last_seen_us = f.ts_us();
            } else {
                p.first_seen_us = std::min(p.first_seen_us, f.ts_us());
                p.last_seen_us = std::max(p.last_seen_us, f.ts_us());
            }
        }
    }

    for (const BleAdvRecord& r : ble_records) {
        auto it = profiles.find(r.advertiser);
        if (it != profiles.end()) {
            enrich(it->second, r);
            continue;
        }
        if (options.fuzzy_ble_join && r.decoded.local_name) {
            for (auto& [mac, p] : profiles)
                if (fuzzy_name_match(*r.decoded.local_name, mac)) enrich(p, r);
        }
    }

    for (const MacAddress& b : bssids) {
        auto it = profiles.find(b);
        if (it != profiles.end() && !it->second.has_label("router"))
            it->second.labels.push_back("router");
    }
    return profiles;
}

std::vector<TypeRule> parse_type_rules(const std::string& text) {
    std::vector<TypeRule> rules;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream row(line);
        std::string source, pattern, label;
        if (!std::getline(row, source, '\t') || !std::getline(row, pattern, '\t') ||
            !std::getline(row, label, '\t'))
            continue;
        TypeRule rule;
        if (source == "vendor") rule.source = TypeRule::Source::Vendor;
        else if (source == "ble_name") rule.source = TypeRule::Source::BleName;
        else continue;
        rule.pattern = lower(pattern);
        rule.label = label;
        rules.push_back(std::move(rule));
    }
    return rules;
}

std::vector<TypeRule> load_type_rules(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorCode::IoError, "cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_type_rules(ss.str());
}

void apply_type_rules(std::map<MacAddress, DeviceProfile>& profiles,
                      const std::vector<TypeRule>& rules) {
    for (auto& [mac, profile] : profiles) {
        for (const TypeRule& rule : rules) {
            const std::optional<std::string>& field =
                rule.source == TypeRule::Source::Vendor ? profile.vendor : profile.ble_name;
            if (!field) continue;
            if (lower(*field).find(rule.pattern) == std::string::npos) continue;
            if (!profile.has_label(rule.label)) profile.labels.push_back(rule.label);
        }
    }
}

ProbeInventory probe_inventory(const std::vector<FrameRecord>& frames) {
    ProbeInventory inv;
    for (const FrameRecord& f : frames) {
        if (f.fc.ftype != FrameType::Management || f.fc.subtype != kSubtypeProbeRequest) continue;
        if (!f.ssid || f.ssid->empty()) continue; // wildcard probes carry no name
        if (f.addrs.sa.is_broadcast()) continue;
        auto& entries = inv[f.addrs.sa];
        auto it = std::find_if(entries.begin(), entries.end(),
                               [&](const ProbeEntry& e) { return e.ssid == *f.ssid; });
        if (it == entries.end()) {
            entries.push_back({*f.ssid, 1, f.ts_us(), f.ts_us()});
        } else {
            ++it->count;
            it->first_seen_us = std::min(it->first_seen_us, f.ts_us());
            it->last_seen_us = std::max(it->last_seen_us, f.ts_us());
        }
    }
    return inv;
}

} // namespace homescope
