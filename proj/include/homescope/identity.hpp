#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "homescope/ble.hpp"
#include "homescope/frame.hpp"
#include "homescope/oui.hpp"

namespace homescope {

enum class DeviceKind { Unknown, Smart, ManuallyControlled };

const char* device_kind_name(DeviceKind k);

struct DeviceProfile {
    MacAddress mac;
    std::optional<std::string> vendor;
    bool randomized_mac = false;
    std::optional<std::string> ble_name;
    std::vector<uint16_t> ble_services;
    int64_t first_seen_us = 0;
    int64_t last_seen_us = 0;
    DeviceKind kind = DeviceKind::Unknown; // filled by traffic-analysis
    std::vector<std::string> labels;       // free-form annotations ("router", type tags)

    bool has_label(const std::string& label) const;
};

/// Keeps frames whose resolved BSSID equals the target network. With
/// include_probes (default), probe requests from stations already seen in the
/// network are also kept even though they carry a broadcast BSSID.
std::vector<FrameRecord> filter_network(const std::vector<FrameRecord>& frames,
                                        const MacAddress& target_bssid, bool include_probes = true);

struct ProfileOptions {
    /// Paper-style fuzzy BLE join: a BLE name containing the hex of a WiFi
    /// mac's first or last two octets links the advertisement to that mac.
    /// Off by default; false joins are worse than missed joins.
    bool fuzzy_ble_join = false;
};

/// One profile per distinct non-broadcast station mac appearing as SA or TA.
/// BLE enrichment joins on exact advertiser mac (or fuzzily, see options);
/// the station whose mac matches data-frame BSSIDs is labeled "router".
std::map<MacAddress, DeviceProfile> build_profiles(const std::vector<FrameRecord>& frames,
                                                   const std::vector<BleAdvRecord>& ble_records,
                                                   const OuiDatabase& oui_db,
                                                   const ProfileOptions& options = {});

struct ProbeEntry {
    Bytes ssid;
    uint64_t count = 0;
    int64_t first_seen_us = 0;
    int64_t last_seen_us = 0;
};

/// Probed SSIDs keyed by source mac. Wildcard (empty) SSIDs never enter the
/// inventory.
using ProbeInventory = std::map<MacAddress, std::vector<ProbeEntry>>;

ProbeInventory probe_inventory(const std::vector<FrameRecord>& frames);

/// OSINT-style device typing: substring patterns over the OUI vendor or the
/// BLE name attach a type label ("tv", "laptop", ...) to a profile.
struct TypeRule {
    enum class Source { Vendor, BleName };
    Source source = Source::Vendor;
    std::string pattern; // case-insensitive substring
    std::string label;
};

/// "vendor|ble_name<TAB>pattern<TAB>label" rows; '#' comments.
std::vector<TypeRule> parse_type_rules(const std::string& text);
std::vector<TypeRule> load_type_rules(const std::string& path);

void apply_type_rules(std::map<MacAddress, DeviceProfile>& profiles,
                      const std::vector<TypeRule>& rules);

} // namespace homescope
