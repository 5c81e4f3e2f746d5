#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "homescope/bytes.hpp"
#include "homescope/mac_address.hpp"

namespace homescope {

enum class FrameType : uint8_t { Management = 0, Control = 1, Data = 2, Extension = 3 };

const char* frame_type_name(FrameType t); // "mgmt" / "ctrl" / "data" / "ext"
std::optional<FrameType> frame_type_from_name(const std::string& name);

/// Direction of a frame relative to the infrastructure network, decoded from
/// the To-DS/From-DS flag pair.
enum class Direction : uint8_t { PeerOrBroadcast = 0, Uplink = 1, Downlink = 2, ApToAp = 3 };

const char* direction_name(Direction d); // "peer" / "up" / "down" / "ap2ap"
std::optional<Direction> direction_from_name(const std::string& name);

struct FrameControl {
    uint8_t version = 0;
    FrameType ftype = FrameType::Management;
    uint8_t subtype = 0;
    bool to_ds = false;
    bool from_ds = false;
    uint8_t raw_flags = 0;

    int ds_code() const { return (from_ds ? 2 : 0) | (to_ds ? 1 : 0); }
    bool is_protected() const { return (raw_flags & 0x40) != 0; }
};

// Management subtypes this pipeline cares about.
constexpr uint8_t kSubtypeProbeRequest = 4;
constexpr uint8_t kSubtypeProbeResponse = 5;
constexpr uint8_t kSubtypeBeacon = 8;
constexpr uint8_t kSubtypeQosData = 8;

/// Octet 0 = version | type | subtype, octet 1 = flags. Total: every 16-bit
/// value decodes; a nonzero version is flagged downstream, not here.
FrameControl parse_frame_control(uint8_t b0, uint8_t b1);

/// Frame-control word in the display convention of capture tools: the
/// type/subtype octet first (0x8842 = QoS data, from-DS).
uint16_t frame_control_word(const FrameControl& fc);

/// Table of DS-flag interpretations; total over all four codes.
Direction classify_ds(const FrameControl& fc);

struct ResolvedAddresses {
    MacAddress sa, da, ta, ra;
    std::optional<MacAddress> bssid;

    bool operator==(const ResolvedAddresses&) const = default;
};

/// Maps the positional address fields to SA/DA/TA/RA/BSSID per the DS code.
/// addr4 is consumed only for the AP-to-AP code and required there.
ResolvedAddresses resolve_addresses(const FrameControl& fc, const MacAddress& addr1,
                                    const MacAddress& addr2, const MacAddress& addr3,
                                    const std::optional<MacAddress>& addr4 = std::nullopt);

/// Scans the tagged-parameter block of a management frame body for the SSID
/// tag (0). `body` starts at the subtype's fixed parameters (12 bytes for
/// beacon / probe response, none for probe request). An empty value is a
/// valid wildcard/hidden SSID; an absent tag yields nullopt.
std::optional<Bytes> extract_mgmt_ssid(ByteView body, uint8_t subtype);

/// 2.4 GHz channel grid, European band: channels 1..13, 5 MHz spacing from
/// 2412 MHz. Exact inverses of each other on the grid.
unsigned channel_to_freq_mhz(int channel);
int freq_mhz_to_channel(unsigned freq_mhz);

struct RadiotapMeta {
    uint64_t timestamp_us = 0; // radiotap TSFT; replaced by capture time when decoding pcaps
    std::optional<int> rssi_dbm;
    std::optional<unsigned> channel_freq_mhz;
    std::optional<unsigned> data_rate_kbps;
    bool fcs_at_end = false;

    bool operator==(const RadiotapMeta&) const = default;
};

/// One decoded 802.11 frame with capture metadata: the pipeline's atomic unit.
struct FrameRecord {
    std::string sniffer_id;
    RadiotapMeta meta;
    FrameControl fc;
    ResolvedAddresses addrs;
    Direction direction = Direction::PeerOrBroadcast;
    uint32_t body_len_bytes = 0;
    std::optional<Bytes> ssid; // management frames only

    int64_t ts_us() const { return int64_t(meta.timestamp_us); }
};

} // namespace homescope
