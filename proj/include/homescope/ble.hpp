#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "homescope/bytes.hpp"
#include "homescope/mac_address.hpp"

namespace homescope {

/// One length-type-value element of a BLE advertisement payload.
struct AdStructure {
    uint8_t ad_type = 0;
    Bytes value;

    bool operator==(const AdStructure&) const = default;
};

// GAP AD types used analytically by this pipeline.
constexpr uint8_t kAdUuid16Partial = 0x02;
constexpr uint8_t kAdUuid16Complete = 0x03;
constexpr uint8_t kAdUuid32Partial = 0x04;
constexpr uint8_t kAdUuid32Complete = 0x05;
constexpr uint8_t kAdUuid128Partial = 0x06;
constexpr uint8_t kAdUuid128Complete = 0x07;
constexpr uint8_t kAdShortName = 0x08;
constexpr uint8_t kAdCompleteName = 0x09;
constexpr uint8_t kAdManufacturer = 0xff;

using Uuid128 = std::array<uint8_t, 16>;

struct AdParseResult {
    std::vector<AdStructure> structures;
    bool malformed = false; // a length byte pointed past the buffer end
};

/// Splits an advertisement payload into AD structures, left to right. A zero
/// length byte terminates parsing (padding convention). On a length byte that
/// points past the end, the structures before the fault are still returned
/// with `malformed` set.
AdParseResult parse_ad_structures(ByteView payload);

Bytes serialize_ad_structures(const std::vector<AdStructure>& structures);

/// Complete (0x09) preferred over shortened (0x08); value decoded as UTF-8
/// with replacement characters for invalid bytes.
struct LocalName {
    std::string name;
    bool complete = false;
};
std::optional<LocalName> decode_local_name(const std::vector<AdStructure>& structures);

struct ServiceUuids {
    std::vector<uint16_t> uuid16; // wire order preserved, duplicates kept
    std::vector<Uuid128> uuid128; // 32-bit lists widened onto the base UUID
};

/// Throws MalformedUuidList when a 16-bit list has an odd byte count, a
/// 32-bit list is not a multiple of 4, or a 128-bit list not a multiple of 16.
ServiceUuids decode_service_uuids(const std::vector<AdStructure>& structures);

struct ManufacturerData {
    uint16_t company_id = 0; // little-endian from the first two octets
    Bytes payload;           // proprietary; kept opaque

    bool operator==(const ManufacturerData&) const = default;
};

/// Throws MalformedManufacturer when a 0xFF structure has fewer than 2 bytes.
std::optional<ManufacturerData> decode_manufacturer(const std::vector<AdStructure>& structures);

struct BleDecoded {
    std::optional<std::string> local_name;
    bool name_complete = false;
    std::vector<uint16_t> service_uuids16;
    std::vector<Uuid128> service_uuids128;
    std::optional<ManufacturerData> manufacturer;
};

/// One observed BLE advertisement with its decoded views. `decoded` is a pure
/// function of `structures`; structures that fail their view's contract are
/// skipped there (the per-structure decoders below still report them).
struct BleAdvRecord {
    int64_t timestamp_us = 0;
    std::string sniffer_id;
    MacAddress advertiser;
    std::optional<int> rssi_dbm;
    std::vector<AdStructure> structures;
    BleDecoded decoded;
};

BleDecoded decode_views(const std::vector<AdStructure>& structures);

BleAdvRecord make_ble_record(int64_t timestamp_us, std::string sniffer_id, MacAddress advertiser,
                             std::optional<int> rssi_dbm, ByteView payload);

// Newline-delimited advertisement log: keys ts_us, sniffer, addr, rssi_dbm
// (optional), adv_hex.
std::string ble_record_to_line(const BleAdvRecord& record);
BleAdvRecord ble_record_from_line(const std::string& line, size_t line_no = 0);
void save_ble_records(const std::string& path, const std::vector<BleAdvRecord>& records);
std::vector<BleAdvRecord> load_ble_records(const std::string& path);

/// Bundled Bluetooth assigned-numbers table: "uuid16_hex<TAB>name" rows.
class ServiceNameTable {
public:
    static ServiceNameTable load(const std::string& path);
    static ServiceNameTable from_text(const std::string& text);

    std::optional<std::string> resolve(uint16_t uuid16) const;
    size_t size() const { return names_.size(); }

private:
    std::vector<std::pair<uint16_t, std::string>> names_; // sorted by uuid
};

} // namespace homescope
