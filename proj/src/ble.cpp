#include "homescope/ble.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace homescope {

using nlohmann::json;

AdParseResult parse_ad_structures(ByteView payload) {
    AdParseResult out;
    size_t pos = 0;
    while (pos < payload.size()) {
        uint8_t len = payload[pos];
        if (len == 0) break; // zero-length terminator / padding
        if (pos + 1 + len > payload.size()) {
            out.malformed = true;
            break;
        }
        AdStructure s;
        s.ad_type = payload[pos + 1];
        s.value.assign(payload.begin() + long(pos + 2), payload.begin() + long(pos + 1 + len));
        out.structures.push_back(std::move(s));
        pos += 1 + size_t(len);
    }
    return out;
}

Bytes serialize_ad_structures(const std::vector<AdStructure>& structures) {
    Bytes out;
    for (const AdStructure& s : structures) {
        out.push_back(uint8_t(1 + s.value.size()));
        out.push_back(s.ad_type);
        out.insert(out.end(), s.value.begin(), s.value.end());
    }
    return out;
}

std::optional<LocalName> decode_local_name(const std::vector<AdStructure>& structures) {
    const AdStructure* shortened = nullptr;
    for (const AdStructure& s : structures) {
        if (s.ad_type == kAdCompleteName) return LocalName{utf8_lossy(s.value), true};
        if (s.ad_type == kAdShortName && !shortened) shortened = &s;
    }
    if (shortened) return LocalName{utf8_lossy(shortened->value), false};
    return std::nullopt;
}

namespace {

// 32-bit UUIDs widen onto the Bluetooth base UUID xxxxxxxx-0000-1000-8000-00805F9B34FB.
Uuid128 widen_uuid32(uint32_t v) {
    Uuid128 u{};
    u[0] = uint8_t(v >> 24);
    u[1] = uint8_t(v >> 16);
    u[2] = uint8_t(v >> 8);
    u[3] = uint8_t(v);
    const uint8_t base[12] = {0x00, 0x00, 0x10, 0x00, 0x80, 0x00, 0x00, 0x80, 0x5f, 0x9b, 0x34, 0xfb};
    std::copy(std::begin(base), std::end(base), u.begin() + 4);
    return u;
}

} // namespace

ServiceUuids decode_service_uuids(const std::vector<AdStructure>& structures) {
    ServiceUuids out;
    for (const AdStructure& s : structures) {
        switch (s.ad_type) {
        case kAdUuid16Partial:
        case kAdUuid16Complete:
            if (s.value.size() % 2 != 0)
                raise(ErrorCode::MalformedUuidList, "16-bit uuid list with odd byte count");
            for (size_t i = 0; i < s.value.size(); i += 2)
                out.uuid16.push_back(uint16_t(s.value[i] | s.value[i + 1] << 8));
            break;
        case kAdUuid32Partial:
        case kAdUuid32Complete:
            if (s.value.size() % 4 != 0)
                raise(ErrorCode::MalformedUuidList, "32-bit uuid list not a multiple of 4");
            for (size_t i = 0; i < s.value.size(); i += 4) {
                uint32_t v = uint32_t(s.value[i]) | uint32_t(s.value[i + 1]) << 8 |
                             uint32_t(s.value[i + 2]) << 16 | uint32_t(s.value[i + 3]) << 24;
                out.uuid128.push_back(widen_uuid32(v));
            }
            break;
        case kAdUuid128Partial:
        case kAdUuid128Complete:
            if (s.value.size() % 16 != 0)
                raise(ErrorCode::MalformedUuidList, "128-bit uuid list not a multiple of 16");
            for (size_t i = 0; i < s.value.size(); i += 16) {
                Uuid128 u;
                // little-endian on the wire; stored big-endian for display order
                for (size_t k = 0; k < 16; ++k) u[k] = s.value[i + 15 - k];
                out.uuid128.push_back(u);
            }
            break;
        default:
            break;
        }
    }
    return out;
}

std::optional<ManufacturerData> decode_manufacturer(const std::vector<AdStructure>& structures) {
    for (const AdStructure& s : structures) {
        if (s.ad_type != kAdManufacturer) continue;
        if (s.value.size() < 2)
            raise(ErrorCode::MalformedManufacturer, "manufacturer field shorter than company id");
        ManufacturerData m;
        m.company_id = uint16_t(s.value[0] | s.value[1] << 8);
        m.payload.assign(s.value.begin() + 2, s.value.end());
        return m;
    }
    return std::nullopt;
}

BleDecoded decode_views(const std::vector<AdStructure>& structures) {
    BleDecoded d;
    if (auto name = decode_local_name(structures)) {
        d.local_name = name->name;
        d.name_complete = name->complete;
    }
    // Tolerant record-level view: malformed lists are dropped, valid ones kept.
    for (const AdStructure& s : structures) {
        try {
            ServiceUuids u = decode_service_uuids({s});
            d.service_uuids16.insert(d.service_uuids16.end(), u.uuid16.begin(), u.uuid16.end());
            d.service_uuids128.insert(d.service_uuids128.end(), u.uuid128.begin(), u.uuid128.end());
        } catch (const Error&) {
        }
        if (s.ad_type == kAdManufacturer && !d.manufacturer) {
            try {
                d.manufacturer = decode_manufacturer({s});
            } catch (const Error&) {
            }
        }
    }
    return d;
}

BleAdvRecord make_ble_record(int64_t timestamp_us, std::string sniffer_id, MacAddress advertiser,
                             std::optional<int> rssi_dbm, ByteView payload) {
    BleAdvRecord r;
    r.timestamp_us = timestamp_us;
    r.sniffer_id = std::move(sniffer_id);
    r.advertiser = advertiser;
    r.rssi_dbm = rssi_dbm;
    r.structures = parse_ad_structures(payload).structures;
    r.decoded = decode_views(r.structures);
    return r;
}

std::string ble_record_to_line(const BleAdvRecord& r) {
    json j;
    j["ts_us"] = r.timestamp_us;
    j["sniffer"] = r.sniffer_id;
    j["addr"] = r.advertiser.to_string();
    if (r.rssi_dbm) j["rssi_dbm"] = *r.rssi_dbm;
    j["adv_hex"] = to_hex(serialize_ad_structures(r.structures));
    return j.dump();
}

BleAdvRecord ble_record_from_line(const std::string& line, size_t line_no) {
    json j = json::parse(line, nullptr, false);
    auto fail = [&](const std::string& what) {
        raise(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": " + what);
    };
    if (j.is_discarded() || !j.is_object()) fail("not a JSON object");
    if (!j.contains("ts_us") || !j["ts_us"].is_number_integer()) fail("missing ts_us");
    if (!j.contains("sniffer") || !j["sniffer"].is_string()) fail("missing sniffer");
    if (!j.contains("addr") || !j["addr"].is_string()) fail("missing addr");
    if (!j.contains("adv_hex") || !j["adv_hex"].is_string()) fail("missing adv_hex");
    auto mac = MacAddress::parse(j["addr"].get<std::string>());
    if (!mac) fail("bad addr");
    std::optional<int> rssi;
    if (j.contains("rssi_dbm") && !j["rssi_dbm"].is_null()) rssi = j["rssi_dbm"].get<int>();
    Bytes payload;
    try {
        payload = from_hex(j["adv_hex"].get<std::string>());
    } catch (const Error&) {
        fail("bad adv_hex");
    }
    return make_ble_record(j["ts_us"].get<int64_t>(), j["sniffer"].get<std::string>(), *mac, rssi,
                           payload);
}

void save_ble_records(const std::string& path, const std::vector<BleAdvRecord>& records) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) raise(ErrorCode::IoError, "cannot write " + path);
    for (const BleAdvRecord& r : records) out << ble_record_to_line(r) << '\n';
}

std::vector<BleAdvRecord> load_ble_records(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorCode::IoError, "cannot open " + path);
    std::vector<BleAdvRecord> out;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        out.push_back(ble_record_from_line(line, line_no));
    }
    return out;
}

ServiceNameTable ServiceNameTable::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorCode::IoError, "cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_text(ss.str());
}

ServiceNameTable ServiceNameTable::from_text(const std::string& text) {
    ServiceNameTable table;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        size_t tab = line.find('\t');
        if (tab == std::string::npos) continue;
        unsigned uuid = 0;
        try {
            uuid = unsigned(std::stoul(line.substr(0, tab), nullptr, 16));
        } catch (...) {
            continue;
        }
        if (uuid > 0xffff) continue;
        table.names_.emplace_back(uint16_t(uuid), line.substr(tab + 1));
    }
    std::sort(table.names_.begin(), table.names_.end());
    return table;
}

std::optional<std::string> ServiceNameTable::resolve(uint16_t uuid16) const {
    auto it = std::lower_bound(names_.begin(), names_.end(), uuid16,
                               [](const auto& a, uint16_t v) { return a.first < v; });
    if (it != names_.end() && it->first == uuid16) return it->second;
    return std::nullopt;
}

} // namespace homescope
