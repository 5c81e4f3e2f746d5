#include "homescope/frame_io.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace homescope {

using nlohmann::json;

namespace {

[[noreturn]] void bad_line(size_t line_no, const std::string& what) {
    raise(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": " + what);
}

MacAddress require_mac(const json& j, const char* key, size_t line_no) {
    if (!j.contains(key) || !j[key].is_string()) bad_line(line_no, std::string("missing mac field ") + key);
    auto mac = MacAddress::parse(j[key].get<std::string>());
    if (!mac) bad_line(line_no, std::string("bad mac in field ") + key);
    return *mac;
}

} // namespace

std::string frame_record_to_line(const FrameRecord& r) {
    json j;
    j["ts_us"] = r.ts_us();
    j["sniffer"] = r.sniffer_id;
    j["ftype"] = frame_type_name(r.fc.ftype);
    j["subtype"] = int(r.fc.subtype);
    j["dir"] = direction_name(r.direction);
    j["sa"] = r.addrs.sa.to_string();
    j["da"] = r.addrs.da.to_string();
    j["ta"] = r.addrs.ta.to_string();
    j["ra"] = r.addrs.ra.to_string();
    j["body_len"] = r.body_len_bytes;
    if (r.addrs.bssid) j["bssid"] = r.addrs.bssid->to_string();
    if (r.meta.rssi_dbm) j["rssi_dbm"] = *r.meta.rssi_dbm;
    if (r.meta.channel_freq_mhz) j["freq_mhz"] = *r.meta.channel_freq_mhz;
    if (r.meta.data_rate_kbps) j["rate_kbps"] = *r.meta.data_rate_kbps;
    if (r.ssid) j["ssid_hex"] = to_hex(*r.ssid);
    return j.dump();
}

FrameRecord frame_record_from_line(const std::string& line, size_t line_no) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) bad_line(line_no, "not a JSON object");

    FrameRecord r;
    if (!j.contains("ts_us") || !j["ts_us"].is_number_integer()) bad_line(line_no, "missing ts_us");
    r.meta.timestamp_us = uint64_t(j["ts_us"].get<int64_t>());
    if (!j.contains("sniffer") || !j["sniffer"].is_string()) bad_line(line_no, "missing sniffer");
    r.sniffer_id = j["sniffer"].get<std::string>();

    if (!j.contains("ftype") || !j["ftype"].is_string()) bad_line(line_no, "missing ftype");
    auto ftype = frame_type_from_name(j["ftype"].get<std::string>());
    if (!ftype) bad_line(line_no, "unknown ftype");
    r.fc.ftype = *ftype;
    if (!j.contains("subtype") || !j["subtype"].is_number_integer()) bad_line(line_no, "missing subtype");
    int subtype = j["subtype"].get<int>();
    if (subtype < 0 || subtype > 15) bad_line(line_no, "subtype out of range");
    r.fc.subtype = uint8_t(subtype);

    if (!j.contains("dir") || !j["dir"].is_string()) bad_line(line_no, "missing dir");
    auto dir = direction_from_name(j["dir"].get<std::string>());
    if (!dir) bad_line(line_no, "unknown dir");
    r.direction = *dir;
    r.fc.to_ds = (int(*dir) & 1) != 0;
    r.fc.from_ds = (int(*dir) & 2) != 0;
    r.fc.raw_flags = uint8_t((r.fc.from_ds ? 2 : 0) | (r.fc.to_ds ? 1 : 0));

    r.addrs.sa = require_mac(j, "sa", line_no);
    r.addrs.da = require_mac(j, "da", line_no);
    r.addrs.ta = require_mac(j, "ta", line_no);
    r.addrs.ra = require_mac(j, "ra", line_no);
    if (!j.contains("body_len") || !j["body_len"].is_number_integer()) bad_line(line_no, "missing body_len");
    int64_t body_len = j["body_len"].get<int64_t>();
    if (body_len < 0) bad_line(line_no, "negative body_len");
    r.body_len_bytes = uint32_t(body_len);

    if (j.contains("bssid") && !j["bssid"].is_null()) r.addrs.bssid = require_mac(j, "bssid", line_no);
    if (j.contains("rssi_dbm") && !j["rssi_dbm"].is_null()) r.meta.rssi_dbm = j["rssi_dbm"].get<int>();
    if (j.contains("freq_mhz") && !j["freq_mhz"].is_null())
        r.meta.channel_freq_mhz = j["freq_mhz"].get<unsigned>();
    if (j.contains("rate_kbps") && !j["rate_kbps"].is_null())
        r.meta.data_rate_kbps = j["rate_kbps"].get<unsigned>();
    if (j.contains("ssid_hex") && !j["ssid_hex"].is_null()) {
        try {
            r.ssid = from_hex(j["ssid_hex"].get<std::string>());
        } catch (const Error&) {
            bad_line(line_no, "bad ssid_hex");
        }
    }
    return r;
}

void write_frame_records(std::ostream& out, const std::vector<FrameRecord>& records) {
    for (const FrameRecord& r : records) out << frame_record_to_line(r) << '\n';
}

std::vector<FrameRecord> read_frame_records(std::istream& in) {
    std::vector<FrameRecord> out;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        out.push_back(frame_record_from_line(line, line_no));
    }
    return out;
}

void save_frame_records(const std::string& path, const std::vector<FrameRecord>& records) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) raise(ErrorCode::IoError, "cannot write " + path);
    write_frame_records(out, records);
}

std::vector<FrameRecord> load_frame_records(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorCode::IoError, "cannot open " + path);
    return read_frame_records(in);
}

bool same_frame_record(const FrameRecord& a, const FrameRecord& b) {
    return a.ts_us() == b.ts_us() && a.sniffer_id == b.sniffer_id && a.fc.ftype == b.fc.ftype &&
           a.fc.subtype == b.fc.subtype && a.direction == b.direction && a.addrs == b.addrs &&
           a.body_len_bytes == b.body_len_bytes && a.meta.rssi_dbm == b.meta.rssi_dbm &&
           a.meta.channel_freq_mhz == b.meta.channel_freq_mhz &&
           a.meta.data_rate_kbps == b.meta.data_rate_kbps && a.ssid == b.ssid;
}

} // namespace homescope
