#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "homescope/frame.hpp"

namespace homescope {

// Portable frame-record interchange: one flat JSON object per line.
//
// Mandatory keys: ts_us (integer), sniffer (string), ftype ("mgmt"/"ctrl"/
// "data"/"ext"), subtype (integer), dir ("up"/"down"/"peer"/"ap2ap"),
// sa/da/ta/ra (mac strings), body_len (integer).
// Optional keys: bssid, rssi_dbm, freq_mhz, rate_kbps, ssid_hex.
// Unknown keys are ignored on read. The frame-control flag byte is carried
// via "dir" only; reading reconstructs the DS bits.

std::string frame_record_to_line(const FrameRecord& record);

/// Throws ParseError carrying the 1-based line number on malformed input.
FrameRecord frame_record_from_line(const std::string& line, size_t line_no = 0);

void write_frame_records(std::ostream& out, const std::vector<FrameRecord>& records);
std::vector<FrameRecord> read_frame_records(std::istream& in);

void save_frame_records(const std::string& path, const std::vector<FrameRecord>& records);
std::vector<FrameRecord> load_frame_records(const std::string& path);

/// Interchange-level equality: the fields the line format carries.
bool same_frame_record(const FrameRecord& a, const FrameRecord& b);

} // namespace homescope
