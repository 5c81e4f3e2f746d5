#include "homescope/pcap.hpp"

#include <algorithm>
#include <fstream>

#include "homescope/radiotap.hpp"
#include "homescope/time_util.hpp"

namespace homescope {

namespace {

constexpr uint32_t kMagicMicros = 0xa1b2c3d4;
constexpr uint32_t kMagicNanos = 0xa1b23c4d;
constexpr size_t kGlobalHeaderLen = 24;
constexpr size_t kRecordHeaderLen = 16;

uint32_t byteswap32(uint32_t v) {
    return v << 24 | (v & 0xff00u) << 8 | (v >> 8 & 0xff00u) | v >> 24;
}

} // namespace

PcapReader::PcapReader(ByteView file) : file_(file) {
    if (file.size() < kGlobalHeaderLen) raise(ErrorCode::FormatError, "file shorter than pcap global header");
    uint32_t magic = uint32_t(file[0]) | uint32_t(file[1]) << 8 | uint32_t(file[2]) << 16 |
                     uint32_t(file[3]) << 24;
    if (magic == kMagicMicros) {
        swapped_ = false;
        nanosecond_ = false;
    } else if (magic == byteswap32(kMagicMicros)) {
        swapped_ = true;
        nanosecond_ = false;
    } else if (magic == kMagicNanos) {
        swapped_ = false;
        nanosecond_ = true;
    } else if (magic == byteswap32(kMagicNanos)) {
        swapped_ = true;
        nanosecond_ = true;
    } else {
        raise(ErrorCode::FormatError, "bad pcap magic " + to_hex(file.subspan(0, 4)));
    }
    link_type_ = read_u32(20);
    if (link_type_ != kLinkTypeRadiotap)
        raise(ErrorCode::UnsupportedLinkType,
              "link type " + std::to_string(link_type_) + ", expected 127 (radiotap)");
    pos_ = kGlobalHeaderLen;
}

uint32_t PcapReader::read_u32(size_t at) const {
    uint32_t v = uint32_t(file_[at]) | uint32_t(file_[at + 1]) << 8 | uint32_t(file_[at + 2]) << 16 |
                 uint32_t(file_[at + 3]) << 24;
    return swapped_ ? byteswap32(v) : v;
}

uint16_t PcapReader::read_u16(size_t at) const {
    uint16_t v = uint16_t(uint32_t(file_[at]) | uint32_t(file_[at + 1]) << 8);
    return swapped_ ? uint16_t(v << 8 | v >> 8) : v;
}

std::optional<PcapPacket> PcapReader::next() {
    if (pos_ >= file_.size()) return std::nullopt;
    if (pos_ + kRecordHeaderLen > file_.size())
        raise(ErrorCode::TruncatedCapture, "partial record header at offset " + std::to_string(pos_));
    uint32_t ts_sec = read_u32(pos_);
    uint32_t ts_frac = read_u32(pos_ + 4);
    uint32_t incl_len = read_u32(pos_ + 8);
    uint32_t orig_len = read_u32(pos_ + 12);
    if (pos_ + kRecordHeaderLen + incl_len > file_.size())
        raise(ErrorCode::TruncatedCapture, "record data truncated at offset " + std::to_string(pos_));
    PcapPacket pkt;
    int64_t frac_us = nanosecond_ ? int64_t(ts_frac) / 1000 : int64_t(ts_frac);
    pkt.ts_us = int64_t(ts_sec) * kMicrosPerSecond + frac_us;
    pkt.orig_len = orig_len;
    ByteView body = file_.subspan(pos_ + kRecordHeaderLen, incl_len);
    pkt.data.assign(body.begin(), body.end());
    pos_ += kRecordHeaderLen + incl_len;
    return pkt;
}

PcapContents read_pcap(ByteView file) {
    PcapReader reader(file);
    PcapContents out;
    out.link_type = reader.link_type();
    try {
        while (auto pkt = reader.next()) out.packets.push_back(std::move(*pkt));
    } catch (const Error& e) {
        if (e.code() != ErrorCode::TruncatedCapture) throw;
        out.truncated = true;
    }
    return out;
}

PcapContents read_pcap_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorCode::IoError, "cannot open " + path);
    Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return read_pcap(data);
}

PcapWriter::PcapWriter() {
    out_.u32le(kMagicMicros);
    out_.u16le(2); // version 2.4
    out_.u16le(4);
    out_.u32le(0); // thiszone
    out_.u32le(0); // sigfigs
    out_.u32le(65535);
    out_.u32le(kLinkTypeRadiotap);
}

void PcapWriter::add(int64_t ts_us, ByteView packet) {
    out_.u32le(uint32_t(ts_us / kMicrosPerSecond));
    out_.u32le(uint32_t(ts_us % kMicrosPerSecond));
    out_.u32le(uint32_t(packet.size()));
    out_.u32le(uint32_t(packet.size()));
    out_.raw(packet);
}

void PcapWriter::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) raise(ErrorCode::IoError, "cannot write " + path);
    out.write(reinterpret_cast<const char*>(bytes().data()), std::streamsize(bytes().size()));
}

namespace {

MacAddress read_mac(ByteView packet, size_t at) {
    std::array<uint8_t, 6> octets{};
    for (size_t i = 0; i < 6; ++i) octets[i] = packet[at + i];
    return MacAddress(octets);
}

constexpr size_t kMacHeaderLen = 24;
constexpr size_t kQosLen = 2;
constexpr size_t kCcmpLen = 8;
constexpr size_t kFcsLen = 4;

} // namespace

std::optional<FrameRecord> decode_frame(const std::string& sniffer_id, int64_t capture_ts_us,
                                        ByteView packet) {
    RadiotapResult rt = parse_radiotap(packet);
    size_t at = rt.payload_offset;
    if (packet.size() < at + 2) return std::nullopt;

    FrameControl fc = parse_frame_control(packet[at], packet[at + 1]);
    if (fc.version != 0) return std::nullopt;
    if (fc.ftype == FrameType::Control || fc.ftype == FrameType::Extension) return std::nullopt;

    size_t header_len = kMacHeaderLen;
    std::optional<MacAddress> addr4;
    if (fc.ds_code() == 3) {
        if (packet.size() < at + kMacHeaderLen + 6) return std::nullopt;
        addr4 = read_mac(packet, at + kMacHeaderLen);
        header_len += 6;
    } else if (packet.size() < at + kMacHeaderLen) {
        return std::nullopt;
    }
    bool qos = fc.ftype == FrameType::Data && (fc.subtype & 0x08);
    if (qos) header_len += kQosLen;

    size_t end = packet.size();
    if (rt.meta.fcs_at_end && end >= at + header_len + kFcsLen) end -= kFcsLen;
    if (end < at + header_len) return std::nullopt;

    FrameRecord rec;
    rec.sniffer_id = sniffer_id;
    rec.meta = rt.meta;
    rec.meta.timestamp_us = uint64_t(capture_ts_us);
    rec.fc = fc;
    rec.addrs = resolve_addresses(fc, read_mac(packet, at + 4), read_mac(packet, at + 10),
                                  read_mac(packet, at + 16), addr4);
    rec.direction = classify_ds(fc);

    size_t body_len = end - at - header_len;
    if (fc.ftype == FrameType::Data && fc.is_protected())
        body_len = body_len >= kCcmpLen ? body_len - kCcmpLen : 0;
    rec.body_len_bytes = uint32_t(body_len);

    if (fc.ftype == FrameType::Management &&
        (fc.subtype == kSubtypeProbeRequest || fc.subtype == kSubtypeProbeResponse ||
         fc.subtype == kSubtypeBeacon)) {
        try {
            rec.ssid = extract_mgmt_ssid(packet.subspan(at + header_len, body_len), fc.subtype);
        } catch (const Error&) {
            // Malformed tag soup in a real capture: keep the frame, drop the SSID.
        }
    }
    return rec;
}

Bytes encode_frame(const FrameRecord& record) {
    ByteWriter w;
    w.raw(build_radiotap(record.meta));

    const FrameControl& fc = record.fc;
    w.u8(uint8_t(fc.version | (uint8_t(fc.ftype) << 2) | (fc.subtype << 4)));
    w.u8(fc.raw_flags);
    w.u16le(0); // duration

    const ResolvedAddresses& a = record.addrs;
    MacAddress bssid = a.bssid.value_or(MacAddress::broadcast());
    MacAddress addr1, addr2, addr3;
    std::optional<MacAddress> addr4;
    switch (fc.ds_code()) {
    case 0:
        addr1 = a.da;
        addr2 = a.sa;
        addr3 = bssid;
        break;
    case 1:
        addr1 = bssid;
        addr2 = a.sa;
        addr3 = a.da;
        break;
    case 2:
        addr1 = a.da;
        addr2 = bssid;
        addr3 = a.sa;
        break;
    default:
        addr1 = a.ra;
        addr2 = a.ta;
        addr3 = a.da;
        addr4 = a.sa;
        break;
    }
    w.raw(addr1.octets());
    w.raw(addr2.octets());
    w.raw(addr3.octets());
    w.u16le(0); // sequence control
    if (addr4) w.raw(addr4->octets());
    bool qos = fc.ftype == FrameType::Data && (fc.subtype & 0x08);
    if (qos) w.u16le(0);
    if (fc.ftype == FrameType::Data && fc.is_protected()) w.zeros(kCcmpLen);

    if (fc.ftype == FrameType::Management &&
        (fc.subtype == kSubtypeProbeRequest || fc.subtype == kSubtypeProbeResponse ||
         fc.subtype == kSubtypeBeacon)) {
        size_t fixed = fc.subtype == kSubtypeProbeRequest ? 0 : 12;
        w.zeros(fixed);
        size_t written = fixed;
        if (record.ssid) {
            w.u8(0);
            w.u8(uint8_t(record.ssid->size()));
            w.raw(*record.ssid);
            written += 2 + record.ssid->size();
        }
        if (record.body_len_bytes > written) {
            size_t pad = record.body_len_bytes - written;
            if (pad < 2)
                raise(ErrorCode::InvalidParameter, "management body length not representable");
            while (pad > 0) {
                size_t chunk = std::min<size_t>(pad, 257);
                if (pad - chunk == 1) --chunk; // a lone trailing byte cannot form a tag
                w.u8(221); // vendor-specific filler tag
                w.u8(uint8_t(chunk - 2));
                w.zeros(chunk - 2);
                pad -= chunk;
            }
        } else if (record.body_len_bytes < written) {
            raise(ErrorCode::InvalidParameter, "management body length below tagged parameters");
        }
    } else {
        w.zeros(record.body_len_bytes);
    }
    if (record.meta.fcs_at_end) w.zeros(kFcsLen); // never verified, left zero
    return std::move(w.buffer());
}

} // namespace homescope
