#include "homescope/frame.hpp"

namespace homescope {

const char* frame_type_name(FrameType t) {
    switch (t) {
    case FrameType::Management: return "mgmt";
    case FrameType::Control: return "ctrl";
    case FrameType::Data: return "data";
    case FrameType::Extension: return "ext";
    }
    return "?";
}

std::optional<FrameType> frame_type_from_name(const std::string& name) {
    if (name == "mgmt") return FrameType::Management;
    if (name == "ctrl") return FrameType::Control;
    if (name == "data") return FrameType::Data;
    if (name == "ext") return FrameType::Extension;
    return std::nullopt;
}

const char* direction_name(Direction d) {
    switch (d) {
    case Direction::PeerOrBroadcast: return "peer";
    case Direction::Uplink: return "up";
    case Direction::Downlink: return "down";
    case Direction::ApToAp: return "ap2ap";
    }
    return "?";
}

std::optional<Direction> direction_from_name(const std::string& name) {
    if (name == "peer") return Direction::PeerOrBroadcast;
    if (name == "up") return Direction::Uplink;
    if (name == "down") return Direction::Downlink;
    if (name == "ap2ap") return Direction::ApToAp;
    return std::nullopt;
}

FrameControl parse_frame_control(uint8_t b0, uint8_t b1) {
    FrameControl fc;
    fc.version = b0 & 0x03;
    fc.ftype = FrameType((b0 >> 2) & 0x03);
    fc.subtype = (b0 >> 4) & 0x0f;
    fc.raw_flags = b1;
    fc.to_ds = (b1 & 0x01) != 0;
    fc.from_ds = (b1 & 0x02) != 0;
    return fc;
}

uint16_t frame_control_word(const FrameControl& fc) {
    uint8_t b0 = uint8_t(fc.version | (uint8_t(fc.ftype) << 2) | (fc.subtype << 4));
    return uint16_t(b0) << 8 | fc.raw_flags;
}

Direction classify_ds(const FrameControl& fc) {
    switch (fc.ds_code()) {
    case 0: return Direction::PeerOrBroadcast;
    case 1: return Direction::Uplink;
    case 2: return Direction::Downlink;
    default: return Direction::ApToAp;
    }
}

ResolvedAddresses resolve_addresses(const FrameControl& fc, const MacAddress& addr1,
                                    const MacAddress& addr2, const MacAddress& addr3,
                                    const std::optional<MacAddress>& addr4) {
    ResolvedAddresses out;
    out.ra = addr1;
    out.ta = addr2;
    switch (fc.ds_code()) {
    case 0:
        out.da = addr1;
        out.sa = addr2;
        out.bssid = addr3;
        break;
    case 1: // uplink: receiver is the AP
        out.bssid = addr1;
        out.sa = addr2;
        out.da = addr3;
        break;
    case 2: // downlink: transmitter is the AP
        out.da = addr1;
        out.bssid = addr2;
        out.sa = addr3;
        break;
    default: // wireless distribution between two APs
        if (!addr4) raise(ErrorCode::MissingAddress4, "DS code 3 frame without address 4");
        out.da = addr3;
        out.sa = *addr4;
        break;
    }
    return out;
}

std::optional<Bytes> extract_mgmt_ssid(ByteView body, uint8_t subtype) {
    size_t fixed = (subtype == kSubtypeProbeRequest) ? 0 : 12;
    if (body.size() < fixed) raise(ErrorCode::MalformedTags, "body shorter than fixed parameters");
    size_t pos = fixed;
    while (pos + 2 <= body.size()) {
        uint8_t tag = body[pos];
        uint8_t len = body[pos + 1];
        pos += 2;
        if (pos + len > body.size())
            raise(ErrorCode::MalformedTags, "tag length exceeds remaining body");
        if (tag == 0) return Bytes(body.begin() + long(pos), body.begin() + long(pos + len));
        pos += len;
    }
    if (pos != body.size()) raise(ErrorCode::MalformedTags, "dangling tag header");
    return std::nullopt;
}

unsigned channel_to_freq_mhz(int channel) {
    if (channel < 1 || channel > 13)
        raise(ErrorCode::InvalidChannel, "channel " + std::to_string(channel) + " outside 1..13");
    return 2412u + 5u * unsigned(channel - 1);
}

int freq_mhz_to_channel(unsigned freq_mhz) {
    if (freq_mhz < 2412 || freq_mhz > 2472 || (freq_mhz - 2412) % 5 != 0)
        raise(ErrorCode::InvalidChannel, std::to_string(freq_mhz) + " MHz is not on the channel grid");
    return int((freq_mhz - 2412) / 5) + 1;
}

} // namespace homescope
