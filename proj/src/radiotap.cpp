#include "homescope/radiotap.hpp"

namespace homescope {

namespace {

enum RadiotapField : int {
    kTsft = 0,
    kFlags = 1,
    kRate = 2,
    kChannel = 3,
    kFhss = 4,
    kDbmAntSignal = 5,
    kDbmAntNoise = 6,
    kLockQuality = 7,
    kTxAttenuation = 8,
    kDbTxAttenuation = 9,
    kDbmTxPower = 10,
    kAntenna = 11,
    kDbAntSignal = 12,
    kDbAntNoise = 13,
    kRxFlags = 14,
    kTxFlags = 15,
    kRtsRetries = 16,
    kDataRetries = 17,
    kXChannel = 18,
    kMcs = 19,
    kAmpduStatus = 20,
    kVht = 21,
    kTimestamp = 22,
    kMaxKnownField = 22,
};

struct FieldLayout {
    uint8_t size;
    uint8_t align;
};

// Sizes and natural alignments of the standard radiotap fields, by index.
constexpr FieldLayout kLayout[kMaxKnownField + 1] = {
    {8, 8},  // TSFT
    {1, 1},  // Flags
    {1, 1},  // Rate
    {4, 2},  // Channel (freq u16 + flags u16)
    {2, 2},  // FHSS
    {1, 1},  // dBm antenna signal
    {1, 1},  // dBm antenna noise
    {2, 2},  // lock quality
    {2, 2},  // TX attenuation
    {2, 2},  // dB TX attenuation
    {1, 1},  // dBm TX power
    {1, 1},  // antenna index
    {1, 1},  // dB antenna signal
    {1, 1},  // dB antenna noise
    {2, 2},  // RX flags
    {2, 2},  // TX flags
    {1, 1},  // RTS retries
    {1, 1},  // data retries
    {8, 4},  // XChannel
    {3, 1},  // MCS
    {8, 4},  // A-MPDU status
    {12, 2}, // VHT
    {12, 8}, // timestamp
};

constexpr uint32_t kBitRadiotapNsNext = 1u << 29;
constexpr uint32_t kBitVendorNsNext = 1u << 30;
constexpr uint32_t kBitExt = 1u << 31;

constexpr uint8_t kFlagFcsAtEnd = 0x10;

size_t align_up(size_t pos, size_t align) { return (pos + align - 1) & ~(align - 1); }

} // namespace

RadiotapResult parse_radiotap(ByteView packet) {
    ByteReader header(packet, ErrorCode::TruncatedHeader);
    header.require(8);
    uint8_t version = header.u8();
    if (version != 0)
        raise(ErrorCode::UnsupportedVersion, "radiotap version " + std::to_string(version));
    header.skip(1); // pad
    uint16_t declared_len = header.u16le();
    if (declared_len < 8) raise(ErrorCode::TruncatedHeader, "declared length below fixed preamble");
    if (declared_len > packet.size())
        raise(ErrorCode::TruncatedHeader, "declared length " + std::to_string(declared_len) +
                                              " exceeds buffer of " + std::to_string(packet.size()));

    // The parsed region is exactly the declared header; fields never read
    // past it even if the packet continues.
    ByteReader rt(packet.subspan(0, declared_len), ErrorCode::TruncatedHeader);
    rt.seek(4);

    std::vector<uint32_t> present_words;
    present_words.push_back(rt.u32le());
    while (present_words.back() & kBitExt)
        present_words.push_back(rt.u32le());

    RadiotapResult out;
    out.payload_offset = declared_len;
    bool have_signal = false;

    size_t pos = rt.offset(); // start of the field data area
    bool vendor_next = false;
    int field_base = 0;
    for (size_t w = 0; w < present_words.size(); ++w) {
        uint32_t word = present_words[w];
        if (vendor_next) {
            // A vendor namespace word: its fields are opaque; the mandatory
            // vendor header carries the length of the data to skip.
            pos = align_up(pos, 2);
            if (pos + 6 > declared_len) raise(ErrorCode::TruncatedHeader, "vendor namespace header");
            uint16_t skip = uint16_t(packet[pos + 4]) | uint16_t(packet[pos + 5]) << 8;
            pos += 6;
            if (pos + skip > declared_len) raise(ErrorCode::TruncatedHeader, "vendor namespace data");
            pos += skip;
        } else {
            for (int bit = 0; bit < 29; ++bit) {
                if (!(word & (1u << bit))) continue;
                int field = field_base + bit;
                if (field > kMaxKnownField) {
                    // Size unknown from here on; the declared length still
                    // delimits the payload.
                    return out;
                }
                FieldLayout layout = kLayout[field];
                pos = align_up(pos, layout.align);
                if (pos + layout.size > declared_len)
                    raise(ErrorCode::TruncatedHeader, "field " + std::to_string(field) +
                                                          " overruns declared length");
                const uint8_t* p = packet.data() + pos;
                switch (field) {
                case kTsft:
                    out.meta.timestamp_us = 0;
                    for (int i = 7; i >= 0; --i)
                        out.meta.timestamp_us = out.meta.timestamp_us << 8 | p[i];
                    break;
                case kFlags:
                    out.meta.fcs_at_end = (p[0] & kFlagFcsAtEnd) != 0;
                    break;
                case kRate:
                    out.meta.data_rate_kbps = unsigned(p[0]) * 500u;
                    break;
                case kChannel:
                    out.meta.channel_freq_mhz = unsigned(p[0]) | unsigned(p[1]) << 8;
                    break;
                case kDbmAntSignal:
                    // Multiple antenna-signal fields may appear (one per
                    // antenna); the first one is the value we keep.
                    if (!have_signal) {
                        out.meta.rssi_dbm = int(int8_t(p[0]));
                        have_signal = true;
                    }
                    break;
                default:
                    break; // skipped by size
                }
                pos += layout.size;
            }
        }
        vendor_next = (word & kBitVendorNsNext) != 0;
        if (word & kBitRadiotapNsNext) field_base = 0;
        else if (!vendor_next) field_base += 32;
    }
    return out;
}

Bytes build_radiotap(const RadiotapMeta& meta) {
    ByteWriter w;
    w.u8(0); // version
    w.u8(0); // pad
    size_t len_at = w.size();
    w.u16le(0); // patched below
    uint32_t present = 1u << kTsft | 1u << kFlags;
    if (meta.data_rate_kbps) present |= 1u << kRate;
    if (meta.channel_freq_mhz) present |= 1u << kChannel;
    if (meta.rssi_dbm) present |= 1u << kDbmAntSignal;
    w.u32le(present);
    w.u64le(meta.timestamp_us); // TSFT, already 8-aligned at offset 8
    w.u8(meta.fcs_at_end ? kFlagFcsAtEnd : 0);
    if (meta.data_rate_kbps) w.u8(uint8_t(*meta.data_rate_kbps / 500u));
    if (meta.channel_freq_mhz) {
        if (w.size() % 2) w.u8(0);
        w.u16le(uint16_t(*meta.channel_freq_mhz));
        w.u16le(0x0080); // 2 GHz spectrum flag
    }
    if (meta.rssi_dbm) w.u8(uint8_t(int8_t(*meta.rssi_dbm)));
    w.patch_u16le(len_at, uint16_t(w.size()));
    return std::move(w.buffer());
}

} // namespace homescope
