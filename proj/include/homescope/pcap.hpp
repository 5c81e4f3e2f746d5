#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "homescope/bytes.hpp"
#include "homescope/frame.hpp"

namespace homescope {

constexpr uint32_t kLinkTypeRadiotap = 127;

struct PcapPacket {
    int64_t ts_us = 0;
    Bytes data; // captured bytes, possibly shorter than orig_len
    uint32_t orig_len = 0;
};

/// Incremental reader for classic pcap files, link type 127 (radiotap).
/// Construction validates the global header; next() yields packets in file
/// order and throws TruncatedCapture on a partial record, after all complete
/// records have been handed out.
class PcapReader {
public:
    /// Throws FormatError on bad magic, UnsupportedLinkType on a link type
    /// other than radiotap.
    explicit PcapReader(ByteView file);

    uint32_t link_type() const { return link_type_; }

    std::optional<PcapPacket> next();

private:
    uint32_t read_u32(size_t at) const;
    uint16_t read_u16(size_t at) const;

    ByteView file_;
    size_t pos_ = 0;
    uint32_t link_type_ = 0;
    bool swapped_ = false;    // file endianness differs from host order assumptions
    bool nanosecond_ = false; // 0xa1b23c4d magic: fractional part is nanoseconds
};

struct PcapContents {
    uint32_t link_type = 0;
    std::vector<PcapPacket> packets;
    bool truncated = false; // file ended inside a record; packets before it are kept
};

/// Reads a whole capture at once; truncation is reported via the flag so the
/// complete records are still available.
PcapContents read_pcap(ByteView file);
PcapContents read_pcap_file(const std::string& path);

/// Writes a classic pcap (microsecond magic, link type 127).
class PcapWriter {
public:
    PcapWriter();
    void add(int64_t ts_us, ByteView packet);
    const Bytes& bytes() const { return out_.buffer(); }
    void save(const std::string& path) const;

private:
    ByteWriter out_;
};

/// Decodes one radiotap-framed packet into a FrameRecord. `capture_ts_us`
/// (the pcap record timestamp) becomes the record's time base, replacing the
/// device-relative TSFT. Returns nullopt for frames the pipeline does not
/// model (control/extension frames, frames with a nonzero protocol version,
/// bodies shorter than a MAC header).
std::optional<FrameRecord> decode_frame(const std::string& sniffer_id, int64_t capture_ts_us,
                                        ByteView packet);

/// Inverse of decode_frame for simulator output: radiotap header + 802.11
/// header + synthetic body of the declared length. Management frames with an
/// SSID get a minimal tagged-parameter block.
Bytes encode_frame(const FrameRecord& record);

} // namespace homescope
