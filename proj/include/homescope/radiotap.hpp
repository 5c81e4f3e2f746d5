#pragma once

#include <cstdint>

#include "homescope/bytes.hpp"
#include "homescope/frame.hpp"

namespace homescope {

struct RadiotapResult {
    RadiotapMeta meta;
    size_t payload_offset = 0; // declared header length
};

/// Decodes the radiotap capture header in front of an 802.11 frame.
///
/// Honors the chained present-flag words (bit 31 = another word follows,
/// bit 29 = field numbering restarts, bit 30 = vendor namespace whose data
/// is skipped via its declared length). Fields are aligned to their natural
/// boundary relative to the start of the header. Of the decoded fields only
/// TSFT, Flags, Rate, Channel and the FIRST antenna-signal value reach
/// RadiotapMeta; everything else is skipped by size. Iteration stops at the
/// first field of unknown size, the declared length still wins.
///
/// Throws TruncatedHeader when the declared length exceeds the buffer and
/// UnsupportedVersion on a nonzero version byte.
RadiotapResult parse_radiotap(ByteView packet);

/// Counterpart used by the simulator's pcap writer: emits a minimal header
/// carrying TSFT, Flags (0), Rate?, Channel? and antenna signal?.
Bytes build_radiotap(const RadiotapMeta& meta);

} // namespace homescope
