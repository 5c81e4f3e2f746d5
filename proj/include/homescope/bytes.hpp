#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "homescope/error.hpp"

namespace homescope {

using Bytes = std::vector<uint8_t>;
using ByteView = std::span<const uint8_t>;

/// Bounds-checked little-endian cursor over a byte buffer. Every read either
/// returns a value or throws the given error code; it never walks past end().
class ByteReader {
public:
    ByteReader(ByteView data, ErrorCode on_underflow)
        : data_(data), on_underflow_(on_underflow) {}

    size_t offset() const { return pos_; }
    size_t remaining() const { return data_.size() - pos_; }
    bool exhausted() const { return pos_ >= data_.size(); }

    void require(size_t n) const {
        if (remaining() < n) raise(on_underflow_, "need " + std::to_string(n) + " bytes, have " + std::to_string(remaining()));
    }

    void seek(size_t pos) {
        if (pos > data_.size()) raise(on_underflow_, "seek past end");
        pos_ = pos;
    }

    void skip(size_t n) {
        require(n);
        pos_ += n;
    }

    uint8_t u8() {
        require(1);
        return data_[pos_++];
    }

    uint16_t u16le() {
        require(2);
        uint16_t v = uint16_t(data_[pos_]) | uint16_t(data_[pos_ + 1]) << 8;
        pos_ += 2;
        return v;
    }

    uint32_t u32le() {
        require(4);
        uint32_t v = uint32_t(data_[pos_]) | uint32_t(data_[pos_ + 1]) << 8 |
                     uint32_t(data_[pos_ + 2]) << 16 | uint32_t(data_[pos_ + 3]) << 24;
        pos_ += 4;
        return v;
    }

    uint32_t u32be() {
        require(4);
        uint32_t v = uint32_t(data_[pos_]) << 24 | uint32_t(data_[pos_ + 1]) << 16 |
                     uint32_t(data_[pos_ + 2]) << 8 | uint32_t(data_[pos_ + 3]);
        pos_ += 4;
        return v;
    }

    uint64_t u64le() {
        require(8);
        uint64_t v = 0;
        for (int i = 7; i >= 0; --i) v = v << 8 | data_[pos_ + size_t(i)];
        pos_ += 8;
        return v;
    }

    int8_t s8() { return int8_t(u8()); }

    ByteView bytes(size_t n) {
        require(n);
        ByteView v = data_.subspan(pos_, n);
        pos_ += n;
        return v;
    }

private:
    ByteView data_;
    size_t pos_ = 0;
    ErrorCode on_underflow_;
};

/// Little-endian append-only buffer, counterpart of ByteReader.
class ByteWriter {
public:
    Bytes& buffer() { return buf_; }
    const Bytes& buffer() const { return buf_; }
    size_t size() const { return buf_.size(); }

    void u8(uint8_t v) { buf_.push_back(v); }
    void u16le(uint16_t v) {
        buf_.push_back(uint8_t(v));
        buf_.push_back(uint8_t(v >> 8));
    }
    void u32le(uint32_t v) {
        u16le(uint16_t(v));
        u16le(uint16_t(v >> 16));
    }
    void u64le(uint64_t v) {
        u32le(uint32_t(v));
        u32le(uint32_t(v >> 32));
    }
    void raw(ByteView v) { buf_.insert(buf_.end(), v.begin(), v.end()); }
    void zeros(size_t n) { buf_.insert(buf_.end(), n, 0); }

    void patch_u16le(size_t at, uint16_t v) {
        buf_[at] = uint8_t(v);
        buf_[at + 1] = uint8_t(v >> 8);
    }

private:
    Bytes buf_;
};

std::string to_hex(ByteView data);
Bytes from_hex(const std::string& hex); // throws ParseError on odd length / bad digit

/// Lossy UTF-8 view: invalid sequences become U+FFFD. SSIDs and BLE names are
/// raw bytes on the wire and not guaranteed to be valid text.
std::string utf8_lossy(ByteView data);

} // namespace homescope
