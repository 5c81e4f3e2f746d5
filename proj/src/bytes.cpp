#include "homescope/bytes.hpp"

namespace homescope {

namespace {

int hex_digit(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

} // namespace

std::string to_hex(ByteView data) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(data.size() * 2);
    for (uint8_t b : data) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0xf]);
    }
    return out;
}

Bytes from_hex(const std::string& hex) {
    if (hex.size() % 2 != 0) raise(ErrorCode::ParseError, "odd hex length");
    Bytes out;
    out.reserve(hex.size() / 2);
    for (size_t i = 0; i < hex.size(); i += 2) {
        int hi = hex_digit(hex[i]);
        int lo = hex_digit(hex[i + 1]);
        if (hi < 0 || lo < 0) raise(ErrorCode::ParseError, "bad hex digit");
        out.push_back(uint8_t(hi << 4 | lo));
    }
    return out;
}

std::string utf8_lossy(ByteView data) {
    static const char* replacement = "\xef\xbf\xbd"; // U+FFFD
    std::string out;
    out.reserve(data.size());
    size_t i = 0;
    while (i < data.size()) {
        uint8_t b = data[i];
        size_t len;
        uint32_t min_cp;
        if (b < 0x80) {
            out.push_back(char(b));
            ++i;
            continue;
        } else if ((b & 0xe0) == 0xc0) {
            len = 2;
            min_cp = 0x80;
        } else if ((b & 0xf0) == 0xe0) {
            len = 3;
            min_cp = 0x800;
        } else if ((b & 0xf8) == 0xf0) {
            len = 4;
            min_cp = 0x10000;
        } else {
            out += replacement;
            ++i;
            continue;
        }
        if (i + len > data.size()) {
            out += replacement;
            ++i;
            continue;
        }
        uint32_t cp = b & (0x7f >> len);
        bool ok = true;
        for (size_t k = 1; k < len; ++k) {
            uint8_t c = data[i + k];
            if ((c & 0xc0) != 0x80) {
                ok = false;
                break;
            }
            cp = cp << 6 | (c & 0x3f);
        }
        if (!ok || cp < min_cp || cp > 0x10ffff || (cp >= 0xd800 && cp <= 0xdfff)) {
            out += replacement;
            ++i;
            continue;
        }
        out.append(reinterpret_cast<const char*>(data.data() + i), len);
        i += len;
    }
    return out;
}

} // namespace homescope
