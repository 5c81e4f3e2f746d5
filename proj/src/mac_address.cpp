#include "homescope/mac_address.hpp"

#include <cstdio>

namespace homescope {

namespace {

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

} // namespace

std::optional<MacAddress> MacAddress::parse(const std::string& text) {
    if (text.size() != 17) return std::nullopt;
    std::array<uint8_t, 6> octets{};
    for (int i = 0; i < 6; ++i) {
        int hi = hex_value(text[size_t(i * 3)]);
        int lo = hex_value(text[size_t(i * 3 + 1)]);
        if (hi < 0 || lo < 0) return std::nullopt;
        if (i < 5 && text[size_t(i * 3 + 2)] != ':') return std::nullopt;
        octets[size_t(i)] = uint8_t(hi << 4 | lo);
    }
    return MacAddress(octets);
}

std::string MacAddress::to_string() const {
    char buf[18];
    std::snprintf(buf, sizeof(buf), "%02x:%02x:%02x:%02x:%02x:%02x", octets_[0], octets_[1],
                  octets_[2], octets_[3], octets_[4], octets_[5]);
    return buf;
}

} // namespace homescope
