#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>

namespace homescope {

/// 48-bit 802.11 / BLE hardware address. Canonical text form is lowercase
/// colon-separated hex ("d8:f1:5b:00:00:01").
class MacAddress {
public:
    MacAddress() = default;
    explicit MacAddress(const std::array<uint8_t, 6>& octets) : octets_(octets) {}

    static MacAddress broadcast() { return MacAddress({0xff, 0xff, 0xff, 0xff, 0xff, 0xff}); }

    /// Accepts "aa:bb:cc:dd:ee:ff" (any hex case); nullopt on anything else.
    static std::optional<MacAddress> parse(const std::string& text);

    const std::array<uint8_t, 6>& octets() const { return octets_; }
    std::array<uint8_t, 3> oui() const { return {octets_[0], octets_[1], octets_[2]}; }

    bool is_broadcast() const {
        for (uint8_t b : octets_)
            if (b != 0xff) return false;
        return true;
    }

    /// Locally-administered bit: macs set by software (randomization) rather
    /// than burned in by a vendor; such addresses carry no OUI meaning.
    bool is_locally_administered() const { return (octets_[0] & 0x02) != 0; }

    std::string to_string() const;

    auto operator<=>(const MacAddress&) const = default;

private:
    std::array<uint8_t, 6> octets_{};
};

} // namespace homescope
