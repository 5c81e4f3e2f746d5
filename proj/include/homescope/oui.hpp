#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "homescope/mac_address.hpp"

namespace homescope {

/// Vendor registry keyed by the 3-octet OUI prefix, built from the IEEE
/// registry text format ("D8-F1-5B   (hex)\t\tEspressif Inc.").
class OuiDatabase {
public:
    /// Lines without the "(hex)" marker are ignored; malformed "(hex)" lines
    /// are skipped and counted. Later duplicates overwrite earlier entries.
    static OuiDatabase parse(const std::string& text);
    static OuiDatabase load(const std::string& path);

    std::optional<std::string> lookup(const MacAddress& mac) const;
    std::optional<std::string> lookup_oui(const std::array<uint8_t, 3>& oui) const;

    size_t size() const { return vendors_.size(); }
    size_t skipped_lines() const { return skipped_; }

    void insert(const std::array<uint8_t, 3>& oui, std::string vendor);

private:
    std::map<std::array<uint8_t, 3>, std::string> vendors_;
    size_t skipped_ = 0;
};

struct VendorLookup {
    std::optional<std::string> vendor;
    bool randomized = false; // locally-administered mac, OUI meaningless
};

/// Locally-administered macs return no vendor and randomized=true; otherwise
/// a plain registry lookup on the OUI.
VendorLookup lookup_vendor(const OuiDatabase& db, const MacAddress& mac);

} // namespace homescope
