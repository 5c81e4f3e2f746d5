#include "homescope/oui.hpp"

#include <fstream>
#include <sstream>

#include "homescope/error.hpp"

namespace homescope {

namespace {

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

} // namespace

OuiDatabase OuiDatabase::parse(const std::string& text) {
    OuiDatabase db;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        size_t marker = line.find("(hex)");
        if (marker == std::string::npos) continue;
        // Expect "XX-XX-XX" as the first token before the marker.
        std::string prefix = trim(line.substr(0, marker));
        std::string vendor = trim(line.substr(marker + 5));
        std::array<uint8_t, 3> oui{};
        bool ok = prefix.size() == 8 && prefix[2] == '-' && prefix[5] == '-';
        if (ok) {
            for (int i = 0; i < 3 && ok; ++i) {
                int hi = hex_value(prefix[size_t(i * 3)]);
                int lo = hex_value(prefix[size_t(i * 3 + 1)]);
                ok = hi >= 0 && lo >= 0;
                oui[size_t(i)] = uint8_t(hi << 4 | lo);
            }
        }
        if (!ok || vendor.empty()) {
            ++db.skipped_;
            continue;
        }
        db.vendors_[oui] = vendor;
    }
    return db;
}

OuiDatabase OuiDatabase::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorCode::IoError, "cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

std::optional<std::string> OuiDatabase::lookup(const MacAddress& mac) const {
    return lookup_oui(mac.oui());
}

std::optional<std::string> OuiDatabase::lookup_oui(const std::array<uint8_t, 3>& oui) const {
    auto it = vendors_.find(oui);
    if (it == vendors_.end()) return std::nullopt;
    return it->second;
}

void OuiDatabase::insert(const std::array<uint8_t, 3>& oui, std::string vendor) {
    vendors_[oui] = std::move(vendor);
}

VendorLookup lookup_vendor(const OuiDatabase& db, const MacAddress& mac) {
    if (mac.is_locally_administered()) return {std::nullopt, true};
    return {db.lookup(mac), false};
}

} // namespace homescope
