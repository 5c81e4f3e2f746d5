#include "homescope/localization.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "homescope/time_util.hpp"

namespace homescope {

std::optional<size_t> SnifferLayout::index_of(const std::string& id) const {
    for (size_t i = 0; i < sniffers.size(); ++i)
        if (sniffers[i].id == id) return i;
    return std::nullopt;
}

Vec2 SnifferLayout::centroid() const {
    Vec2 c{0, 0};
    for (const Sniffer& s : sniffers) c += s.position();
    return sniffers.empty() ? c : Vec2(c / double(sniffers.size()));
}

bool SnifferLayout::collinear(double min_area) const {
    // Non-collinear iff some triple spans a triangle of area above the floor.
    for (size_t i = 0; i < sniffers.size(); ++i)
        for (size_t j = i + 1; j < sniffers.size(); ++j)
            for (size_t k = j + 1; k < sniffers.size(); ++k) {
                Vec2 u = sniffers[j].position() - sniffers[i].position();
                Vec2 v = sniffers[k].position() - sniffers[i].position();
                double area = std::abs(u.x() * v.y() - u.y() * v.x()) / 2.0;
                if (area > min_area) return false;
            }
    return true;
}

SnifferLayout SnifferLayout::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorCode::IoError, "cannot open " + path);
    SnifferLayout layout;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream row(line);
        std::string id, xs, ys;
        if (!std::getline(row, id, '\t') || !std::getline(row, xs, '\t') || !std::getline(row, ys))
            raise(ErrorCode::ParseError, "layout line " + std::to_string(line_no));
        try {
            layout.sniffers.push_back({id, std::stod(xs), std::stod(ys)});
        } catch (...) {
            raise(ErrorCode::ParseError, "layout line " + std::to_string(line_no));
        }
    }
    return layout;
}

void SnifferLayout::save(const std::string& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) raise(ErrorCode::IoError, "cannot write " + path);
    char buf[64];
    for (const Sniffer& s : sniffers) {
        std::snprintf(buf, sizeof(buf), "\t%.17g\t%.17g\n", s.x, s.y);
        out << s.id << buf;
    }
}

double rssi_to_distance(double rssi_dbm, const PathLossParams& params) {
    return std::pow(10.0, (params.p0_dbm - rssi_dbm) / (10.0 * params.n));
}

size_t RssiFingerprint::present_count() const {
    size_t n = 0;
    for (const auto& v : values) n += v.has_value();
    return n;
}

std::map<MacAddress, std::vector<RssiFingerprint>> build_fingerprints(
    const std::vector<FrameRecord>& frames, const SnifferLayout& layout, int window_s) {
    if (window_s < 1) raise(ErrorCode::InvalidParameter, "window_s must be >= 1");
    int64_t window_us = int64_t(window_s) * kMicrosPerSecond;

    // device -> window start -> per-sniffer sample list
    std::map<MacAddress, std::map<int64_t, std::vector<std::vector<double>>>> samples;
    for (const FrameRecord& f : frames) {
        if (!f.meta.rssi_dbm) continue;
        auto idx = layout.index_of(f.sniffer_id);
        if (!idx) continue;
        MacAddress station = f.direction == Direction::Downlink ? f.addrs.da : f.addrs.sa;
        if (station.is_broadcast()) station = f.addrs.sa;
        int64_t ws = f.ts_us() / window_us * window_us;
        auto& per_sniffer = samples[station][ws];
        if (per_sniffer.empty()) per_sniffer.resize(layout.size());
        per_sniffer[*idx].push_back(double(*f.meta.rssi_dbm));
    }

    std::map<MacAddress, std::vector<RssiFingerprint>> out;
    for (auto& [mac, windows] : samples) {
        auto& list = out[mac];
        for (auto& [ws, per_sniffer] : windows) {
            RssiFingerprint fp;
            fp.device = mac;
            fp.window_start_us = ws;
            fp.values.resize(layout.size());
            fp.support.resize(layout.size(), 0);
            for (size_t i = 0; i < layout.size(); ++i) {
                auto& v = per_sniffer[i];
                fp.support[i] = int(v.size());
                if (v.empty()) continue;
                std::sort(v.begin(), v.end());
                size_t n = v.size();
                fp.values[i] = n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
            }
            list.push_back(std::move(fp));
        }
    }
    return out;
}

PositionEstimate trilaterate(const RssiFingerprint& fingerprint, const SnifferLayout& layout,
                             const PathLossParams& params) {
    std::vector<size_t> present;
    for (size_t i = 0; i < fingerprint.values.size() && i < layout.size(); ++i)
        if (fingerprint.values[i]) present.push_back(i);

    PositionEstimate est;
    if (present.size() < 3) return est; // not usable

    if (layout.collinear()) raise(ErrorCode::DegenerateLayout, "sniffers are collinear");

    std::vector<double> dist(present.size());
    for (size_t k = 0; k < present.size(); ++k)
        dist[k] = rssi_to_distance(*fingerprint.values[present[k]], params);

    Vec2 s0 = layout.sniffers[present[0]].position();
    Eigen::MatrixXd a(present.size() - 1, 2);
    Eigen::VectorXd b(present.size() - 1);
    for (size_t k = 1; k < present.size(); ++k) {
        Vec2 si = layout.sniffers[present[k]].position();
        a.row(long(k - 1)) = 2.0 * (si - s0).transpose();
        b(long(k - 1)) = dist[0] * dist[0] - dist[k] * dist[k] + si.squaredNorm() - s0.squaredNorm();
    }
    Vec2 p = a.colPivHouseholderQr().solve(b);

    est.x = p.x();
    est.y = p.y();
    est.usable = true;

    double sq = 0;
    for (size_t k = 0; k < present.size(); ++k) {
        double range = (p - layout.sniffers[present[k]].position()).norm();
        double miss = range - dist[k];
        sq += miss * miss;
    }
    est.residual = std::sqrt(sq / double(present.size()));

    Vec2 away = p - layout.centroid();
    if (away.norm() > 1e-12) est.direction = away.normalized();
    return est;
}

Vec2 direction_vector(const PositionEstimate& estimate, const SnifferLayout& layout) {
    if (!estimate.usable) raise(ErrorCode::UndefinedDirection, "estimate not usable");
    Vec2 away = estimate.position() - layout.centroid();
    if (away.norm() <= 1e-12)
        raise(ErrorCode::UndefinedDirection, "estimate coincides with the layout centroid");
    return away.normalized();
}

namespace {

double quantile(std::vector<double>& sorted_values, double q) {
    // Linear interpolation between order statistics (R type 7).
    size_t n = sorted_values.size();
    if (n == 1) return sorted_values[0];
    double pos = q * double(n - 1);
    size_t lo = size_t(pos);
    double frac = pos - double(lo);
    if (lo + 1 >= n) return sorted_values[n - 1];
    return sorted_values[lo] * (1 - frac) + sorted_values[lo + 1] * frac;
}

} // namespace

Locomotion classify_stationarity(const std::vector<RssiFingerprint>& fingerprints,
                                 const SnifferLayout& layout, const StationarityConfig& config) {
    size_t usable = 0;
    for (const RssiFingerprint& fp : fingerprints) usable += fp.usable();
    if (usable < config.min_fingerprints)
        raise(ErrorCode::InsufficientData, "need " + std::to_string(config.min_fingerprints) +
                                               " usable fingerprints, have " + std::to_string(usable));

    double max_iqr = 0;
    for (size_t i = 0; i < layout.size(); ++i) {
        std::vector<double> vals;
        for (const RssiFingerprint& fp : fingerprints)
            if (i < fp.values.size() && fp.values[i]) vals.push_back(*fp.values[i]);
        if (vals.size() < 2) continue;
        std::sort(vals.begin(), vals.end());
        double iqr = quantile(vals, 0.75) - quantile(vals, 0.25);
        max_iqr = std::max(max_iqr, iqr);
    }
    return max_iqr <= config.iqr_threshold_db ? Locomotion::Stationary : Locomotion::Mobile;
}

ZoneModel learn_reference_points(
    const std::vector<std::pair<std::string, std::vector<RssiFingerprint>>>& labeled_sets) {
    ZoneModel model;
    for (const auto& [label, fingerprints] : labeled_sets) {
        for (const auto& ref : model.references)
            if (ref.label == label) raise(ErrorCode::DuplicateLabel, label);

        std::vector<const RssiFingerprint*> usable;
        size_t width = 0;
        for (const RssiFingerprint& fp : fingerprints) {
            if (!fp.usable()) continue;
            usable.push_back(&fp);
            width = std::max(width, fp.values.size());
        }
        if (usable.size() < 10)
            raise(ErrorCode::InsufficientData, "label " + label + " has " +
                                                   std::to_string(usable.size()) +
                                                   " usable fingerprints, need 10");
        ZoneModel::Reference ref;
        ref.label = label;
        ref.values.resize(width);
        for (size_t i = 0; i < width; ++i) {
            std::vector<double> vals;
            for (const RssiFingerprint* fp : usable)
                if (i < fp->values.size() && fp->values[i]) vals.push_back(*fp->values[i]);
            if (vals.empty()) continue;
            std::sort(vals.begin(), vals.end());
            size_t n = vals.size();
            ref.values[i] = n % 2 ? vals[n / 2] : (vals[n / 2 - 1] + vals[n / 2]) / 2.0;
        }
        model.references.push_back(std::move(ref));
    }
    return model;
}

std::optional<double> fingerprint_distance_db(const std::vector<std::optional<double>>& a,
                                              const std::vector<std::optional<double>>& b) {
    size_t m = 0;
    double sq = 0;
    size_t width = std::min(a.size(), b.size());
    for (size_t i = 0; i < width; ++i) {
        if (!a[i] || !b[i]) continue;
        double d = *a[i] - *b[i];
        sq += d * d;
        ++m;
    }
    if (m < 2) return std::nullopt;
    return std::sqrt(sq / double(m)); // count-normalized, stays in dB
}

ZoneMatch match_zone(const ZoneModel& model, const RssiFingerprint& fingerprint) {
    std::optional<ZoneMatch> best;
    for (const ZoneModel::Reference& ref : model.references) {
        auto d = fingerprint_distance_db(ref.values, fingerprint.values);
        if (!d) continue;
        if (!best || *d < best->distance_db ||
            (*d == best->distance_db && ref.label < best->label))
            best = ZoneMatch{ref.label, *d};
    }
    if (!best)
        raise(ErrorCode::NoComparableReference, "no reference shares two sniffers with the query");
    return *best;
}

ZoneModel ZoneModel::load(const std::string& path, size_t sniffer_count) {
    std::ifstream in(path);
    if (!in) raise(ErrorCode::IoError, "cannot open " + path);
    ZoneModel model;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream row(line);
        Reference ref;
        if (!std::getline(row, ref.label, '\t'))
            raise(ErrorCode::ParseError, "zone line " + std::to_string(line_no));
        std::string cell;
        while (std::getline(row, cell, '\t')) {
            if (cell == "-") {
                ref.values.push_back(std::nullopt);
                continue;
            }
            try {
                ref.values.push_back(std::stod(cell));
            } catch (...) {
                raise(ErrorCode::ParseError, "zone line " + std::to_string(line_no));
            }
        }
        if (ref.values.size() != sniffer_count)
            raise(ErrorCode::ParseError, "zone line " + std::to_string(line_no) +
                                             ": expected " + std::to_string(sniffer_count) +
                                             " reference values");
        model.references.push_back(std::move(ref));
    }
    return model;
}

void ZoneModel::save(const std::string& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) raise(ErrorCode::IoError, "cannot write " + path);
    char buf[40];
    for (const Reference& ref : references) {
        out << ref.label;
        for (const auto& v : ref.values) {
            if (v) {
                std::snprintf(buf, sizeof(buf), "%.17g", *v); // bit-exact reload
                out << '\t' << buf;
            } else {
                out << "\t-";
            }
        }
        out << '\n';
    }
}

} // namespace homescope
