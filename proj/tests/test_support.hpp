// SPDX-FileCopyrightText: Copyright (c) 2026 The helps-sim Authors
// SPDX-License-Identifier: Apache-2.0

// Shared fixtures and independent reference implementations used as test oracles.

#ifndef HELPS_TEST_SUPPORT_HPP
#define HELPS_TEST_SUPPORT_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "helps/lcs.hpp"
#include "helps/rf.hpp"

namespace helps::testing {

inline std::string source_path(const std::string& relative) { return std::string(HELPS_SOURCE_DIR) + "/" + relative; }

inline MeasurementReport omni_report(Vec2 p, double value_dbm, std::uint64_t seq = 0) {
    MeasurementReport r;
    r.sme_id = "sme-t";
    r.target_id = "target-0";
    r.seq = seq;
    r.pose = outdoor_pose(p);
    r.rssi = {value_dbm, 0.0, true};
    return r;
}

/// Noiseless outdoor report: 23 dBm through free space with the outdoor exponent.
inline MeasurementReport free_space_report(Vec2 p, Vec2 target, const RfParams& rf) {
    const double d = std::max(distance(p, target), rf.reference_distance_m);
    const double c = 299792458.0;
    const double fspl = 20.0 * std::log10(4.0 * 3.141592653589793 * rf.reference_distance_m * rf.uplink_carrier_hz / c);
    return omni_report(p, 23.0 - fspl - 10.0 * rf.path_loss_exponent_outdoor * std::log10(d / rf.reference_distance_m));
}

/// Direct IDW: sort every report by distance, no spatial index.
inline std::optional<double> naive_idw(const std::vector<MeasurementReport>& reports, Vec2 q, double cell) {
    struct Item {
        double d2;
        double x;
        double y;
        double v;
    };
    std::vector<Item> items;
    for (const auto& r : reports) {
        if (r.mode != MeasureMode::omni || !r.rssi.valid || r.pose.indoor()) continue;
        const double dx = r.pose.x - q.x;
        const double dy = r.pose.y - q.y;
        items.push_back({dx * dx + dy * dy, r.pose.x, r.pose.y, r.rssi.value_dbm});
    }
    if (items.empty()) return std::nullopt;
    std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
        if (a.d2 != b.d2) return a.d2 < b.d2;
        if (a.x != b.x) return a.x < b.x;
        if (a.y != b.y) return a.y < b.y;
        return a.v < b.v;
    });
    const double mask = 3.0 * cell * std::sqrt(8.0);
    if (std::sqrt(items[0].d2) > mask) return std::nullopt;
    if (std::sqrt(items[0].d2) <= cell / 4.0) return items[0].v;
    double ws = 0.0;
    double vs = 0.0;
    for (std::size_t i = 0; i < std::min<std::size_t>(8, items.size()); ++i) {
        ws += 1.0 / items[i].d2;
        vs += items[i].v / items[i].d2;
    }
    return vs / ws;
}

/// Exhaustive grid search of the profiled Gaussian likelihood. The offset is
/// solved explicitly per candidate rather than through running sums.
inline Vec2 brute_force_ml(const std::vector<MeasurementReport>& reports, const Rect& area, double step,
                           const RfParams& rf) {
    Vec2 best_p;
    double best = std::numeric_limits<double>::infinity();
    for (double y = area.y0 + step / 2; y < area.y1; y += step) {
        for (double x = area.x0 + step / 2; x < area.x1; x += step) {
            std::vector<double> g;
            double offset = 0.0;
            for (const auto& r : reports) {
                const double n = r.pose.indoor() ? rf.path_loss_exponent_indoor : rf.path_loss_exponent_outdoor;
                const double d = std::max(std::hypot(r.pose.x - x, r.pose.y - y), rf.reference_distance_m);
                g.push_back(10.0 * n * std::log10(d / rf.reference_distance_m));
                offset += r.rssi.value_dbm + g.back();
            }
            offset /= static_cast<double>(reports.size());
            double ssr = 0.0;
            for (std::size_t i = 0; i < reports.size(); ++i) {
                const double e = reports[i].rssi.value_dbm - (offset - g[i]);
                ssr += e * e;
            }
            if (ssr < best) {
                best = ssr;
                best_p = {x, y};
            }
        }
    }
    return best_p;
}

}  // namespace helps::testing

#endif  // HELPS_TEST_SUPPORT_HPP
