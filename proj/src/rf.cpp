// SPDX-FileCopyrightText: Copyright (c) 2026 The helps-sim Authors
// SPDX-License-Identifier: Apache-2.0

#include "helps/rf.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "helps/rng.hpp"

namespace helps {

double free_space_loss_db(double distance_m, double carrier_hz) {
    return 20.0 * std::log10(4.0 * kPi * distance_m * carrier_hz / kSpeedOfLight);
}

double path_loss_db(const Pose& tx, const Pose& rx, const RfParams& params, const Scenario& scenario) {
    const double d = std::sqrt((tx.x - rx.x) * (tx.x - rx.x) + (tx.y - rx.y) * (tx.y - rx.y) +
                               (tx.z - rx.z) * (tx.z - rx.z));
    if (d < 1e-9) throw std::invalid_argument("path_loss_db: coincident poses");
    const bool indoor = tx.building_index && rx.building_index && *tx.building_index == *rx.building_index;
    const double n = indoor ? params.path_loss_exponent_indoor : params.path_loss_exponent_outdoor;
    const double d_ref = params.reference_distance_m;
    const double d_eff = std::max(d, d_ref);
    const ObstructionCount walls = walls_between(rx, tx, scenario);
    return free_space_loss_db(d_ref, params.uplink_carrier_hz) + 10.0 * n * std::log10(d_eff / d_ref) +
           params.exterior_wall_loss_db * walls.exterior_walls + params.interior_wall_loss_db * walls.interior_walls +
           params.floor_loss_db * walls.floors_crossed;
}

double antenna_gain_db(const AntennaPattern& pattern, double bearing_error_rad) {
    if (pattern.kind == AntennaKind::omni) return pattern.gain_db;
    const double e = wrap_angle(bearing_error_rad) * 180.0 / kPi;
    const double x = e / pattern.hpbw_deg;
    // -3 dB at e = +-hpbw/2
    const double main_lobe = pattern.gain_db - 12.0 * x * x;
    return std::max(main_lobe, pattern.gain_db - pattern.front_to_back_db);
}

SumOfSinusoids::SumOfSinusoids(double sigma_db, double decorrelation_m, int components, std::uint64_t seed)
    : sigma_(sigma_db) {
    if (sigma_db <= 0.0 || components <= 0) return;
    amplitude_ = sigma_db * std::sqrt(2.0 / components);
    Rng rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    components_.reserve(static_cast<std::size_t>(components));
    for (int i = 0; i < components; ++i) {
        // Inverse CDF of the radial spectrum of exp(-r/L): F(k) = 1 - (1 + k^2 L^2)^(-1/2)
        const double u = unit(rng);
        const double one_minus = std::max(1.0 - u, 1e-12);
        const double k = std::sqrt(1.0 / (one_minus * one_minus) - 1.0) / decorrelation_m;
        const double dir = kTwoPi * unit(rng);
        const double phase = kTwoPi * unit(rng);
        components_.push_back({k * std::cos(dir), k * std::sin(dir), phase});
    }
}

double SumOfSinusoids::at(Vec2 p) const {
    double sum = 0.0;
    for (const Component& c : components_) sum += std::cos(c.kx * p.x + c.ky * p.y + c.phase);
    return amplitude_ * sum;
}

ShadowingField::ShadowingField(const Scenario& scenario, std::uint64_t seed) {
    const RfParams& rf = scenario.rf;
    regions_.emplace_back(rf.shadowing_sigma_outdoor_db, rf.decorrelation_distance_outdoor_m, rf.shadowing_components,
                          derive_seed(seed, "shadowing-outdoor"));
    for (std::size_t b = 0; b < scenario.buildings.size(); ++b) {
        building_offset_.push_back(regions_.size());
        for (int f = 0; f < scenario.buildings[b].floor_count; ++f) {
            regions_.emplace_back(rf.shadowing_sigma_indoor_db, rf.decorrelation_distance_indoor_m,
                                  rf.shadowing_components,
                                  derive_seed(seed, "shadowing-indoor", (static_cast<std::uint64_t>(b) << 16) | f));
        }
    }
}

std::size_t ShadowingField::index_of(ShadowingRegion region) const {
    if (region.building < 0) return 0;
    const auto b = static_cast<std::size_t>(region.building);
    if (b >= building_offset_.size()) throw std::out_of_range("shadowing region: unknown building");
    const std::size_t idx = building_offset_[b] + static_cast<std::size_t>(region.floor);
    const std::size_t end = b + 1 < building_offset_.size() ? building_offset_[b + 1] : regions_.size();
    if (region.floor < 0 || idx >= end) throw std::out_of_range("shadowing region: unknown floor");
    return idx;
}

double ShadowingField::at(ShadowingRegion region, Vec2 p) const {
    if (regions_.empty()) return 0.0;
    return regions_[index_of(region)].at(p);
}

double ShadowingField::at(const Pose& rx) const {
    ShadowingRegion region;
    if (rx.building_index) region = {*rx.building_index, rx.floor_index.value_or(0)};
    return at(region, rx.xy());
}

void ShadowingField::write_csv(std::ostream& out, ShadowingRegion region, const Rect& area, double cell_m) const {
    out << "x,y,shadowing_db\n";
    const int cols = static_cast<int>(std::ceil(area.width() / cell_m - 1e-9));
    const int rows = static_cast<int>(std::ceil(area.height() / cell_m - 1e-9));
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const Vec2 p{area.x0 + (c + 0.5) * cell_m, area.y0 + (r + 0.5) * cell_m};
            out << p.x << ',' << p.y << ',' << at(region, p) << '\n';
        }
    }
}

double received_power_dbm(double tx_power_dbm, const Pose& tx, const Pose& rx, const AntennaPattern& rx_pattern,
                          double rx_heading, const RfParams& params, const Scenario& scenario,
                          const ShadowingField* shadowing) {
    const double pl = path_loss_db(tx, rx, params, scenario);
    const double err = bearing(rx.xy(), tx.xy()) - rx_heading;
    const double gain = antenna_gain_db(rx_pattern, err);
    const double s = shadowing ? shadowing->at(rx) : 0.0;
    return tx_power_dbm - pl + gain + s;
}

}  // namespace helps
