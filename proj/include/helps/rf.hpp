// SPDX-FileCopyrightText: Copyright (c) 2026 The helps-sim Authors
// SPDX-License-Identifier: Apache-2.0

// Radio channel: log-distance path loss with wall and slab attenuation,
// antenna patterns and a spatially correlated log-normal shadowing field.

#ifndef HELPS_RF_HPP
#define HELPS_RF_HPP

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "helps/params.hpp"
#include "helps/world.hpp"

namespace helps {

inline constexpr double kSpeedOfLight = 299792458.0;

/// Free-space path loss 20*log10(4*pi*d*f/c) in dB.
double free_space_loss_db(double distance_m, double carrier_hz);

/// Total path loss between two poses. Throws std::invalid_argument when the
/// poses coincide.
double path_loss_db(const Pose& tx, const Pose& rx, const RfParams& params, const Scenario& scenario);

/// Pattern gain for a bearing error in radians (wrapped to [-pi, pi)).
double antenna_gain_db(const AntennaPattern& pattern, double bearing_error_rad);

/// Gaussian random field with exponential autocorrelation exp(-d/L), realized
/// as a sum of sinusoids whose spatial frequencies follow the field's spectrum.
class SumOfSinusoids {
public:
    SumOfSinusoids() = default;
    SumOfSinusoids(double sigma_db, double decorrelation_m, int components, std::uint64_t seed);

    double at(Vec2 p) const;
    double sigma_db() const { return sigma_; }

private:
    struct Component {
        double kx;
        double ky;
        double phase;
    };
    double sigma_ = 0.0;
    double amplitude_ = 0.0;
    std::vector<Component> components_;
};

/// Identifies one shadowing region: outdoor, or one floor of one building.
struct ShadowingRegion {
    int building = -1;
    int floor = 0;

    friend bool operator==(const ShadowingRegion&, const ShadowingRegion&) = default;
};

/// Per-region shadowing for one scenario and seed. Immutable after construction.
class ShadowingField {
public:
    ShadowingField() = default;
    ShadowingField(const Scenario& scenario, std::uint64_t seed);

    /// Shadowing at a receiver pose, evaluated in the receiver's region.
    double at(const Pose& rx) const;
    double at(ShadowingRegion region, Vec2 p) const;

    /// Writes "x,y,shadowing_db" rows for cell centers of the given grid.
    void write_csv(std::ostream& out, ShadowingRegion region, const Rect& area, double cell_m) const;

private:
    std::size_t index_of(ShadowingRegion region) const;

    std::vector<std::size_t> building_offset_;
    std::vector<SumOfSinusoids> regions_;
};

/// P_rx = tx_power - PL + G(pattern, bearing error) + S(rx).
/// A null shadowing pointer means no shadowing.
double received_power_dbm(double tx_power_dbm, const Pose& tx, const Pose& rx, const AntennaPattern& rx_pattern,
                          double rx_heading, const RfParams& params, const Scenario& scenario,
                          const ShadowingField* shadowing);

}  // namespace helps

#endif  // HELPS_RF_HPP
