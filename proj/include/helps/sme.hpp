// SPDX-FileCopyrightText: Copyright (c) 2026 The helps-sim Authors
// SPDX-License-Identifier: Apache-2.0

// Simulated signal measurement equipment carried by a rescuer: follows a
// route, measures every uplink burst and runs stationary directional sweeps.

#ifndef HELPS_SME_HPP
#define HELPS_SME_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "helps/uplink.hpp"

namespace helps {

enum class MeasureMode { omni, directional };

struct MeasurementReport {
    std::string sme_id;
    std::string target_id;
    std::uint64_t seq = 0;
    double timestamp_s = 0.0;
    Pose pose;
    MeasureMode mode = MeasureMode::omni;
    std::optional<double> heading_rad;  // directional reports only
    RssiSample rssi;

    friend bool operator==(const MeasurementReport&, const MeasurementReport&) = default;
};

struct SmeState {
    std::string id;
    Pose pose;
    MeasureMode mode = MeasureMode::omni;
    double speed_mps = 0.0;
    Polyline route;
    double progress_m = 0.0;
    double clock_s = 0.0;
    std::uint64_t next_seq = 1;
};

/// Starts a new route at its first vertex. Building and floor attribution of
/// the current pose are kept.
void assign_route(SmeState& state, Polyline route);

/// Advances the SME by dt along its route and returns one report per uplink
/// burst in (clock, clock + dt]. Each report carries the pose at its burst.
std::vector<MeasurementReport> step(SmeState& state, double dt_s, const Scenario& scenario,
                                    const ChannelConfig& config, const ShadowingField* shadowing, Rng& rng);

struct BearingSample {
    double bearing_rad = 0.0;
    double mean_rssi_dbm = 0.0;
    int samples = 0;

    friend bool operator==(const BearingSample&, const BearingSample&) = default;
};

struct BearingProfile {
    std::string sme_id;
    Pose position;
    double start_s = 0.0;
    double duration_s = 0.0;
    std::vector<BearingSample> bearings;
    double argmax_bearing_rad = 0.0;

    friend bool operator==(const BearingProfile&, const BearingProfile&) = default;
};

struct SweepResult {
    BearingProfile profile;
    std::vector<MeasurementReport> reports;
};

/// Stationary sweep over n_bearings headings spaced 2*pi/n, dwell_s each.
/// Advances the SME clock by n_bearings * dwell_s. Throws std::invalid_argument
/// when n_bearings < 4 or a dwell is shorter than one uplink period.
SweepResult directional_sweep(SmeState& state, int n_bearings, double dwell_s, const Scenario& scenario,
                              const ChannelConfig& config, const ShadowingField* shadowing, Rng& rng);

}  // namespace helps

#endif  // HELPS_SME_HPP
