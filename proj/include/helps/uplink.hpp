// SPDX-FileCopyrightText: Copyright (c) 2026 The helps-sim Authors
// SPDX-License-Identifier: Apache-2.0

// Periodic uplink transmissions of the target phone and per-burst RSSI
// synthesis at an SME.

#ifndef HELPS_UPLINK_HPP
#define HELPS_UPLINK_HPP

#include <vector>

#include "helps/params.hpp"
#include "helps/rf.hpp"
#include "helps/rng.hpp"
#include "helps/world.hpp"

namespace helps {

struct RssiSample {
    double value_dbm = 0.0;
    double timestamp_s = 0.0;
    bool valid = false;

    friend bool operator==(const RssiSample&, const RssiSample&) = default;
};

/// Transmission instants k * period inside [t0, t1), session start at t = 0.
/// Throws std::invalid_argument when t1 <= t0.
std::vector<double> next_tx_times(const ChannelConfig& config, double t0, double t1);

/// Transmission instants inside (t0, t1]; the window convention used by
/// simulation steps, so back-to-back steps see every burst exactly once.
std::vector<double> tx_times_after(const ChannelConfig& config, double t0, double t1);

/// Thermal noise floor -174 + 10*log10(bandwidth) + noise figure, in dBm.
double noise_floor_dbm(double bandwidth_hz, double noise_figure_db);

/// Samples below this level are reported invalid.
double detection_threshold_dbm(const ChannelConfig& config, const RfParams& rf);

/// Per-report RSSI noise: sigma per observation over sqrt(symbols * antennas).
double measurement_sigma_db(const ChannelConfig& config, const MeasurementParams& params);

/// One RSSI sample at the SME for the burst at timestamp_s. The target pose is
/// the scenario's target placement.
RssiSample synthesize_rssi(const ChannelConfig& config, const Pose& sme_pose, const AntennaPattern& sme_pattern,
                           double sme_heading, const Scenario& scenario, const ShadowingField* shadowing, Rng& rng,
                           double timestamp_s);

/// Average transmit power relative to a continuous voice call.
double avg_tx_power_ratio(const ChannelConfig& config, double voice_tx_power_dbm);

}  // namespace helps

#endif  // HELPS_UPLINK_HPP
