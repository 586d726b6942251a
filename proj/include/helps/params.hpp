// SPDX-FileCopyrightText: Copyright (c) 2026 The helps-sim Authors
// SPDX-License-Identifier: Apache-2.0

// Plain configuration records shared by the scenario document and the
// simulation modules. All lengths in meters, powers in dBm/dB, times in seconds.

#ifndef HELPS_PARAMS_HPP
#define HELPS_PARAMS_HPP

#include <cstdint>
#include <string>

namespace helps {

struct RfParams {
    double uplink_carrier_hz = 738e6;
    double downlink_carrier_hz = 793e6;
    double path_loss_exponent_outdoor = 3.0;
    double path_loss_exponent_indoor = 2.2;
    double exterior_wall_loss_db = 12.0;
    double interior_wall_loss_db = 5.0;
    double floor_loss_db = 18.0;
    double shadowing_sigma_outdoor_db = 6.0;
    double shadowing_sigma_indoor_db = 4.0;
    double decorrelation_distance_outdoor_m = 25.0;
    double decorrelation_distance_indoor_m = 3.0;
    double noise_figure_db = 7.0;
    double reference_distance_m = 1.0;
    int shadowing_components = 512;  // sinusoids per shadowing region

    friend bool operator==(const RfParams&, const RfParams&) = default;
};

enum class AntennaKind { omni, directional };

struct AntennaPattern {
    AntennaKind kind = AntennaKind::omni;
    double hpbw_deg = 60.0;
    double front_to_back_db = 15.0;
    double gain_db = 0.0;

    friend bool operator==(const AntennaPattern&, const AntennaPattern&) = default;

    static AntennaPattern omni() { return {}; }
    static AntennaPattern directional(double hpbw_deg = 60.0, double front_to_back_db = 15.0,
                                      double gain_db = 6.0) {
        return {AntennaKind::directional, hpbw_deg, front_to_back_db, gain_db};
    }
};

/// Uplink channel configuration handed to SMEs for one target phone.
struct ChannelConfig {
    double subframe_duration_ms = 1.0;
    double bandwidth_hz = 7.5e6;
    double period_ms = 80.0;
    double tx_power_dbm = 23.0;
    int dmrs_symbols_per_subframe = 2;
    double carrier_hz = 738e6;
    std::string target_id = "target-0";

    friend bool operator==(const ChannelConfig&, const ChannelConfig&) = default;
};

inline constexpr double kSystemBandwidthHz = 10e6;
inline constexpr double kMaxUeTxPowerDbm = 23.0;
inline constexpr double kVoiceTxPowerDbm = 13.0;

/// Per-observation RSSI noise and SME receiver layout.
struct MeasurementParams {
    double sigma_per_observation_db = 1.0;
    int rx_antennas = 2;
    double self_pose_sigma_m = 0.0;

    friend bool operator==(const MeasurementParams&, const MeasurementParams&) = default;
};

struct TimingParams {
    int building_sweep_bearings = 12;
    double building_sweep_dwell_s = 1.25;
    int room_sweep_bearings = 24;
    double room_sweep_dwell_s = 0.4;
    int building_sweep_positions = 1;
    int room_sweep_positions = 2;
    double room_sweep_spacing_m = 6.0;
    bool verify_building = true;
    double door_knock_s = 20.0;
    double door_check_s = 5.0;
    double floor_change_s = 20.0;
    double vehicle_speed_mps = 8.0;
    double foot_speed_mps = 1.2;
    double timeout_s = 1800.0;
    double lane_spacing_m = 50.0;
    int max_retries = 3;
    double lcs_interval_s = 1.0;
    int estimate_window = 200;
    double candidate_radius_m = 100.0;
    double tick_s = 0.25;
    double visual_range_m = 10.0;  // outdoor callers are found on sight
    double homing_step_m = 10.0;

    friend bool operator==(const TimingParams&, const TimingParams&) = default;
};

struct NetworkParams {
    double loss_probability = 0.01;
    double latency_min_s = 0.03;
    double latency_max_s = 0.12;
    double retry_timeout_s = 1.0;
    double setup_delay_s = 2.0;
    bool target_unreachable = false;
    bool preloaded_config = false;

    friend bool operator==(const NetworkParams&, const NetworkParams&) = default;
};

/// Coarse fix handed over by the carrier before rescuers are dispatched.
struct InitialFix {
    double x = 0.0;
    double y = 0.0;
    double radius_3sigma_m = 125.0;
    /// When set, each trial draws the fix around the true position with
    /// per-axis sigma = radius_3sigma_m / 3 instead of using (x, y).
    bool noisy = false;

    friend bool operator==(const InitialFix&, const InitialFix&) = default;
};

}  // namespace helps

#endif  // HELPS_PARAMS_HPP
