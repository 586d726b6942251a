// SPDX-FileCopyrightText: Copyright (c) 2026 The helps-sim Authors
// SPDX-License-Identifier: Apache-2.0

#include "helps/uplink.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace helps {

namespace {

constexpr double kTimeEps = 1e-9;

double tx_time(const ChannelConfig& config, long long k) { return static_cast<double>(k) * config.period_ms / 1000.0; }

}  // namespace

std::vector<double> next_tx_times(const ChannelConfig& config, double t0, double t1) {
    if (!(t1 > t0)) throw std::invalid_argument("next_tx_times: empty window");
    const double period = config.period_ms / 1000.0;
    std::vector<double> out;
    for (auto k = static_cast<long long>(std::ceil(t0 / period - kTimeEps)); tx_time(config, k) < t1 - kTimeEps; ++k) {
        if (tx_time(config, k) >= t0 - kTimeEps) out.push_back(tx_time(config, k));
    }
    return out;
}

std::vector<double> tx_times_after(const ChannelConfig& config, double t0, double t1) {
    std::vector<double> out;
    if (!(t1 > t0)) return out;
    const double period = config.period_ms / 1000.0;
    for (auto k = static_cast<long long>(std::floor(t0 / period + kTimeEps)) + 1; tx_time(config, k) <= t1 + kTimeEps;
         ++k) {
        if (tx_time(config, k) > t0 + kTimeEps) out.push_back(tx_time(config, k));
    }
    return out;
}

double noise_floor_dbm(double bandwidth_hz, double noise_figure_db) {
    return -174.0 + 10.0 * std::log10(bandwidth_hz) + noise_figure_db;
}

double detection_threshold_dbm(const ChannelConfig& config, const RfParams& rf) {
    return noise_floor_dbm(config.bandwidth_hz, rf.noise_figure_db) + 3.0;
}

double measurement_sigma_db(const ChannelConfig& config, const MeasurementParams& params) {
    return params.sigma_per_observation_db / std::sqrt(static_cast<double>(config.dmrs_symbols_per_subframe) *
                                                       params.rx_antennas);
}

RssiSample synthesize_rssi(const ChannelConfig& config, const Pose& sme_pose, const AntennaPattern& sme_pattern,
                           double sme_heading, const Scenario& scenario, const ShadowingField* shadowing, Rng& rng,
                           double timestamp_s) {
    const double p = received_power_dbm(config.tx_power_dbm, scenario.target.pose, sme_pose, sme_pattern, sme_heading,
                                        scenario.rf, scenario, shadowing);
    const double sigma = measurement_sigma_db(config, scenario.measurement);
    double value = p;
    if (sigma > 0.0) value += std::normal_distribution<double>(0.0, sigma)(rng);
    return {value, timestamp_s, value >= detection_threshold_dbm(config, scenario.rf)};
}

double avg_tx_power_ratio(const ChannelConfig& config, double voice_tx_power_dbm) {
    return std::pow(10.0, (config.tx_power_dbm - voice_tx_power_dbm) / 10.0) *
           (config.subframe_duration_ms / config.period_ms);
}

}  // namespace helps
