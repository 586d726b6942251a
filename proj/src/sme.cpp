// SPDX-FileCopyrightText: Copyright (c) 2026 The helps-sim Authors
// SPDX-License-Identifier: Apache-2.0

#include "helps/sme.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

namespace helps {

namespace {

void place_on_route(SmeState& state, double s) {
    const PolylinePoint p = polyline_at(state.route, s);
    state.pose.x = p.point.x;
    state.pose.y = p.point.y;
    if (state.route.size() >= 2) state.pose.heading = p.heading;
}

MeasurementReport make_report(SmeState& state, const Pose& pose, MeasureMode mode, std::optional<double> heading,
                              const Scenario& scenario, const ChannelConfig& config,
                              const ShadowingField* shadowing, Rng& rng, double t) {
    const AntennaPattern pattern = mode == MeasureMode::omni ? AntennaPattern::omni() : scenario.directional_antenna;
    MeasurementReport r;
    r.sme_id = state.id;
    r.target_id = config.target_id;
    r.seq = state.next_seq++;
    r.timestamp_s = t;
    r.mode = mode;
    r.heading_rad = heading;
    r.rssi = synthesize_rssi(config, pose, pattern, heading.value_or(pose.heading), scenario, shadowing, rng, t);
    r.pose = pose;
    const double sigma = scenario.measurement.self_pose_sigma_m;
    if (sigma > 0.0) {
        std::normal_distribution<double> err(0.0, sigma);
        r.pose.x += err(rng);
        r.pose.y += err(rng);
    }
    return r;
}

}  // namespace

void assign_route(SmeState& state, Polyline route) {
    state.route = std::move(route);
    state.progress_m = 0.0;
    if (!state.route.empty()) place_on_route(state, 0.0);
}

std::vector<MeasurementReport> step(SmeState& state, double dt_s, const Scenario& scenario,
                                    const ChannelConfig& config, const ShadowingField* shadowing, Rng& rng) {
    if (!(dt_s > 0.0)) throw std::invalid_argument("step: dt must be positive");
    std::vector<MeasurementReport> out;
    const double t0 = state.clock_s;
    const double s0 = state.progress_m;
    const double length = polyline_length(state.route);
    const bool moving = state.route.size() >= 2 && state.speed_mps > 0.0;
    for (double t : tx_times_after(config, t0, t0 + dt_s)) {
        Pose pose = state.pose;
        if (moving) {
            const PolylinePoint p = polyline_at(state.route, std::min(s0 + state.speed_mps * (t - t0), length));
            pose.x = p.point.x;
            pose.y = p.point.y;
            pose.heading = p.heading;
        }
        out.push_back(make_report(state, pose, state.mode, std::nullopt, scenario, config, shadowing, rng, t));
    }
    if (moving) {
        state.progress_m = std::min(s0 + state.speed_mps * dt_s, length);
        place_on_route(state, state.progress_m);
    }
    state.clock_s = t0 + dt_s;
    return out;
}

SweepResult directional_sweep(SmeState& state, int n_bearings, double dwell_s, const Scenario& scenario,
                              const ChannelConfig& config, const ShadowingField* shadowing, Rng& rng) {
    if (n_bearings < 4) throw std::invalid_argument("directional_sweep: need at least 4 bearings");
    if (dwell_s < config.period_ms / 1000.0) {
        throw std::invalid_argument("directional_sweep: dwell shorter than one uplink period");
    }
    SweepResult result;
    BearingProfile& profile = result.profile;
    profile.sme_id = state.id;
    profile.position = state.pose;
    profile.start_s = state.clock_s;
    profile.duration_s = n_bearings * dwell_s;
    double best = -1e300;
    for (int i = 0; i < n_bearings; ++i) {
        const double bearing_rad = kTwoPi * i / n_bearings;
        const double w0 = profile.start_s + i * dwell_s;
        BearingSample sample{bearing_rad, 0.0, 0};
        double sum = 0.0;
        for (double t : tx_times_after(config, w0, w0 + dwell_s)) {
            Pose pose = state.pose;
            pose.heading = bearing_rad;
            MeasurementReport r =
                make_report(state, pose, MeasureMode::directional, bearing_rad, scenario, config, shadowing, rng, t);
            sum += r.rssi.value_dbm;
            ++sample.samples;
            result.reports.push_back(std::move(r));
        }
        if (sample.samples == 0) throw std::invalid_argument("directional_sweep: no samples in dwell");
        sample.mean_rssi_dbm = sum / sample.samples;
        if (sample.mean_rssi_dbm > best) {
            best = sample.mean_rssi_dbm;
            profile.argmax_bearing_rad = bearing_rad;
        }
        profile.bearings.push_back(sample);
    }
    state.clock_s = profile.start_s + profile.duration_s;
    return result;
}

}  // namespace helps
