// SPDX-FileCopyrightText: Copyright (c) 2026 The helps-sim Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "helps/layouts.hpp"
#include "helps/uplink.hpp"

using namespace helps;

namespace {

// Frozen from an independent evaluation of -174 + 10*log10(7.5e6) + 7.
constexpr double kNoiseFloor75MHzNf7 = -98.249387366083;

double sample_std(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace

TEST(TxSchedule, FirstFourHundredMilliseconds) {
    const ChannelConfig cfg;
    const auto t = next_tx_times(cfg, 0.0, 0.4);
    ASSERT_EQ(t.size(), 5u);
    const double expected[] = {0.0, 0.08, 0.16, 0.24, 0.32};
    for (int i = 0; i < 5; ++i) EXPECT_DOUBLE_EQ(t[i], expected[i]);
}

TEST(TxSchedule, ShortWindowWithoutGridPointIsEmpty) {
    const ChannelConfig cfg;
    EXPECT_TRUE(next_tx_times(cfg, 0.09, 0.15).empty());
}

TEST(TxSchedule, EmptyWindowThrows) {
    const ChannelConfig cfg;
    EXPECT_THROW(next_tx_times(cfg, 0.08, 0.08), std::invalid_argument);
    EXPECT_THROW(next_tx_times(cfg, 0.2, 0.1), std::invalid_argument);
}

TEST(TxSchedule, StrictlyPeriodicAndSorted) {
    const ChannelConfig cfg;
    const auto t = next_tx_times(cfg, 3.3, 120.0);
    ASSERT_GT(t.size(), 100u);
    EXPECT_GE(t.front(), 3.3);
    for (std::size_t i = 1; i < t.size(); ++i) EXPECT_NEAR(t[i] - t[i - 1], 0.08, 1e-12);
}

TEST(TxSchedule, StepWindowsPartitionTheSchedule) {
    const ChannelConfig cfg;
    std::vector<double> joined;
    for (double t = 0.0; t < 10.0 - 1e-12; t += 0.25) {
        const auto part = tx_times_after(cfg, t, t + 0.25);
        joined.insert(joined.end(), part.begin(), part.end());
    }
    const auto whole = next_tx_times(cfg, 0.01, 10.01);
    EXPECT_EQ(joined.size(), whole.size());
    for (std::size_t i = 0; i < std::min(joined.size(), whole.size()); ++i) EXPECT_NEAR(joined[i], whole[i], 1e-9);
}

TEST(NoiseFloor, SevenPointFiveMegahertz) {
    EXPECT_NEAR(noise_floor_dbm(7.5e6, 7.0), kNoiseFloor75MHzNf7, 1e-9);
    EXPECT_NEAR(noise_floor_dbm(7.5e6, 7.0), -98.25, 0.005);
    EXPECT_NEAR(detection_threshold_dbm(ChannelConfig{}, RfParams{}), kNoiseFloor75MHzNf7 + 3.0, 1e-9);
}

TEST(Synthesize, ZeroNoiseIsLinkBudget) {
    Scenario sc = make_minimal_scenario();
    disable_noise(sc);
    const Pose sme = outdoor_pose({20, 70});
    Rng rng(1);
    const RssiSample s = synthesize_rssi(sc.channel(), sme, AntennaPattern::omni(), 0.0, sc, nullptr, rng, 1.6);
    EXPECT_DOUBLE_EQ(s.value_dbm, 23.0 - path_loss_db(sc.target.pose, sme, sc.rf, sc));
    EXPECT_DOUBLE_EQ(s.timestamp_s, 1.6);
    EXPECT_TRUE(s.valid);
}

TEST(Synthesize, SampleMeanConverges) {
    Scenario sc = make_minimal_scenario();
    sc.rf.shadowing_sigma_outdoor_db = 0.0;
    const Pose sme = outdoor_pose({80, 10});
    const double truth = 23.0 - path_loss_db(sc.target.pose, sme, sc.rf, sc);
    Rng rng(17);
    double sum = 0.0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        sum += synthesize_rssi(sc.channel(), sme, AntennaPattern::omni(), 0.0, sc, nullptr, rng, 0.0).value_dbm;
    }
    EXPECT_NEAR(sum / n, truth, 0.02);
}

TEST(Synthesize, NoiseShrinksWithObservations) {
    Scenario sc = make_minimal_scenario();
    sc.rf.shadowing_sigma_outdoor_db = 0.0;
    const Pose sme = outdoor_pose({80, 10});
    ChannelConfig four = sc.channel();
    ChannelConfig one = four;
    one.dmrs_symbols_per_subframe = 1;
    Scenario sc_one = sc;
    sc_one.measurement.rx_antennas = 1;
    EXPECT_DOUBLE_EQ(measurement_sigma_db(four, sc.measurement), 0.5);
    EXPECT_DOUBLE_EQ(measurement_sigma_db(one, sc_one.measurement), 1.0);
    Rng rng(5);
    std::vector<double> a;
    std::vector<double> b;
    for (int i = 0; i < 20000; ++i) {
        a.push_back(synthesize_rssi(four, sme, AntennaPattern::omni(), 0.0, sc, nullptr, rng, 0.0).value_dbm);
        b.push_back(synthesize_rssi(one, sme, AntennaPattern::omni(), 0.0, sc_one, nullptr, rng, 0.0).value_dbm);
    }
    EXPECT_NEAR(sample_std(b) / sample_std(a), 2.0, 0.05);
}

TEST(Synthesize, ReproducibleForSeed) {
    const Scenario sc = make_testbed_scenario();
    const ShadowingField field(sc, 8);
    const Pose sme = outdoor_pose({100, 60});
    Rng r1(99);
    Rng r2(99);
    for (int i = 0; i < 50; ++i) {
        EXPECT_EQ(synthesize_rssi(sc.channel(), sme, AntennaPattern::directional(), 0.3 * i, sc, &field, r1, i * 0.08),
                  synthesize_rssi(sc.channel(), sme, AntennaPattern::directional(), 0.3 * i, sc, &field, r2, i * 0.08));
    }
}

TEST(Synthesize, BelowThresholdIsInvalid) {
    Scenario sc = make_minimal_scenario();
    disable_noise(sc);
    sc.extent = {0, 0, 100000, 100000};
    const Pose far = outdoor_pose({90000, 90000});
    Rng rng(1);
    const RssiSample s = synthesize_rssi(sc.channel(), far, AntennaPattern::omni(), 0.0, sc, nullptr, rng, 0.0);
    EXPECT_LT(s.value_dbm, detection_threshold_dbm(sc.channel(), sc.rf));
    EXPECT_FALSE(s.valid);
}

TEST(PowerBudget, AverageTxPowerRatio) {
    ChannelConfig cfg;
    EXPECT_NEAR(avg_tx_power_ratio(cfg, kVoiceTxPowerDbm), 0.125, 1e-12);
    cfg.period_ms = 10.0;
    EXPECT_NEAR(avg_tx_power_ratio(cfg, kVoiceTxPowerDbm), 1.0, 1e-12);
    cfg.period_ms = 1.0;
    cfg.tx_power_dbm = 13.0;
    EXPECT_NEAR(avg_tx_power_ratio(cfg, 13.0), 1.0, 1e-12);
}
