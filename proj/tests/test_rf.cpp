// SPDX-FileCopyrightText: Copyright (c) 2026 The helps-sim Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "helps/layouts.hpp"
#include "helps/rf.hpp"
#include "helps/rng.hpp"

using namespace helps;

namespace {

// Frozen with an independent evaluation of 20*log10(4*pi*d*f/c), d = 1 m, f = 738 MHz.
constexpr double kFsplAt1m738MHz = 29.808910458344204;
// 10 * 3.0 * log10(2)
constexpr double kDoublingAtN3 = 9.030899869919436;

Scenario open_field() {
    Scenario sc = make_minimal_scenario();
    sc.extent = {0, 0, 2000, 2000};
    return sc;
}

}  // namespace

TEST(PathLoss, FreeSpaceAtReferenceDistance) {
    const Scenario sc = open_field();
    const Pose tx = outdoor_pose({100, 100});
    const Pose rx = outdoor_pose({101, 100});
    EXPECT_NEAR(free_space_loss_db(1.0, 738e6), kFsplAt1m738MHz, 1e-9);
    EXPECT_NEAR(path_loss_db(tx, rx, sc.rf, sc), kFsplAt1m738MHz, 1e-9);
}

TEST(PathLoss, UsesUplinkCarrier) {
    Scenario sc = open_field();
    EXPECT_DOUBLE_EQ(sc.rf.uplink_carrier_hz, 738e6);
    const Pose tx = outdoor_pose({100, 100});
    const Pose rx = outdoor_pose({101, 100});
    RfParams other = sc.rf;
    other.uplink_carrier_hz = 2 * 738e6;
    EXPECT_NEAR(path_loss_db(tx, rx, other, sc) - path_loss_db(tx, rx, sc.rf, sc), 20 * std::log10(2.0), 1e-9);
}

TEST(PathLoss, DoublingDistanceOutdoor) {
    const Scenario sc = open_field();
    const Pose tx = outdoor_pose({100, 100});
    for (double d : {3.0, 10.0, 37.5, 400.0}) {
        const double a = path_loss_db(tx, outdoor_pose({100 + d, 100}), sc.rf, sc);
        const double b = path_loss_db(tx, outdoor_pose({100 + 2 * d, 100}), sc.rf, sc);
        EXPECT_NEAR(b - a, kDoublingAtN3, 1e-9) << d;
    }
}

TEST(PathLoss, CoincidentPosesThrow) {
    const Scenario sc = open_field();
    const Pose p = outdoor_pose({5, 5});
    EXPECT_THROW(path_loss_db(p, p, sc.rf, sc), std::invalid_argument);
}

TEST(PathLoss, ObstructionsAddConfiguredLosses) {
    const Scenario sc = make_room_search_scenario();
    const Pose a = pose_in_room(sc, 0, 1, 6, 0.5, 0.5);
    const Pose b = pose_in_room(sc, 0, 3, 6, 0.5, 0.5);
    // Same building: indoor exponent, two slabs, vertical distance 6 m
    const double expected = kFsplAt1m738MHz + 10 * 2.2 * std::log10(6.0) + 2 * 18.0;
    EXPECT_NEAR(path_loss_db(a, b, sc.rf, sc), expected, 1e-9);

    const Pose outside = outdoor_pose({sc.buildings[0].footprint.x0 - 10, a.y});
    const Pose ground = pose_in_room(sc, 0, 0, 4, 0.5, 0.5);
    const ObstructionCount w = walls_between(outside, ground, sc);
    const double d = std::hypot(std::hypot(outside.x - ground.x, outside.y - ground.y), outside.z - ground.z);
    EXPECT_NEAR(path_loss_db(ground, outside, sc.rf, sc),
                kFsplAt1m738MHz + 30 * std::log10(d) + 12.0 * w.exterior_walls + 5.0 * w.interior_walls, 1e-9);
}

TEST(PathLoss, ReciprocityAndMonotonicity) {
    const Scenario sc = make_testbed_scenario();
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ux(0, 250), uy(0, 300), u01(0, 1);
    std::uniform_int_distribution<int> bld(0, 24), floor(0, 4), room(0, 19);
    for (int i = 0; i < 300; ++i) {
        const Pose a = pose_in_room(sc, bld(rng), floor(rng), room(rng), u01(rng), u01(rng));
        const Pose b = outdoor_pose({ux(rng), uy(rng)});
        EXPECT_DOUBLE_EQ(path_loss_db(a, b, sc.rf, sc), path_loss_db(b, a, sc.rf, sc));
    }
    const Scenario open = open_field();
    const Pose tx = outdoor_pose({1000, 1000});
    double prev = -1e9;
    for (double d = 0.5; d < 900; d *= 1.3) {
        const double pl = path_loss_db(tx, outdoor_pose({1000 + d, 1000}), open.rf, open);
        EXPECT_GE(pl, prev);
        prev = pl;
    }
}

TEST(Antenna, PatternValues) {
    const AntennaPattern dir = AntennaPattern::directional(60, 15, 6);
    EXPECT_DOUBLE_EQ(antenna_gain_db(dir, 0.0), 6.0);
    EXPECT_NEAR(antenna_gain_db(dir, 30.0 * kPi / 180), 3.0, 0.01);
    EXPECT_NEAR(antenna_gain_db(dir, -30.0 * kPi / 180), 3.0, 0.01);
    EXPECT_DOUBLE_EQ(antenna_gain_db(dir, kPi), 6.0 - 15.0);
    EXPECT_GE(antenna_gain_db(dir, 0.0) - antenna_gain_db(dir, kPi), dir.front_to_back_db);
    const AntennaPattern omni = AntennaPattern::omni();
    for (double e = -kPi; e < kPi; e += 0.1) EXPECT_DOUBLE_EQ(antenna_gain_db(omni, e), omni.gain_db);
}

TEST(ReceivedPower, ZeroShadowingIsLinkBudget) {
    const Scenario sc = open_field();
    const Pose tx = outdoor_pose({500, 500});
    const Pose rx = outdoor_pose({560, 530});
    const double pl = path_loss_db(tx, rx, sc.rf, sc);
    for (double heading : {0.0, 1.0, 4.0}) {
        EXPECT_DOUBLE_EQ(received_power_dbm(23, tx, rx, AntennaPattern::omni(), heading, sc.rf, sc, nullptr), 23 - pl);
    }
    const double at_boresight =
        received_power_dbm(23, tx, rx, AntennaPattern::directional(), bearing(rx.xy(), tx.xy()), sc.rf, sc, nullptr);
    EXPECT_NEAR(at_boresight, 23 - pl + 6, 1e-12);
}

TEST(ReceivedPower, EnsembleStdOutdoor) {
    Scenario sc = open_field();
    const Pose tx = outdoor_pose({100, 100});
    const Pose rx = outdoor_pose({900, 700});
    const double base = received_power_dbm(23, tx, rx, AntennaPattern::omni(), 0, sc.rf, sc, nullptr);
    double sum = 0.0;
    double sum2 = 0.0;
    const int n = 10000;
    for (int s = 0; s < n; ++s) {
        const ShadowingField field(sc, derive_seed(99, "ensemble", s));
        const double v = received_power_dbm(23, tx, rx, AntennaPattern::omni(), 0, sc.rf, sc, &field) - base;
        sum += v;
        sum2 += v * v;
    }
    const double mean = sum / n;
    const double sd = std::sqrt(sum2 / n - mean * mean);
    EXPECT_NEAR(sd, 6.0, 0.3);
}

TEST(Shadowing, DeterministicPerSeed) {
    const Scenario sc = make_testbed_scenario();
    const ShadowingField a(sc, 42);
    const ShadowingField b(sc, 42);
    const ShadowingField c(sc, 43);
    for (double x = 0; x < 250; x += 17.3) {
        const Pose p = outdoor_pose({x, 2 * x});
        EXPECT_EQ(a.at(p), b.at(p));
        EXPECT_NE(a.at(p), c.at(p));
        EXPECT_EQ(a.at({3, 1}, {x, x}), b.at({3, 1}, {x, x}));
    }
    EXPECT_THROW(a.at({25, 0}, {0, 0}), std::out_of_range);
    EXPECT_THROW(a.at({0, 5}, {0, 0}), std::out_of_range);
}

TEST(Shadowing, SpatialMarginalStd) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const SumOfSinusoids field(6.0, 25.0, 512, seed);
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(0, 5000);
        double sum = 0.0;
        double sum2 = 0.0;
        const int n = 20000;
        for (int i = 0; i < n; ++i) {
            const double v = field.at({u(rng), u(rng)});
            sum += v;
            sum2 += v * v;
        }
        const double mean = sum / n;
        EXPECT_NEAR(std::sqrt(sum2 / n - mean * mean), 6.0, 0.3) << seed;
    }
}

TEST(Shadowing, ExponentialAutocorrelation) {
    // Ensemble estimate over independent fields; a single realization of a
    // finite sum carries sampling error of its own.
    for (double L : {25.0, 3.0}) {
        for (double lag : {L / 2, L, 2 * L}) {
            double sxy = 0.0;
            double sxx = 0.0;
            double syy = 0.0;
            const int fields = 1500;
            for (int s = 0; s < fields; ++s) {
                const SumOfSinusoids f(1.0, L, 512, derive_seed(7, "acf", s));
                std::mt19937_64 rng(s);
                std::uniform_real_distribution<double> u(0, 10 * L);
                std::uniform_real_distribution<double> ang(0, kTwoPi);
                for (int k = 0; k < 4; ++k) {
                    const Vec2 p{u(rng), u(rng)};
                    const double a = ang(rng);
                    const Vec2 q = p + Vec2{std::cos(a), std::sin(a)} * lag;
                    const double x = f.at(p);
                    const double y = f.at(q);
                    sxy += x * y;
                    sxx += x * x;
                    syy += y * y;
                }
            }
            const double rho = sxy / std::sqrt(sxx * syy);
            EXPECT_NEAR(rho, std::exp(-lag / L), 0.05) << "L=" << L << " lag=" << lag;
        }
    }
}

TEST(Shadowing, ZeroSigmaIsZero) {
    Scenario sc = make_room_search_scenario();
    disable_noise(sc);
    const ShadowingField f(sc, 1);
    EXPECT_EQ(f.at(pose_in_room(sc, 0, 2, 3, 0.5, 0.5)), 0.0);
    EXPECT_EQ(f.at(outdoor_pose({3, 3})), 0.0);
}

TEST(Shadowing, CsvExport) {
    const Scenario sc = make_minimal_scenario();
    const ShadowingField f(sc, 5);
    std::ostringstream out;
    f.write_csv(out, {}, {0, 0, 20, 10}, 5.0);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "x,y,shadowing_db");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    EXPECT_EQ(rows, 8);
}
