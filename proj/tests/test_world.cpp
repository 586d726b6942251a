// SPDX-FileCopyrightText: Copyright (c) 2026 The helps-sim Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <random>

#include "helps/layouts.hpp"
#include "helps/world.hpp"

using namespace helps;

namespace {

constexpr const char* kMinimalDoc = R"({
  "schema_version": 1,
  "extent": {"x0": 0, "y0": 0, "x1": 100, "y1": 100},
  "buildings": [],
  "roads": [],
  "target": {"x": 50, "y": 50},
  "rescuers": [{"id": "sme-1", "start": {"x": 10, "y": 10}, "mode": "vehicle"}],
  "seed": 7
})";

// Sampling oracle: walks the segment in tiny steps and counts state changes.
ObstructionCount brute_force_walls(const Pose& a, const Pose& b, const Scenario& sc, int samples = 20000) {
    ObstructionCount out;
    struct State {
        int building = -1;
        int floor = -1;
        int room = -1;
    };
    const auto state_at = [&](double t) {
        const Vec2 p{a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
        const double z = a.z + t * (b.z - a.z);
        State s;
        for (std::size_t i = 0; i < sc.buildings.size(); ++i) {
            const Building& bld = sc.buildings[i];
            if (bld.footprint.contains_strict(p, 0.0) && z >= 0.0 && z <= bld.height()) {
                s.building = static_cast<int>(i);
                s.floor = std::min(static_cast<int>(z / bld.floor_height), bld.floor_count - 1);
                const auto& rooms = bld.floors[s.floor].rooms;
                for (std::size_t r = 0; r < rooms.size(); ++r) {
                    if (rooms[r].contains_strict(p, 0.0)) s.room = static_cast<int>(r);
                }
            }
        }
        return s;
    };
    State prev = state_at(0.0);
    for (int i = 1; i <= samples; ++i) {
        const State cur = state_at(static_cast<double>(i) / samples);
        if ((cur.building >= 0) != (prev.building >= 0) || (cur.building >= 0 && cur.building != prev.building)) {
            ++out.exterior_walls;
        } else if (cur.building >= 0) {
            if (cur.floor != prev.floor) {
                out.floors_crossed += std::abs(cur.floor - prev.floor);
            } else if (cur.room != prev.room) {
                // room -> room through a shared wall is one wall; room -> corridor is one wall
                ++out.interior_walls;
            }
        }
        prev = cur;
    }
    return out;
}

}  // namespace

TEST(ScenarioLoad, MinimalDocumentIsValid) {
    const Scenario sc = load_scenario(kMinimalDoc);
    EXPECT_TRUE(sc.buildings.empty());
    EXPECT_FALSE(sc.target.pose.indoor());
    ASSERT_EQ(sc.rescuers.size(), 1u);
    EXPECT_EQ(sc.rescuers[0].mode, RescuerMode::vehicle);
    EXPECT_DOUBLE_EQ(sc.rescuers[0].speed_mps, 8.0);
    EXPECT_EQ(sc.seed, 7u);
    EXPECT_DOUBLE_EQ(sc.rf.uplink_carrier_hz, 738e6);
}

TEST(ScenarioLoad, TestbedDocumentIsValid) {
    const Scenario sc = load_scenario(serialize_scenario(make_testbed_scenario()));
    EXPECT_DOUBLE_EQ(sc.extent.width(), 250.0);
    EXPECT_DOUBLE_EQ(sc.extent.height(), 300.0);
    ASSERT_EQ(sc.buildings.size(), 25u);
    for (const auto& b : sc.buildings) {
        EXPECT_GE(b.floor_count, 5);
        std::size_t rooms = 0;
        for (const auto& f : b.floors) rooms += f.rooms.size();
        EXPECT_EQ(rooms, 100u);
        EXPECT_DOUBLE_EQ(b.floors[0].rooms[0].width() * b.floors[0].rooms[0].height(), 32.0);
    }
}

TEST(ScenarioLoad, BundledFilesLoad) {
    for (const char* name : {"minimal", "testbed", "room_search"}) {
        const std::string path = std::string(HELPS_SOURCE_DIR) + "/scenarios/" + name + ".json";
        EXPECT_NO_THROW(load_scenario_file(path)) << path;
    }
}

TEST(ScenarioLoad, RoomOutsideFootprintIsRejected) {
    Scenario sc = make_room_search_scenario();
    sc.buildings[0].floors[1].rooms[3].x1 += 20.0;
    try {
        load_scenario(serialize_scenario(sc));
        FAIL() << "expected validation error";
    } catch (const ScenarioError& e) {
        EXPECT_EQ(e.kind(), ScenarioError::Kind::validation);
        EXPECT_NE(std::string(e.what()).find("room outside floor footprint"), std::string::npos) << e.what();
    }
}

TEST(ScenarioLoad, MalformedDocumentIsParseError) {
    try {
        load_scenario("{\"schema_version\": 1, \"extent\": ");
        FAIL() << "expected parse error";
    } catch (const ScenarioError& e) {
        EXPECT_EQ(e.kind(), ScenarioError::Kind::parse);
    }
    EXPECT_THROW(load_scenario(R"({"schema_version": 1, "extent": {"x0": 0}})"), ScenarioError);
}

TEST(ScenarioLoad, InvariantViolationsNamed) {
    const auto expect_invalid = [](Scenario sc, const std::string& needle) {
        try {
            validate_scenario(sc);
            FAIL() << "expected " << needle;
        } catch (const ScenarioError& e) {
            EXPECT_EQ(e.kind(), ScenarioError::Kind::validation);
            EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
        }
    };
    Scenario sc = make_room_search_scenario();
    {
        Scenario s = sc;
        s.extent = {0, 0, 0, 10};
        expect_invalid(s, "extent");
    }
    {
        Scenario s = sc;
        s.buildings[0].floors[0].rooms[1] = s.buildings[0].floors[0].rooms[0];
        expect_invalid(s, "overlaps");
    }
    {
        Scenario s = sc;
        s.buildings[0].floors.pop_back();
        expect_invalid(s, "floor_count");
    }
    {
        Scenario s = sc;
        s.target.room_index = 99;
        expect_invalid(s, "room index");
    }
    {
        Scenario s = sc;
        s.target.room_index = 0;
        expect_invalid(s, "outside its room");
    }
    {
        Scenario s = sc;
        s.rf.path_loss_exponent_indoor = 1.5;
        expect_invalid(s, "exponent");
    }
    {
        Scenario s = sc;
        s.channels["default"].tx_power_dbm = 30;
        expect_invalid(s, "23 dBm");
    }
    {
        Scenario s = sc;
        s.roads.push_back({{0, 0}, {500, 0}});
        expect_invalid(s, "road");
    }
}

TEST(ScenarioLoad, RoundTripIsIdentity) {
    for (const Scenario& sc : {make_minimal_scenario(), make_testbed_scenario(), make_room_search_scenario()}) {
        const Scenario again = load_scenario(serialize_scenario(sc));
        EXPECT_EQ(again, sc) << sc.name;
    }
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 20; ++i) {
        Scenario sc = make_room_search_scenario();
        sc.rf.floor_loss_db = 10 + 20 * u(rng);
        sc.rf.shadowing_sigma_outdoor_db = 8 * u(rng);
        sc.timing.door_knock_s = 5 + 30 * u(rng);
        sc.network.loss_probability = u(rng);
        sc.seed = rng();
        sc.target.pose = pose_in_room(sc, 0, i % 5, i % 20, u(rng), u(rng));
        sc.target.room_index = i % 20;
        EXPECT_EQ(load_scenario(serialize_scenario(sc)), sc);
    }
}

TEST(WallsBetween, SameRoomHasNoCrossings) {
    const Scenario sc = make_room_search_scenario();
    const Pose a = pose_in_room(sc, 0, 1, 4, 0.2, 0.3);
    const Pose b = pose_in_room(sc, 0, 1, 4, 0.8, 0.7);
    EXPECT_EQ(walls_between(a, b, sc), (ObstructionCount{0, 0, 0}));
}

TEST(WallsBetween, OutdoorToOneRoomBuilding) {
    Scenario sc = make_minimal_scenario();
    Building b;
    b.footprint = {40, 40, 60, 60};
    b.floor_count = 1;
    b.floor_height = 3.0;
    b.floors.push_back({{{50, 40}, {50, 60}}, {b.footprint}});
    sc.buildings.push_back(b);
    sc.target.pose = outdoor_pose({10, 10});
    validate_scenario(sc);
    const Pose outside = outdoor_pose({10, 50});
    const Pose inside = indoor_pose({50, 50}, 0, 0, 3.0);
    EXPECT_EQ(walls_between(outside, inside, sc), (ObstructionCount{1, 0, 0}));
}

TEST(WallsBetween, VerticalFloorsMatchBruteForce) {
    const Scenario sc = make_room_search_scenario();
    const Pose a = pose_in_room(sc, 0, 1, 6, 0.5, 0.5);
    const Pose b = pose_in_room(sc, 0, 3, 6, 0.5, 0.5);
    const ObstructionCount oracle = brute_force_walls(a, b, sc);
    EXPECT_EQ(oracle.floors_crossed, 2);
    EXPECT_EQ(walls_between(a, b, sc).floors_crossed, oracle.floors_crossed);
    EXPECT_EQ(walls_between(a, b, sc), oracle);
}

TEST(WallsBetween, CorridorToRoomAcrossCorridor) {
    const Scenario sc = make_room_search_scenario();
    const Building& b = sc.buildings[0];
    // corridor center -> east room on same floor: one interior wall
    const Pose a = indoor_pose({b.floors[0].corridor[0].x, 30.0}, 0, 0, 3.0);
    const Pose east = pose_in_room(sc, 0, 0, 5, 0.5, 0.5);
    EXPECT_EQ(walls_between(a, east, sc), (ObstructionCount{0, 1, 0}));
    // west room -> east room at the same y: west room wall, east room wall
    const Pose west = pose_in_room(sc, 0, 0, 4, 0.5, 0.5);
    EXPECT_EQ(walls_between(west, east, sc), (ObstructionCount{0, 2, 0}));
    // adjacent rooms share one wall
    const Pose next = pose_in_room(sc, 0, 0, 6, 0.5, 0.5);
    EXPECT_EQ(walls_between(west, next, sc), (ObstructionCount{0, 1, 0}));
}

TEST(WallsBetween, RandomSegmentsMatchBruteForceAndAreSymmetric) {
    const Scenario sc = make_room_search_scenario();
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> ux(sc.extent.x0 + 1, sc.extent.x1 - 1);
    std::uniform_real_distribution<double> uy(sc.extent.y0 + 1, sc.extent.y1 - 1);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::uniform_int_distribution<int> floor(0, 4);
    std::uniform_int_distribution<int> room(0, 19);
    const auto random_pose = [&]() {
        if (u01(rng) < 0.4) return outdoor_pose({ux(rng), uy(rng)});
        return pose_in_room(sc, 0, floor(rng), room(rng), u01(rng), u01(rng));
    };
    for (int i = 0; i < 150; ++i) {
        const Pose a = random_pose();
        const Pose b = random_pose();
        const ObstructionCount fwd = walls_between(a, b, sc);
        EXPECT_EQ(fwd, walls_between(b, a, sc));
        EXPECT_EQ(fwd, brute_force_walls(a, b, sc)) << "pair " << i;
    }
}

TEST(WallsBetween, TestbedSymmetry) {
    const Scenario sc = make_testbed_scenario();
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ux(0, 250), uy(0, 300), u01(0, 1);
    std::uniform_int_distribution<int> bld(0, 24), floor(0, 4), room(0, 19);
    for (int i = 0; i < 500; ++i) {
        const Pose a = outdoor_pose({ux(rng), uy(rng)});
        const Pose b = pose_in_room(sc, bld(rng), floor(rng), room(rng), u01(rng), u01(rng));
        EXPECT_EQ(walls_between(a, b, sc), walls_between(b, a, sc));
    }
}

TEST(RoutePoint, EndpointsAndMidpoint) {
    const Polyline route{{0, 0}, {100, 0}};
    const Pose start = route_point_at(route, 0.0);
    EXPECT_DOUBLE_EQ(start.x, 0.0);
    EXPECT_DOUBLE_EQ(start.y, 0.0);
    const Pose end = route_point_at(route, 100.0);
    EXPECT_DOUBLE_EQ(end.x, 100.0);
    EXPECT_DOUBLE_EQ(end.y, 0.0);
    const Pose mid = route_point_at(route, 50.0);
    EXPECT_DOUBLE_EQ(mid.x, 50.0);
    EXPECT_DOUBLE_EQ(mid.heading, 0.0);
}

TEST(RoutePoint, HeadingFollowsTangent) {
    const Polyline route{{0, 0}, {10, 0}, {10, 10}};
    EXPECT_NEAR(route_point_at(route, 5.0).heading, 0.0, 1e-12);
    const Pose p = route_point_at(route, 15.0);
    EXPECT_NEAR(p.x, 10.0, 1e-12);
    EXPECT_NEAR(p.y, 5.0, 1e-12);
    EXPECT_NEAR(p.heading, kPi / 2, 1e-12);
    EXPECT_NEAR(route_point_at(route, 20.0).y, 10.0, 1e-12);
}

TEST(RoutePoint, OutOfRangeThrows) {
    const Polyline route{{0, 0}, {100, 0}};
    EXPECT_THROW(route_point_at(route, -1.0), std::out_of_range);
    EXPECT_THROW(route_point_at(route, 100.5), std::out_of_range);
}

TEST(Geometry, PolylineSliceAndProject) {
    const Polyline line{{0, 0}, {10, 0}, {10, 10}};
    EXPECT_NEAR(polyline_project(line, {12, 4}), 14.0, 1e-12);
    const Polyline s = polyline_slice(line, 15.0, 5.0);
    ASSERT_EQ(s.size(), 3u);
    EXPECT_EQ(s.front(), (Vec2{10, 5}));
    EXPECT_EQ(s[1], (Vec2{10, 0}));
    EXPECT_EQ(s.back(), (Vec2{5, 0}));
    EXPECT_TRUE(polyline_self_intersects(Polyline{{0, 0}, {10, 10}, {10, 0}, {0, 10}}));
    EXPECT_FALSE(polyline_self_intersects(line));
}
