// SPDX-FileCopyrightText: Copyright (c) 2026 The helps-sim Authors
// SPDX-License-Identifier: Apache-2.0

#include "helps/layouts.hpp"

namespace helps {

Building make_office_building(Vec2 origin, const OfficeLayout& layout) {
    const double width = 2.0 * layout.room_depth_m + layout.corridor_width_m;
    const double length = layout.rooms_per_side * layout.room_width_m;
    Building b;
    b.footprint = {origin.x, origin.y, origin.x + width, origin.y + length};
    b.floor_count = layout.floors;
    b.floor_height = layout.floor_height_m;
    const double corridor_x = origin.x + layout.room_depth_m + 0.5 * layout.corridor_width_m;
    for (int f = 0; f < layout.floors; ++f) {
        Floor floor;
        floor.corridor = {{corridor_x, origin.y}, {corridor_x, origin.y + length}};
        for (int k = 0; k < layout.rooms_per_side; ++k) {
            const double y0 = origin.y + k * layout.room_width_m;
            const double y1 = y0 + layout.room_width_m;
            floor.rooms.push_back({origin.x, y0, origin.x + layout.room_depth_m, y1});
            floor.rooms.push_back({origin.x + layout.room_depth_m + layout.corridor_width_m, y0, origin.x + width, y1});
        }
        b.floors.push_back(std::move(floor));
    }
    return b;
}

Scenario make_testbed_scenario() {
    Scenario sc;
    sc.name = "testbed";
    sc.extent = {0.0, 0.0, 250.0, 300.0};
    for (int row = 0; row < 5; ++row) {
        for (int col = 0; col < 5; ++col) {
            sc.buildings.push_back(make_office_building({50.0 * col + 16.0, 60.0 * row + 10.0}));
        }
    }
    for (int col = 0; col <= 5; ++col) sc.roads.push_back({{50.0 * col, 0.0}, {50.0 * col, 300.0}});
    for (int row = 0; row <= 5; ++row) sc.roads.push_back({{0.0, 60.0 * row}, {250.0, 60.0 * row}});
    sc.target.pose = pose_in_room(sc, 12, 2, 5, 0.5, 0.5);
    sc.target.room_index = 5;
    sc.channels["default"].target_id = "caller-1";
    const double starts[3] = {50.0, 125.0, 200.0};
    for (int i = 0; i < 3; ++i) {
        sc.rescuers.push_back({"sme-" + std::to_string(i + 1), outdoor_pose({starts[i], 0.0}, kPi / 2),
                               RescuerMode::vehicle, sc.timing.vehicle_speed_mps});
    }
    sc.initial_fix = {125.0, 150.0, 125.0, true};
    sc.seed = 1;
    validate_scenario(sc);
    return sc;
}

Scenario make_room_search_scenario() {
    Scenario sc;
    sc.name = "room-search";
    sc.extent = {0.0, 0.0, 60.0, 80.0};
    sc.buildings.push_back(make_office_building({21.0, 20.0}));
    sc.roads.push_back({{0.0, 10.0}, {60.0, 10.0}});
    sc.target.pose = pose_in_room(sc, 0, 2, 7, 0.5, 0.5);
    sc.target.room_index = 7;
    sc.channels["default"].target_id = "caller-1";
    const Building& b = sc.buildings.front();
    for (int i = 0; i < 3; ++i) {
        sc.rescuers.push_back({"sme-" + std::to_string(i + 1), indoor_pose(b.entrance(), 0, 0, b.floor_height, kPi / 2),
                               RescuerMode::foot, sc.timing.foot_speed_mps});
    }
    sc.initial_fix = {30.0, 40.0, 30.0, false};
    sc.seed = 1;
    validate_scenario(sc);
    return sc;
}

Scenario make_minimal_scenario() {
    Scenario sc;
    sc.name = "minimal";
    sc.extent = {0.0, 0.0, 100.0, 100.0};
    sc.target.pose = outdoor_pose({50.0, 50.0});
    sc.rescuers.push_back({"sme-1", outdoor_pose({40.0, 50.0}), RescuerMode::vehicle, sc.timing.vehicle_speed_mps});
    sc.initial_fix = {50.0, 50.0, 30.0, false};
    sc.seed = 1;
    validate_scenario(sc);
    return sc;
}

void disable_noise(Scenario& sc) {
    sc.rf.shadowing_sigma_outdoor_db = 0.0;
    sc.rf.shadowing_sigma_indoor_db = 0.0;
    sc.measurement.sigma_per_observation_db = 0.0;
    sc.measurement.self_pose_sigma_m = 0.0;
    sc.network.loss_probability = 0.0;
}

}  // namespace helps
