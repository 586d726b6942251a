// SPDX-FileCopyrightText: Copyright (c) 2026 The helps-sim Authors
// SPDX-License-Identifier: Apache-2.0

// Generators for the bundled scenarios. The testbed is a constructed
// approximation of a 250 m x 300 m campus; real building plans are not used.

#ifndef HELPS_LAYOUTS_HPP
#define HELPS_LAYOUTS_HPP

#include "helps/world.hpp"

namespace helps {

struct OfficeLayout {
    int floors = 5;
    int rooms_per_side = 10;
    double room_width_m = 4.0;   // along the corridor
    double room_depth_m = 8.0;   // away from the corridor
    double corridor_width_m = 2.0;
    double floor_height_m = 3.0;
};

/// Double-loaded corridor building: the corridor runs along +y through the
/// middle of the footprint, rooms on both sides. `origin` is the south-west corner.
Building make_office_building(Vec2 origin, const OfficeLayout& layout = {});

/// 5 x 5 grid of five-floor office buildings on a road grid, three vehicle SMEs.
Scenario make_testbed_scenario();
/// A single 100-room building with three SMEs on foot at its entrance.
Scenario make_room_search_scenario();
/// Empty world, outdoor target, one rescuer.
Scenario make_minimal_scenario();

/// Zeroes every stochastic element (shadowing, measurement noise, link loss).
void disable_noise(Scenario& scenario);

}  // namespace helps

#endif  // HELPS_LAYOUTS_HPP
