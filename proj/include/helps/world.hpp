// SPDX-FileCopyrightText: Copyright (c) 2026 The helps-sim Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef HELPS_WORLD_HPP
#define HELPS_WORLD_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "helps/geometry.hpp"
#include "helps/params.hpp"

namespace helps {

/// Antenna height above the local floor (or ground) for phones and SMEs.
inline constexpr double kDeviceHeightM = 1.5;
inline constexpr int kScenarioSchemaVersion = 1;

struct Floor {
    Polyline corridor;
    std::vector<Rect> rooms;

    friend bool operator==(const Floor&, const Floor&) = default;
};

struct Building {
    Rect footprint;
    int floor_count = 1;
    double floor_height = 3.0;
    std::vector<Floor> floors;

    friend bool operator==(const Building&, const Building&) = default;

    double height() const { return floor_count * floor_height; }
    /// Entrance: ground-floor corridor start.
    Vec2 entrance() const { return floors.front().corridor.front(); }
};

struct Pose {
    double x = 0.0;
    double y = 0.0;
    double z = kDeviceHeightM;
    double heading = 0.0;
    std::optional<int> floor_index;
    std::optional<int> building_index;

    friend bool operator==(const Pose&, const Pose&) = default;

    Vec2 xy() const { return {x, y}; }
    bool indoor() const { return building_index.has_value(); }
};

Pose outdoor_pose(Vec2 p, double heading = 0.0);
Pose indoor_pose(Vec2 p, int building, int floor, double floor_height, double heading = 0.0);

struct TargetPlacement {
    Pose pose;
    std::optional<int> room_index;
    std::string tx_profile = "default";

    friend bool operator==(const TargetPlacement&, const TargetPlacement&) = default;
};

enum class RescuerMode { vehicle, foot };

struct RescuerSpec {
    std::string id;
    Pose start;
    RescuerMode mode = RescuerMode::vehicle;
    double speed_mps = 8.0;

    friend bool operator==(const RescuerSpec&, const RescuerSpec&) = default;
};

struct Scenario {
    std::string name;
    Rect extent;
    std::vector<Building> buildings;
    std::vector<Polyline> roads;
    TargetPlacement target;
    RfParams rf;
    std::map<std::string, ChannelConfig> channels{{"default", ChannelConfig{}}};
    AntennaPattern directional_antenna = AntennaPattern::directional();
    MeasurementParams measurement;
    std::vector<RescuerSpec> rescuers;
    TimingParams timing;
    NetworkParams network;
    InitialFix initial_fix;
    std::uint64_t seed = 0;

    friend bool operator==(const Scenario&, const Scenario&) = default;

    const ChannelConfig& channel() const { return channels.at(target.tx_profile); }
};

class ScenarioError : public std::runtime_error {
public:
    enum class Kind { parse, validation };
    ScenarioError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

/// Parses and validates a scenario document (JSON). Throws ScenarioError.
Scenario load_scenario(std::string_view text);
Scenario load_scenario_file(const std::string& path);
std::string serialize_scenario(const Scenario& scenario);

/// Throws ScenarioError(validation) naming the first violated invariant.
void validate_scenario(const Scenario& scenario);

struct ObstructionCount {
    int exterior_walls = 0;
    int interior_walls = 0;
    int floors_crossed = 0;

    friend bool operator==(const ObstructionCount&, const ObstructionCount&) = default;
};

/// Wall and slab crossings along the straight segment a->b (3D).
ObstructionCount walls_between(const Pose& a, const Pose& b, const Scenario& scenario);

/// Arc-length parameterized point on a route; heading is the tangent direction.
/// Throws std::out_of_range when s is outside [0, length].
Pose route_point_at(std::span<const Vec2> route, double s);

/// Room containing p on the given floor, if any.
std::optional<int> room_at(const Building& building, int floor, Vec2 p);
/// Building whose footprint contains p, if any.
std::optional<int> building_at(const Scenario& scenario, Vec2 p);

/// Uniform point inside a room, keeping a margin from the walls.
Pose pose_in_room(const Scenario& scenario, int building, int floor, int room, double u, double v,
                  double margin = 0.5);

}  // namespace helps

#endif  // HELPS_WORLD_HPP
