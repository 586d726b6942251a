// SPDX-FileCopyrightText: Copyright (c) 2026 The helps-sim Authors
// SPDX-License-Identifier: Apache-2.0

// End-to-end search sessions. SessionRunner advances SME agents, the LCS
// service and the LCS-side search logic on one logical clock; every exchange
// between agents and the LCS crosses a virtual link as a protocol Message.
//
//   setup -> building_search -> move_to_peak -> building_confirm
//         -> floor_room_search -> room_confirm -> found
//
// building_confirm may fall back to building_search (wrong building) and
// room_confirm to floor_room_search (wrong room). An outdoor caller is found
// on sight from any outdoor phase. Any live phase may end in failed.

#ifndef HELPS_ORCHESTRATOR_HPP
#define HELPS_ORCHESTRATOR_HPP

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "helps/service.hpp"

namespace helps {

enum class Phase { setup, building_search, move_to_peak, building_confirm, floor_room_search, room_confirm, found, failed };

std::string_view to_string(Phase phase);
Phase phase_from_string(std::string_view name);  // throws std::invalid_argument
bool transition_allowed(Phase from, Phase to);

enum class Policy { helps, knock_baseline };
std::string_view to_string(Policy policy);
Policy policy_from_string(std::string_view name);  // throws std::invalid_argument

struct SearchOutcome {
    bool success = false;
    std::optional<double> building_id_time_s;
    std::optional<double> room_id_time_s;
    double total_time_s = 0.0;
    bool building_correct = false;
    bool room_correct = false;
    std::map<std::string, double> distance_m;  // per rescuer
    std::optional<int> building;  // identified
    std::optional<int> floor;
    std::optional<int> room;
    int retries = 0;
    std::string reason;  // found | building_identified | timeout | target_unreachable | retries_exhausted | no_signal
    Phase final_phase = Phase::setup;

    friend bool operator==(const SearchOutcome&, const SearchOutcome&) = default;
};

nlohmann::json to_json(const SearchOutcome& outcome);

struct RunOptions {
    /// Start the floor phase at the caller's building, as in room-search runs.
    bool building_known = false;
    /// End the session once a building is confirmed.
    bool stop_after_building = false;
    std::optional<std::filesystem::path> persist_dir;
};

struct SessionResult {
    SearchOutcome outcome;
    std::vector<EventRecord> events;
    std::vector<Phase> phases;  // visited phases in order, starting with setup
};

/// Buildings whose footprint lies within radius of p.
std::vector<int> candidate_buildings(const Scenario& scenario, Vec2 p, double radius_m);

/// Candidates ordered best first. Each sweep votes for the first footprint its
/// argmax ray enters; ties follow the first sweep's ray order, then angular
/// distance between the argmax bearing and the building centroid.
/// Throws std::invalid_argument when sweeps or candidates are empty.
std::vector<int> rank_buildings(std::span<const BearingProfile> sweeps, const Scenario& scenario,
                                std::span<const int> candidates);
int building_confirm(const BearingProfile& sweep, const Scenario& scenario, std::span<const int> candidates);

/// Rooms of one floor ordered best first: votes from every room each argmax
/// ray crosses, ties to the room whose centroid is nearest the peak.
/// Throws std::invalid_argument when there are no sweeps or no rooms.
std::vector<int> rank_rooms(std::span<const BearingProfile> sweeps, const Building& building, int floor, Vec2 peak);
int room_confirm(std::span<const BearingProfile> sweeps, const Building& building, int floor, Vec2 peak);

/// Door-knocking comparison policy inside the caller's building. Throws
/// std::invalid_argument for an outdoor caller.
SearchOutcome knock_baseline(const Scenario& scenario, std::uint64_t seed);

class SessionRunner {
public:
    SessionRunner(Scenario scenario, std::uint64_t seed, RunOptions options = {});
    ~SessionRunner();
    SessionRunner(const SessionRunner&) = delete;
    SessionRunner& operator=(const SessionRunner&) = delete;

    /// Advances one tick. Returns frames addressed to clients that are not
    /// simulated SMEs (consoles attached through handle_client).
    std::vector<Outbound> step();
    /// Frames from an external console or admin, applied at the current clock.
    std::vector<Outbound> handle_client(const Message& message);

    bool done() const;
    double clock() const;
    Phase phase() const;
    const std::string& session_id() const;
    SessionResult result() const;
    /// Most recent contour map the search logic acted on.
    const std::optional<ContourMap>& last_map() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Runs a full session to completion (found, failed or timeout).
SessionResult run_session(const Scenario& scenario, Policy policy, std::uint64_t seed, const RunOptions& options = {});

}  // namespace helps

#endif  // HELPS_ORCHESTRATOR_HPP
