// SPDX-FileCopyrightText: Copyright (c) 2026 The helps-sim Authors
// SPDX-License-Identifier: Apache-2.0

#include "helps/orchestrator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <limits>
#include <set>
#include <stdexcept>

#include "helps/rf.hpp"
#include "helps/rng.hpp"
#include "helps/transport.hpp"

namespace helps {

namespace {

constexpr std::array<std::string_view, 8> kPhaseNames = {
    "setup", "building_search", "move_to_peak", "building_confirm", "floor_room_search", "room_confirm", "found", "failed"};

constexpr const char* kPlanner = "lcs-planner";
constexpr const char* kDispatcher = "dispatcher";
constexpr const char* kSimToken = "sim-token";
constexpr double kBuildingSweepSpacingM = 20.0;
constexpr int kMaxHomingSteps = 60;
constexpr double kRayRangeM = 1e4;

}  // namespace

std::string_view to_string(Phase phase) { return kPhaseNames.at(static_cast<std::size_t>(phase)); }

Phase phase_from_string(std::string_view name) {
    for (std::size_t i = 0; i < kPhaseNames.size(); ++i) {
        if (kPhaseNames[i] == name) return static_cast<Phase>(i);
    }
    throw std::invalid_argument("unknown phase '" + std::string(name) + "'");
}

bool transition_allowed(Phase from, Phase to) {
    if (from == Phase::found || from == Phase::failed) return false;
    if (to == Phase::failed) return true;
    switch (from) {
        case Phase::setup: return to == Phase::building_search;
        case Phase::building_search: return to == Phase::move_to_peak || to == Phase::found;
        case Phase::move_to_peak: return to == Phase::building_confirm || to == Phase::found;
        case Phase::building_confirm:
            return to == Phase::floor_room_search || to == Phase::building_search || to == Phase::found;
        case Phase::floor_room_search: return to == Phase::room_confirm;
        case Phase::room_confirm: return to == Phase::found || to == Phase::floor_room_search;
        default: return false;
    }
}

std::string_view to_string(Policy policy) { return policy == Policy::helps ? "helps" : "knock_baseline"; }

Policy policy_from_string(std::string_view name) {
    if (name == "helps") return Policy::helps;
    if (name == "knock_baseline" || name == "knock-baseline" || name == "knock") return Policy::knock_baseline;
    throw std::invalid_argument("unknown policy '" + std::string(name) + "'");
}

nlohmann::json to_json(const SearchOutcome& o) {
    nlohmann::json j = {{"success", o.success},
                        {"total_time_s", o.total_time_s},
                        {"building_correct", o.building_correct},
                        {"room_correct", o.room_correct},
                        {"distance_m", o.distance_m},
                        {"retries", o.retries},
                        {"reason", o.reason},
                        {"final_phase", std::string(to_string(o.final_phase))}};
    const auto opt = [&](const char* key, const auto& v) {
        j[key] = v ? nlohmann::json(*v) : nlohmann::json(nullptr);
    };
    opt("building_id_time_s", o.building_id_time_s);
    opt("room_id_time_s", o.room_id_time_s);
    opt("building", o.building);
    opt("floor", o.floor);
    opt("room", o.room);
    return j;
}

std::vector<int> candidate_buildings(const Scenario& scenario, Vec2 p, double radius_m) {
    std::vector<int> out;
    for (std::size_t i = 0; i < scenario.buildings.size(); ++i) {
        if (scenario.buildings[i].footprint.distance_to(p) <= radius_m) out.push_back(static_cast<int>(i));
    }
    return out;
}

namespace {

/// Candidates hit by the argmax ray, nearest first.
std::vector<int> ray_hits(const BearingProfile& sweep, const Scenario& scenario, std::span<const int> candidates) {
    std::vector<std::pair<double, int>> hits;
    for (int b : candidates) {
        const auto d = ray_hit_distance(sweep.position.xy(), sweep.argmax_bearing_rad,
                                        scenario.buildings.at(static_cast<std::size_t>(b)).footprint, kRayRangeM);
        if (d) hits.emplace_back(*d, b);
    }
    std::sort(hits.begin(), hits.end());
    std::vector<int> out;
    for (const auto& h : hits) out.push_back(h.second);
    return out;
}

}  // namespace

std::vector<int> rank_buildings(std::span<const BearingProfile> sweeps, const Scenario& scenario,
                                std::span<const int> candidates) {
    if (sweeps.empty()) throw std::invalid_argument("rank_buildings: no sweeps");
    if (candidates.empty()) throw std::invalid_argument("rank_buildings: no candidate buildings");
    std::map<int, int> votes;
    for (const auto& s : sweeps) {
        const auto hits = ray_hits(s, scenario, candidates);
        if (!hits.empty()) ++votes[hits.front()];
    }
    // Order implied by the first sweep alone: ray hits by distance, then the
    // rest by angular distance to the argmax bearing.
    const BearingProfile& first = sweeps.front();
    std::vector<int> order = ray_hits(first, scenario, candidates);
    std::vector<std::pair<double, int>> rest;
    for (int b : candidates) {
        if (std::find(order.begin(), order.end(), b) != order.end()) continue;
        const Vec2 c = scenario.buildings.at(static_cast<std::size_t>(b)).footprint.center();
        const double off = std::abs(wrap_angle(bearing(first.position.xy(), c) - first.argmax_bearing_rad));
        rest.emplace_back(off, b);
    }
    std::sort(rest.begin(), rest.end());
    for (const auto& r : rest) order.push_back(r.second);

    std::vector<int> ranked = order;
    std::stable_sort(ranked.begin(), ranked.end(), [&](int a, int b) {
        const int va = votes.count(a) ? votes[a] : 0;
        const int vb = votes.count(b) ? votes[b] : 0;
        return va > vb;
    });
    return ranked;
}

int building_confirm(const BearingProfile& sweep, const Scenario& scenario, std::span<const int> candidates) {
    return rank_buildings(std::span<const BearingProfile>(&sweep, 1), scenario, candidates).front();
}

std::vector<int> rank_rooms(std::span<const BearingProfile> sweeps, const Building& building, int floor, Vec2 peak) {
    if (sweeps.empty()) throw std::invalid_argument("rank_rooms: no sweeps");
    const auto& rooms = building.floors.at(static_cast<std::size_t>(floor)).rooms;
    if (rooms.empty()) throw std::invalid_argument("rank_rooms: floor has no rooms");
    std::vector<int> votes(rooms.size(), 0);
    for (const auto& s : sweeps) {
        for (std::size_t i = 0; i < rooms.size(); ++i) {
            if (ray_hit_distance(s.position.xy(), s.argmax_bearing_rad, rooms[i], kRayRangeM)) ++votes[i];
        }
    }
    std::vector<int> order(rooms.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        const auto ia = static_cast<std::size_t>(a);
        const auto ib = static_cast<std::size_t>(b);
        if (votes[ia] != votes[ib]) return votes[ia] > votes[ib];
        return distance(rooms[ia].center(), peak) < distance(rooms[ib].center(), peak);
    });
    return order;
}

int room_confirm(std::span<const BearingProfile> sweeps, const Building& building, int floor, Vec2 peak) {
    return rank_rooms(sweeps, building, floor, peak).front();
}

namespace {

// --- movement model shared by agents (execution) and the planner (estimates)

struct Place {
    Vec2 xy;
    std::optional<int> building;
    int floor = 0;
};

enum class ActKind { walk, enter, exit, floor_change, sweep, door_check };

struct Action {
    ActKind kind = ActKind::walk;
    Polyline path;
    bool indoor = false;
    int building = 0;
    int floor = 0;
    int room = -1;
    double duration_s = 0.0;
    int n_bearings = 0;
    double dwell_s = 0.0;
    bool started = false;
    double elapsed_s = 0.0;
    BearingProfile profile;
};

Vec2 nearest_corridor_end(const Building& b, int floor, Vec2 p) {
    const Polyline& c = b.floors.at(static_cast<std::size_t>(floor)).corridor;
    return distance(p, c.front()) <= distance(p, c.back()) ? c.front() : c.back();
}

/// Legs from a pose to a place: leave or enter buildings through the
/// entrance, change floors at the nearest corridor end, otherwise straight lines.
std::vector<Action> plan_travel(const Scenario& sc, const Pose& from, const Place& to) {
    std::vector<Action> out;
    Vec2 cur = from.xy();
    std::optional<int> b = from.building_index;
    int f = from.floor_index.value_or(0);
    const auto walk = [&](Vec2 dst) {
        if (distance(cur, dst) > 1e-6) {
            Action a;
            a.kind = ActKind::walk;
            a.path = {cur, dst};
            a.indoor = b.has_value();
            out.push_back(std::move(a));
        }
        cur = dst;
    };
    const auto stairs_to = [&](int target_floor) {
        if (f == target_floor) return;
        walk(nearest_corridor_end(sc.buildings.at(static_cast<std::size_t>(*b)), f, cur));
        Action a;
        a.kind = ActKind::floor_change;
        a.building = *b;
        a.floor = target_floor;
        a.duration_s = sc.timing.floor_change_s;
        out.push_back(std::move(a));
        f = target_floor;
    };
    if (b && (!to.building || *to.building != *b)) {
        stairs_to(0);
        walk(sc.buildings.at(static_cast<std::size_t>(*b)).entrance());
        Action a;
        a.kind = ActKind::exit;
        out.push_back(std::move(a));
        b.reset();
        f = 0;
    }
    if (!b && to.building) {
        walk(sc.buildings.at(static_cast<std::size_t>(*to.building)).entrance());
        Action a;
        a.kind = ActKind::enter;
        a.building = *to.building;
        a.floor = 0;
        out.push_back(std::move(a));
        b = to.building;
        f = 0;
    }
    if (b) stairs_to(to.floor);
    walk(to.xy);
    return out;
}

double travel_time(const Scenario& sc, const Pose& from, const Place& to, double outdoor_speed) {
    double t = 0.0;
    for (const auto& a : plan_travel(sc, from, to)) {
        if (a.kind == ActKind::walk) {
            t += polyline_length(a.path) / (a.indoor ? sc.timing.foot_speed_mps : outdoor_speed);
        } else {
            t += a.duration_s;
        }
    }
    return t;
}

Vec2 snap_to_roads(const Scenario& sc, Vec2 p) {
    Vec2 best = p;
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto& road : sc.roads) {
        for (std::size_t i = 0; i + 1 < road.size(); ++i) {
            const Vec2 q = closest_point_on_segment(road[i], road[i + 1], p);
            if (distance(p, q) < best_d) {
                best_d = distance(p, q);
                best = q;
            }
        }
    }
    return best;
}

Vec2 road_direction_at(const Scenario& sc, Vec2 p) {
    Vec2 dir{1.0, 0.0};
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto& road : sc.roads) {
        for (std::size_t i = 0; i + 1 < road.size(); ++i) {
            const double d = distance(p, closest_point_on_segment(road[i], road[i + 1], p));
            const Vec2 seg = road[i + 1] - road[i];
            if (d < best_d && seg.norm() > 0.0) {
                best_d = d;
                dir = seg * (1.0 / seg.norm());
            }
        }
    }
    return dir;
}

/// Point 1 m beyond the far side of a building along the line from the
/// sweep position (through the argmax ray when it hits, else the centroid).
Vec2 verification_point(const BearingProfile& sweep, const Building& b) {
    const Vec2 origin = sweep.position.xy();
    Vec2 dir{std::cos(sweep.argmax_bearing_rad), std::sin(sweep.argmax_bearing_rad)};
    auto clip = clip_segment(origin, origin + dir * kRayRangeM, b.footprint);
    if (!clip) {
        const Vec2 to_c = b.footprint.center() - origin;
        if (to_c.norm() < 1e-9) return {b.footprint.center().x, b.footprint.y0 - 1.0};
        dir = to_c * (1.0 / to_c.norm());
        clip = clip_segment(origin, origin + dir * kRayRangeM, b.footprint);
    }
    return origin + dir * (clip->second * kRayRangeM + 1.0);
}

/// First building hit by a sweep's argmax ray, over all buildings.
std::optional<int> first_hit(const BearingProfile& sweep, const Scenario& sc) {
    std::vector<int> all(sc.buildings.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    const auto hits = ray_hits(sweep, sc, all);
    if (hits.empty()) return std::nullopt;
    return hits.front();
}

Vec2 door_point(const Building& b, int floor, int room) {
    const Floor& f = b.floors.at(static_cast<std::size_t>(floor));
    const Vec2 c = f.rooms.at(static_cast<std::size_t>(room)).center();
    return polyline_at(f.corridor, polyline_project(f.corridor, c)).point;
}

// --- SME agents

struct Agent {
    RescuerSpec spec;
    SmeState sme;
    Rng rng;
    std::optional<ChannelConfig> config;
    std::deque<TaskAssignmentMsg> tasks;
    std::optional<TaskAssignmentMsg> current;
    std::deque<Action> actions;
    double distance_m = 0.0;
    std::uint64_t seq = 1;
    bool ready_sent = false;
    VirtualLink<Message> up_reports;
    VirtualLink<Message> up_control;
    VirtualLink<Message> down;

    Agent(RescuerSpec s, std::uint64_t seed, std::size_t index, const NetworkParams& net)
        : spec(std::move(s)),
          rng(derive_seed(seed, "sme", index)),
          up_reports(LinkParams::from(net), derive_seed(seed, "uplink-reports", index)),
          up_control(LinkParams::from(net), derive_seed(seed, "uplink-control", index), true, net.retry_timeout_s),
          down(LinkParams::from(net), derive_seed(seed, "downlink", index), true, net.retry_timeout_s) {
        sme.id = spec.id;
        sme.pose = spec.start;
        sme.speed_mps = spec.speed_mps;
    }
};

}  // namespace

struct SessionRunner::Impl {
    enum class Stage { none, first_sweep, verify_sweep, homing, room_sweeps, door_check };

    Scenario sc;
    std::uint64_t seed;
    RunOptions options;
    double t = 0.0;
    ShadowingField shadowing;
    std::unique_ptr<LcsService> service;
    std::string session;
    std::vector<Agent> agents;
    std::map<std::string, std::size_t> agent_index;
    Vec2 fix;

    // Planner state. Reads only what reached it through messages, except
    // where noted for the given-building option and scoring.
    Phase phase = Phase::setup;
    std::vector<Phase> phases{Phase::setup};
    std::uint64_t planner_seq = 1;
    std::uint64_t plan_revision = 0;
    std::map<std::string, int> outstanding;
    std::map<std::string, Pose> known_pose;
    std::set<std::string> ready;
    Stage stage = Stage::none;
    std::vector<BearingProfile> sweeps;
    std::size_t sweeps_expected = 0;
    std::string mover;
    BearingProfile anchor_sweep;
    std::vector<int> building_rank;
    std::size_t building_idx = 0;
    std::optional<int> building;
    std::vector<int> room_rank;
    std::size_t room_idx = 0;
    int room_floor = 0;
    Vec2 room_peak;
    std::optional<bool> door_result;
    int homing_steps = 0;
    int retries = 0;
    std::optional<double> building_time;
    std::optional<double> room_time;
    std::optional<ContourMap> last_map;

    bool finished = false;
    SearchOutcome outcome;
    std::vector<Outbound> external;

    Impl(Scenario scenario, std::uint64_t seed_, RunOptions opts)
        : sc(std::move(scenario)), seed(seed_), options(std::move(opts)) {
        validate_scenario(sc);
        shadowing = ShadowingField(sc, derive_seed(seed, "shadowing"));
        fix = {sc.initial_fix.x, sc.initial_fix.y};
        if (sc.initial_fix.noisy) {
            Rng r = make_rng(seed, "initial-fix");
            std::normal_distribution<double> n(0.0, sc.initial_fix.radius_3sigma_m / 3.0);
            fix = sc.target.pose.xy() + Vec2{n(r), n(r)};
        }

        ServiceConfig cfg;
        cfg.token = kSimToken;
        cfg.setup_delay_s = sc.network.setup_delay_s;
        cfg.recompute_interval_s = sc.timing.lcs_interval_s;
        cfg.preloaded_config = sc.network.preloaded_config;
        if (sc.network.target_unreachable) cfg.unreachable_targets.insert(sc.channel().target_id);
        cfg.world = sc;
        // The LCS never learns where the caller is.
        cfg.world.target.pose = outdoor_pose(sc.extent.center());
        cfg.world.target.room_index.reset();
        cfg.estimate_window = static_cast<std::size_t>(sc.timing.estimate_window);
        cfg.persist_dir = options.persist_dir;
        service = std::make_unique<LcsService>(std::move(cfg));

        for (std::size_t i = 0; i < sc.rescuers.size(); ++i) {
            agents.emplace_back(sc.rescuers[i], seed, i, sc.network);
            agent_index[sc.rescuers[i].id] = i;
            outstanding[sc.rescuers[i].id] = 0;
            service->handle(Message{std::string(kSchemaVersion), "", sc.rescuers[i].id, 0,
                                    Hello{ClientRole::sme, sc.rescuers[i].id, kSimToken}},
                            0.0);
        }
        service->handle(Message{std::string(kSchemaVersion), "", kDispatcher, 0,
                                Hello{ClientRole::admin, kDispatcher, kSimToken}},
                        0.0);
        const auto reply = service->handle(Message{std::string(kSchemaVersion), "", kDispatcher, 1,
                                                   CallConnectRequest{sc.channel().target_id, kDispatcher}},
                                           0.0);
        if (reply.empty() || !std::holds_alternative<Ack>(reply.front().message.body)) {
            const auto* err = reply.empty() ? nullptr : std::get_if<ErrorMsg>(&reply.front().message.body);
            finish(false, err ? err->code : "call_rejected");
            return;
        }
        session = reply.front().message.session_id;
        if (sc.network.preloaded_config) {
            for (auto& a : agents) {
                ChannelConfig c = sc.channel();
                a.config = c;
                send_event(a, "ready", pose_payload(a.sme.pose), 0.0);
                a.ready_sent = true;
            }
        }
    }

    // --- shared helpers

    static nlohmann::json pose_payload(const Pose& p) {
        nlohmann::json j = {{"x", p.x}, {"y", p.y}};
        if (p.building_index) {
            j["building"] = *p.building_index;
            j["floor"] = p.floor_index.value_or(0);
        }
        return j;
    }

    static Pose pose_from_payload(const nlohmann::json& j, const Scenario& sc) {
        const Vec2 p{j.at("x").get<double>(), j.at("y").get<double>()};
        if (j.contains("building")) {
            const int b = j.at("building").get<int>();
            return indoor_pose(p, b, j.at("floor").get<int>(), sc.buildings.at(static_cast<std::size_t>(b)).floor_height);
        }
        return outdoor_pose(p);
    }

    void log(const std::string& event, nlohmann::json payload) {
        if (!session.empty()) service->log_event(session, {t, kPlanner, event, std::move(payload)});
    }

    void enter(Phase to, nlohmann::json detail = nlohmann::json::object()) {
        if (!transition_allowed(phase, to)) {
            throw std::logic_error("illegal phase transition " + std::string(to_string(phase)) + " -> " +
                                   std::string(to_string(to)));
        }
        detail["from"] = std::string(to_string(phase));
        detail["to"] = std::string(to_string(to));
        log("phase", std::move(detail));
        phase = to;
        phases.push_back(to);
    }

    // --- agent side

    void send_event(Agent& a, const std::string& event, nlohmann::json payload, double when) {
        a.up_control.send(Message{std::string(kSchemaVersion), session, a.spec.id, a.seq++,
                                  SessionEventMsg{{when, a.spec.id, event, std::move(payload)}}},
                          when);
    }

    void agent_receive(Agent& a, const Message& m) {
        if (const auto* cfg = std::get_if<ChannelConfigMsg>(&m.body)) {
            a.config = cfg->config;
            if (!a.ready_sent) {
                a.ready_sent = true;
                send_event(a, "ready", pose_payload(a.sme.pose), t);
            }
        } else if (const auto* task = std::get_if<TaskAssignmentMsg>(&m.body)) {
            if (m.sender != kPlanner) {
                // Console override replaces whatever the rescuer was doing.
                a.tasks.clear();
                a.actions.clear();
                a.current.reset();
            }
            a.tasks.push_back(*task);
        }
    }

    void expand(Agent& a, const TaskAssignmentMsg& task) {
        const auto place_for = [&](Vec2 p) {
            Place pl{p, task.building, task.floor.value_or(0)};
            return pl;
        };
        switch (task.kind) {
            case TaskKind::route: {
                if (task.route.empty()) break;
                for (auto& act : plan_travel(sc, a.sme.pose, place_for(task.route.front()))) a.actions.push_back(act);
                if (task.route.size() >= 2) {
                    Action w;
                    w.kind = ActKind::walk;
                    w.path = task.route;
                    w.indoor = task.building.has_value();
                    a.actions.push_back(std::move(w));
                }
                break;
            }
            case TaskKind::sweep: {
                Action s;
                s.kind = ActKind::sweep;
                s.n_bearings = task.n_bearings;
                s.dwell_s = task.dwell_s;
                s.duration_s = task.n_bearings * task.dwell_s;
                a.actions.push_back(std::move(s));
                break;
            }
            case TaskKind::door_check: {
                if (!task.building || !task.floor || !task.room) break;
                const Building& b = sc.buildings.at(static_cast<std::size_t>(*task.building));
                const Vec2 door = task.route.empty() ? door_point(b, *task.floor, *task.room) : task.route.front();
                for (auto& act : plan_travel(sc, a.sme.pose, place_for(door))) a.actions.push_back(act);
                Action d;
                d.kind = ActKind::door_check;
                d.building = *task.building;
                d.floor = *task.floor;
                d.room = *task.room;
                d.duration_s = sc.timing.door_check_s;
                a.actions.push_back(std::move(d));
                break;
            }
            case TaskKind::hold: break;
        }
    }

    void agent_advance(Agent& a, double t0, double t1) {
        const ChannelConfig cfg = a.config.value_or(sc.channel());
        double now = t0;
        while (now < t1 - 1e-12) {
            if (a.actions.empty()) {
                if (a.current) {
                    nlohmann::json p = pose_payload(a.sme.pose);
                    p["kind"] = static_cast<int>(a.current->kind);
                    p["plan_revision"] = a.current->plan_revision;
                    send_event(a, "task_done", std::move(p), now);
                    a.current.reset();
                }
                if (a.tasks.empty()) break;
                a.current = a.tasks.front();
                a.tasks.pop_front();
                expand(a, *a.current);
                continue;
            }
            Action& act = a.actions.front();
            switch (act.kind) {
                case ActKind::walk: {
                    const double speed = act.indoor ? sc.timing.foot_speed_mps : a.spec.speed_mps;
                    if (!act.started) {
                        helps::assign_route(a.sme, act.path);
                        a.sme.speed_mps = speed;
                        act.started = true;
                    }
                    const double length = polyline_length(a.sme.route);
                    const double need = (length - a.sme.progress_m) / speed;
                    const double dt = std::min(t1 - now, need);
                    if (dt > 1e-12) {
                        a.sme.clock_s = now;
                        const auto reports = helps::step(a.sme, dt, sc, cfg, &shadowing, a.rng);
                        if (a.config) {
                            for (const auto& r : reports) {
                                a.up_reports.send(Message{std::string(kSchemaVersion), session, a.spec.id, a.seq++,
                                                          MeasurementReportMsg{r}},
                                                  r.timestamp_s);
                            }
                        }
                        a.distance_m += speed * dt;
                        now += dt;
                    }
                    if (need - dt <= 1e-9) a.actions.pop_front();
                    break;
                }
                case ActKind::enter:
                    a.sme.pose = indoor_pose(a.sme.pose.xy(), act.building, act.floor,
                                             sc.buildings.at(static_cast<std::size_t>(act.building)).floor_height,
                                             a.sme.pose.heading);
                    a.actions.pop_front();
                    break;
                case ActKind::exit:
                    a.sme.pose = outdoor_pose(a.sme.pose.xy(), a.sme.pose.heading);
                    a.actions.pop_front();
                    break;
                case ActKind::floor_change:
                case ActKind::door_check:
                case ActKind::sweep: {
                    if (!act.started) {
                        act.started = true;
                        if (act.kind == ActKind::sweep) {
                            a.sme.clock_s = now;
                            a.sme.mode = MeasureMode::directional;
                            act.profile = directional_sweep(a.sme, act.n_bearings, act.dwell_s, sc, cfg, &shadowing,
                                                            a.rng)
                                              .profile;
                            a.sme.mode = MeasureMode::omni;
                        }
                    }
                    const double dt = std::min(t1 - now, act.duration_s - act.elapsed_s);
                    act.elapsed_s += dt;
                    now += dt;
                    if (act.elapsed_s < act.duration_s - 1e-9) break;
                    if (act.kind == ActKind::floor_change) {
                        a.sme.pose = indoor_pose(a.sme.pose.xy(), act.building, act.floor,
                                                 sc.buildings.at(static_cast<std::size_t>(act.building)).floor_height,
                                                 a.sme.pose.heading);
                    } else if (act.kind == ActKind::door_check) {
                        const auto& tp = sc.target;  // ground truth: what the rescuer sees behind the door
                        const bool occupied = tp.pose.building_index == act.building &&
                                              tp.pose.floor_index == act.floor && tp.room_index == act.room;
                        send_event(a, "door_check",
                                   {{"building", act.building}, {"floor", act.floor}, {"room", act.room},
                                    {"occupied", occupied}},
                                   now);
                    } else {
                        a.up_control.send(Message{std::string(kSchemaVersion), session, a.spec.id, a.seq++,
                                                  SweepResultMsg{act.profile}},
                                          now);
                    }
                    a.actions.pop_front();
                    break;
                }
            }
        }
        a.sme.clock_s = t1;
    }

    // --- planner side

    void assign(const std::string& id, TaskAssignmentMsg task) {
        task.rescuer_id = id;
        task.plan_revision = plan_revision;
        ++outstanding[id];
        log("task_assigned", {{"rescuer_id", id}, {"kind", static_cast<int>(task.kind)}, {"plan_revision", plan_revision}});
        agents.at(agent_index.at(id))
            .down.send(Message{std::string(kSchemaVersion), session, kPlanner, planner_seq++, std::move(task)}, t);
    }

    void assign_route(const std::string& id, Polyline route, PlanPhase phase_tag, std::optional<int> b = std::nullopt,
                      std::optional<int> f = std::nullopt) {
        TaskAssignmentMsg task;
        task.kind = TaskKind::route;
        task.phase = phase_tag;
        task.route = std::move(route);
        task.building = b;
        task.floor = f;
        if (f) task.floors = {*f};
        assign(id, std::move(task));
    }

    void assign_sweep(const std::string& id, PlanPhase phase_tag, int n, double dwell) {
        TaskAssignmentMsg task;
        task.kind = TaskKind::sweep;
        task.phase = phase_tag;
        task.n_bearings = n;
        task.dwell_s = dwell;
        assign(id, std::move(task));
    }

    bool all_idle() const {
        return std::all_of(outstanding.begin(), outstanding.end(), [](const auto& kv) { return kv.second <= 0; });
    }

    void planner_receive(const Message& m) {
        if (const auto* ev = std::get_if<SessionEventMsg>(&m.body)) {
            const EventRecord& r = ev->record;
            if (r.event == "ready") {
                ready.insert(r.actor);
                known_pose[r.actor] = pose_from_payload(r.payload, sc);
            } else if (r.event == "task_done") {
                --outstanding[r.actor];
                known_pose[r.actor] = pose_from_payload(r.payload, sc);
            } else if (r.event == "door_check") {
                door_result = r.payload.at("occupied").get<bool>();
            }
        } else if (const auto* sw = std::get_if<SweepResultMsg>(&m.body)) {
            sweeps.push_back(sw->profile);
        } else if (const auto* rep = std::get_if<MeasurementReportMsg>(&m.body)) {
            known_pose[rep->report.sme_id] = rep->report.pose;
        }
    }

    std::vector<PlanRescuer> plan_rescuers() const {
        std::vector<PlanRescuer> out;
        for (const auto& a : agents) out.push_back({a.spec.id, known_pose.at(a.spec.id).xy()});
        return out;
    }

    std::string fastest_to(const Place& place) const {
        std::string best;
        double best_t = std::numeric_limits<double>::infinity();
        for (const auto& a : agents) {
            const double tt = travel_time(sc, known_pose.at(a.spec.id), place, a.spec.speed_mps);
            if (tt < best_t - 1e-9) {
                best_t = tt;
                best = a.spec.id;
            }
        }
        return best;
    }

    void start_building_phase() {
        const SearchBoundary boundary = circular_boundary(fix, sc.initial_fix.radius_3sigma_m);
        Rect area = boundary.bounding_rect.intersect(sc.extent);
        if (!area.valid()) area = sc.extent;
        ++plan_revision;
        const SearchPlan plan = plan_building_search(area, plan_rescuers(), sc.roads, sc.timing.lane_spacing_m);
        enter(Phase::building_search,
              {{"area", {area.x0, area.y0, area.x1, area.y1}}, {"fix", {fix.x, fix.y}}});
        for (const auto& as : plan.assignments) {
            for (const auto& route : as.routes) assign_route(as.rescuer_id, route, PlanPhase::building);
        }
    }

    /// Sends the mover to each building sweep position around `at`.
    void start_building_sweeps(Vec2 at) {
        const int k = sc.timing.building_sweep_positions;
        const Vec2 dir = road_direction_at(sc, at);
        sweeps.clear();
        sweeps_expected = static_cast<std::size_t>(k);
        for (int i = 0; i < k; ++i) {
            const Vec2 p = at + dir * (kBuildingSweepSpacingM * (i - 0.5 * (k - 1)));
            if (i > 0) assign_route(mover, {p}, PlanPhase::building);
            assign_sweep(mover, PlanPhase::building, sc.timing.building_sweep_bearings, sc.timing.building_sweep_dwell_s);
        }
    }

    void send_to_verification(int candidate) {
        const Vec2 vp = verification_point(anchor_sweep, sc.buildings.at(static_cast<std::size_t>(candidate)));
        assign_route(mover, {vp}, PlanPhase::building);
        assign_sweep(mover, PlanPhase::building, sc.timing.building_sweep_bearings, sc.timing.building_sweep_dwell_s);
        sweeps.clear();
        sweeps_expected = 1;
        stage = Stage::verify_sweep;
        log("building_verify", {{"building", candidate}, {"x", vp.x}, {"y", vp.y}});
    }

    void confirm_building(int b) {
        building = b;
        building_time = t;
        log("building_identified", {{"building", b}});
        if (options.stop_after_building) {
            finish(b == sc.target.pose.building_index, "building_identified");
            return;
        }
        enter(Phase::floor_room_search, {{"building", b}});
        start_floor_phase();
    }

    void start_floor_phase() {
        ++plan_revision;
        const Building& b = sc.buildings.at(static_cast<std::size_t>(*building));
        const SearchPlan plan = plan_floor_search(b, plan_rescuers());
        for (const auto& as : plan.assignments) {
            for (std::size_t i = 0; i < as.floors.size(); ++i) {
                assign_route(as.rescuer_id, as.routes[i], PlanPhase::floor_room, *building, as.floors[i]);
            }
        }
        stage = Stage::none;
    }

    void handle_candidates(const std::vector<int>& candidates) {
        building_rank = rank_buildings(sweeps, sc, candidates);
        building_idx = 0;
        anchor_sweep = sweeps.front();
        log("building_candidates", {{"ranked", building_rank}, {"argmax_bearing_rad", anchor_sweep.argmax_bearing_rad}});
        if (sc.timing.verify_building) {
            send_to_verification(building_rank.front());
        } else {
            confirm_building(building_rank.front());
        }
    }

    void homing_step() {
        const BearingProfile& s = sweeps.back();
        const Vec2 p = s.position.xy();
        Vec2 next = p + Vec2{std::cos(s.argmax_bearing_rad), std::sin(s.argmax_bearing_rad)} * sc.timing.homing_step_m;
        next = {std::clamp(next.x, sc.extent.x0, sc.extent.x1), std::clamp(next.y, sc.extent.y0, sc.extent.y1)};
        ++homing_steps;
        log("homing_step", {{"x", next.x}, {"y", next.y}, {"step", homing_steps}});
        assign_route(mover, {next}, PlanPhase::building);
        assign_sweep(mover, PlanPhase::building, sc.timing.building_sweep_bearings, sc.timing.building_sweep_dwell_s);
        sweeps.clear();
        sweeps_expected = 1;
        stage = Stage::homing;
    }

    void decide_room() {
        const int room = room_rank.at(room_idx);
        room_time = t;
        log("room_identified", {{"building", *building}, {"floor", room_floor}, {"room", room}});
        TaskAssignmentMsg task;
        task.kind = TaskKind::door_check;
        task.phase = PlanPhase::floor_room;
        task.building = *building;
        task.floor = room_floor;
        task.room = room;
        task.route = {door_point(sc.buildings.at(static_cast<std::size_t>(*building)), room_floor, room)};
        door_result.reset();
        assign(mover, std::move(task));
        stage = Stage::door_check;
    }

    void planner_update() {
        switch (phase) {
            case Phase::setup: {
                if (service->status(session) != SessionStatus::active || ready.size() < agents.size()) return;
                if (options.building_known && sc.target.pose.building_index) {
                    // Given building: walk the graph without searching.
                    const int b = *sc.target.pose.building_index;
                    enter(Phase::building_search, {{"given", true}});
                    enter(Phase::move_to_peak, {{"given", true}});
                    enter(Phase::building_confirm, {{"given", true}});
                    confirm_building(b);
                } else {
                    start_building_phase();
                }
                return;
            }
            case Phase::building_search: {
                if (!all_idle()) return;
                Vec2 peak = fix;
                nlohmann::json detail;
                try {
                    const ContourMap& m = service->map(session, MapRegion::outdoor(sc.extent), t);
                    last_map = m;
                    peak = find_peak(m).xy;
                    detail["value_dbm"] = find_peak(m).value_dbm;
                } catch (const LcsError& e) {
                    log("no_signal", {{"detail", e.what()}});
                }
                const Vec2 goal = snap_to_roads(sc, peak);
                mover = fastest_to({goal, std::nullopt, 0});
                detail["peak"] = {peak.x, peak.y};
                detail["goal"] = {goal.x, goal.y};
                detail["rescuer_id"] = mover;
                enter(Phase::move_to_peak, std::move(detail));
                ++plan_revision;
                assign_route(mover, {goal}, PlanPhase::building);
                stage = Stage::first_sweep;
                return;
            }
            case Phase::move_to_peak: {
                if (outstanding[mover] > 0) return;
                enter(Phase::building_confirm, {{"rescuer_id", mover}});
                if (stage == Stage::verify_sweep) {
                    assign_sweep(mover, PlanPhase::building, sc.timing.building_sweep_bearings,
                                 sc.timing.building_sweep_dwell_s);
                    sweeps.clear();
                    sweeps_expected = 1;
                } else {
                    start_building_sweeps(known_pose.at(mover).xy());
                }
                return;
            }
            case Phase::building_confirm: {
                if (sweeps.size() < sweeps_expected || outstanding[mover] > 0) return;
                if (stage == Stage::first_sweep || stage == Stage::homing) {
                    const auto candidates =
                        candidate_buildings(sc, sweeps.front().position.xy(), sc.timing.candidate_radius_m);
                    if (!candidates.empty()) {
                        handle_candidates(candidates);
                    } else if (homing_steps >= kMaxHomingSteps) {
                        fail("no_signal");
                    } else {
                        homing_step();
                    }
                    return;
                }
                if (stage == Stage::verify_sweep) {
                    const int candidate = building_rank.at(building_idx);
                    const auto hit = first_hit(sweeps.front(), sc);
                    if (hit == candidate) {
                        confirm_building(candidate);
                        return;
                    }
                    ++retries;
                    log("building_rejected", {{"building", candidate}, {"hit", hit ? nlohmann::json(*hit) : nlohmann::json()}});
                    if (retries > sc.timing.max_retries || building_idx + 1 >= building_rank.size()) {
                        fail("retries_exhausted");
                        return;
                    }
                    ++building_idx;
                    enter(Phase::building_search, {{"retry", retries}, {"building", building_rank[building_idx]}});
                    enter(Phase::move_to_peak, {{"retry", retries}});
                    const int next = building_rank[building_idx];
                    const Vec2 vp = verification_point(anchor_sweep, sc.buildings.at(static_cast<std::size_t>(next)));
                    assign_route(mover, {vp}, PlanPhase::building);
                    stage = Stage::verify_sweep;
                }
                return;
            }
            case Phase::floor_room_search: {
                if (!all_idle()) return;
                const Building& b = sc.buildings.at(static_cast<std::size_t>(*building));
                std::optional<std::pair<double, int>> best;
                for (int f = 0; f < b.floor_count; ++f) {
                    try {
                        const ContourMap& m = service->map(session, MapRegion::indoor(sc, *building, f), t);
                        const Peak p = find_peak(m);
                        if (!best || p.value_dbm > best->first) {
                            best = {p.value_dbm, f};
                            last_map = m;
                            room_peak = p.xy;
                        }
                    } catch (const LcsError&) {
                        // Floor not walked or no usable report.
                    }
                }
                if (!best) {
                    fail("no_signal");
                    return;
                }
                room_floor = best->second;
                const Polyline& corridor = b.floors.at(static_cast<std::size_t>(room_floor)).corridor;
                const double s = polyline_project(corridor, room_peak);
                const double length = polyline_length(corridor);
                const int k = sc.timing.room_sweep_positions;
                std::vector<Vec2> positions;
                for (int i = 0; i < k; ++i) {
                    const double si = std::clamp(s + sc.timing.room_sweep_spacing_m * (i - 0.5 * (k - 1)), 0.0, length);
                    positions.push_back(polyline_at(corridor, si).point);
                }
                // Visit the nearer end of the sweep line first.
                mover = fastest_to({positions.front(), *building, room_floor});
                const Pose& mp = known_pose.at(mover);
                if (k > 1 && mp.floor_index == room_floor &&
                    distance(mp.xy(), positions.back()) < distance(mp.xy(), positions.front())) {
                    std::reverse(positions.begin(), positions.end());
                }
                enter(Phase::room_confirm,
                      {{"floor", room_floor}, {"peak", {room_peak.x, room_peak.y}}, {"value_dbm", best->first},
                       {"rescuer_id", mover}});
                ++plan_revision;
                sweeps.clear();
                sweeps_expected = positions.size();
                for (const Vec2& p : positions) {
                    assign_route(mover, {p}, PlanPhase::floor_room, *building, room_floor);
                    assign_sweep(mover, PlanPhase::floor_room, sc.timing.room_sweep_bearings, sc.timing.room_sweep_dwell_s);
                }
                stage = Stage::room_sweeps;
                return;
            }
            case Phase::room_confirm: {
                if (stage == Stage::room_sweeps) {
                    if (sweeps.size() < sweeps_expected || outstanding[mover] > 0) return;
                    room_rank = rank_rooms(sweeps, sc.buildings.at(static_cast<std::size_t>(*building)), room_floor,
                                           room_peak);
                    room_idx = 0;
                    decide_room();
                    return;
                }
                if (stage != Stage::door_check || !door_result || outstanding[mover] > 0) return;
                if (*door_result) {
                    finish(true, "found");
                    return;
                }
                ++retries;
                log("room_rejected", {{"room", room_rank.at(room_idx)}});
                if (retries > sc.timing.max_retries || room_idx + 1 >= room_rank.size()) {
                    fail("retries_exhausted");
                    return;
                }
                ++room_idx;
                enter(Phase::floor_room_search, {{"retry", retries}});
                enter(Phase::room_confirm, {{"retry", retries}, {"room", room_rank[room_idx]}});
                decide_room();
                return;
            }
            case Phase::found:
            case Phase::failed: return;
        }
    }

    void check_sighting() {
        if (sc.target.pose.indoor()) return;
        if (phase != Phase::building_search && phase != Phase::move_to_peak && phase != Phase::building_confirm) return;
        for (const auto& a : agents) {
            if (a.sme.pose.indoor()) continue;
            if (distance(a.sme.pose.xy(), sc.target.pose.xy()) <= sc.timing.visual_range_m + 1e-9) {
                log("sighted", {{"rescuer_id", a.spec.id}});
                finish(true, "found");
                return;
            }
        }
    }

    void fail(const std::string& reason) { finish(false, reason); }

    void finish(bool success, const std::string& reason) {
        if (finished) return;
        finished = true;
        const bool stop_building = reason == "building_identified";
        if (!stop_building && !session.empty()) enter(success ? Phase::found : Phase::failed, {{"reason", reason}});
        if (!stop_building && session.empty()) {
            phase = Phase::failed;
            phases.push_back(Phase::failed);
        }
        SearchOutcome& o = outcome;
        const auto& target = sc.target;
        o.success = success;
        o.reason = reason;
        o.total_time_s = t;
        o.building_id_time_s = building_time;
        o.room_id_time_s = room_time;
        o.retries = retries;
        o.final_phase = phase;
        o.building = building;
        if (!room_rank.empty() && room_time) {
            o.floor = room_floor;
            o.room = room_rank.at(room_idx);
        }
        if (target.pose.indoor()) {
            o.building_correct = building && building == target.pose.building_index;
            o.room_correct = o.building_correct && o.floor == target.pose.floor_index && o.room == target.room_index;
        } else {
            o.building_correct = success;
            o.room_correct = success;
        }
        for (const auto& a : agents) o.distance_m[a.spec.id] = a.distance_m;
        if (!session.empty()) {
            service->write_outcome(session, to_json(o));
            service->close(session, reason, t);
        }
    }

    std::vector<Outbound> route_service_output(std::vector<Outbound> out) {
        std::vector<Outbound> rest;
        for (auto& o : out) {
            const auto it = agent_index.find(o.to);
            if (it != agent_index.end()) {
                if (std::holds_alternative<TaskAssignmentMsg>(o.message.body)) outstanding[o.to] = 1;
                if (std::holds_alternative<Ack>(o.message.body) || std::holds_alternative<ErrorMsg>(o.message.body)) {
                    continue;  // simulated SMEs do not act on acknowledgements
                }
                agents[it->second].down.send(std::move(o.message), t);
            } else {
                rest.push_back(std::move(o));
            }
        }
        return rest;
    }

    std::vector<Outbound> step() {
        if (finished) return {};
        const double t1 = t + sc.timing.tick_s;
        for (auto& a : agents) {
            for (const auto& m : a.down.receive(t)) agent_receive(a, m);
            agent_advance(a, t, t1);
        }
        t = t1;
        std::vector<Outbound> external_out;
        for (auto& a : agents) {
            for (auto* link : {&a.up_reports, &a.up_control}) {
                for (const auto& m : link->receive(t)) {
                    auto out = route_service_output(service->handle(m, t));
                    external_out.insert(external_out.end(), out.begin(), out.end());
                    planner_receive(m);
                }
            }
        }
        auto ticked = route_service_output(service->tick(t));
        external_out.insert(external_out.end(), ticked.begin(), ticked.end());
        if (!finished) planner_update();
        if (!finished) check_sighting();
        if (!finished && t >= sc.timing.timeout_s - 1e-9) fail("timeout");
        return external_out;
    }

    SessionResult result() const {
        SessionResult r;
        r.outcome = outcome;
        if (!session.empty()) r.events = service->events(session);
        r.phases = phases;
        return r;
    }
};

SessionRunner::SessionRunner(Scenario scenario, std::uint64_t seed, RunOptions options)
    : impl_(std::make_unique<Impl>(std::move(scenario), seed, std::move(options))) {}

SessionRunner::~SessionRunner() = default;

std::vector<Outbound> SessionRunner::step() { return impl_->step(); }

std::vector<Outbound> SessionRunner::handle_client(const Message& message) {
    return impl_->route_service_output(impl_->service->handle(message, impl_->t));
}

bool SessionRunner::done() const { return impl_->finished; }
double SessionRunner::clock() const { return impl_->t; }
Phase SessionRunner::phase() const { return impl_->phase; }
const std::string& SessionRunner::session_id() const { return impl_->session; }
SessionResult SessionRunner::result() const { return impl_->result(); }
const std::optional<ContourMap>& SessionRunner::last_map() const { return impl_->last_map; }

SearchOutcome knock_baseline(const Scenario& sc, std::uint64_t seed) {
    (void)seed;  // the baseline walk is deterministic
    if (!sc.target.pose.indoor() || !sc.target.room_index) {
        throw std::invalid_argument("knock_baseline: the caller must be in a room");
    }
    const int bi = *sc.target.pose.building_index;
    const int target_floor = sc.target.pose.floor_index.value_or(0);
    const int target_room = *sc.target.room_index;
    const Building& b = sc.buildings.at(static_cast<std::size_t>(bi));

    std::vector<PlanRescuer> rescuers;
    for (const auto& r : sc.rescuers) rescuers.push_back({r.id, r.start.xy()});
    const SearchPlan plan = plan_floor_search(b, rescuers);

    SearchOutcome o;
    o.building = bi;
    o.building_id_time_s = 0.0;
    o.building_correct = true;
    double found_at = std::numeric_limits<double>::infinity();
    for (std::size_t ri = 0; ri < plan.assignments.size(); ++ri) {
        const auto& as = plan.assignments[ri];
        const RescuerSpec& spec = sc.rescuers.at(ri);
        Pose pose = spec.start;
        double t = 0.0;
        double dist = 0.0;
        const auto move = [&](const Place& to) {
            for (const auto& act : plan_travel(sc, pose, to)) {
                if (act.kind == ActKind::walk) {
                    const double len = polyline_length(act.path);
                    t += len / (act.indoor ? sc.timing.foot_speed_mps : spec.speed_mps);
                    dist += len;
                } else {
                    t += act.duration_s;
                }
            }
            pose = indoor_pose(to.xy, bi, to.floor, b.floor_height);
        };
        for (std::size_t k = 0; k < as.floors.size() && t < found_at; ++k) {
            const int f = as.floors[k];
            const Polyline& route = as.routes[k];
            move({route.front(), bi, f});
            // Doors in walking order; rooms facing each other share a stop.
            const auto& rooms = b.floors.at(static_cast<std::size_t>(f)).rooms;
            std::vector<std::pair<double, int>> doors;
            for (std::size_t r = 0; r < rooms.size(); ++r) {
                doors.emplace_back(polyline_project(route, rooms[r].center()), static_cast<int>(r));
            }
            std::sort(doors.begin(), doors.end());
            double s_prev = 0.0;
            for (const auto& [s, room] : doors) {
                const double step_len = s - s_prev;
                t += step_len / sc.timing.foot_speed_mps;
                dist += step_len;
                s_prev = s;
                t += sc.timing.door_knock_s;
                if (f == target_floor && room == target_room) {
                    found_at = std::min(found_at, t);
                    break;
                }
                if (t >= found_at) break;
            }
            pose = indoor_pose(polyline_at(route, s_prev).point, bi, f, b.floor_height);
        }
        o.distance_m[spec.id] = dist;
    }
    o.success = found_at <= sc.timing.timeout_s;
    o.total_time_s = std::min(found_at, sc.timing.timeout_s);
    o.room_correct = o.success;
    o.reason = o.success ? "found" : "timeout";
    o.final_phase = o.success ? Phase::found : Phase::failed;
    if (o.success) {
        o.room_id_time_s = found_at;
        o.floor = target_floor;
        o.room = target_room;
    }
    return o;
}

SessionResult run_session(const Scenario& scenario, Policy policy, std::uint64_t seed, const RunOptions& options) {
    if (policy == Policy::knock_baseline) {
        SessionResult r;
        r.outcome = knock_baseline(scenario, seed);
        r.phases = {Phase::setup, r.outcome.final_phase};
        return r;
    }
    SessionRunner runner(scenario, seed, options);
    while (!runner.done()) runner.step();
    return runner.result();
}

}  // namespace helps
