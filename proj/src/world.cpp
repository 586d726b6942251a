// SPDX-FileCopyrightText: Copyright (c) 2026 The helps-sim Authors
// SPDX-License-Identifier: Apache-2.0

#include "helps/world.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json_io.hpp"

namespace helps {

using nlohmann::json;

Pose outdoor_pose(Vec2 p, double heading) {
    Pose pose;
    pose.x = p.x;
    pose.y = p.y;
    pose.z = kDeviceHeightM;
    pose.heading = normalize_heading(heading);
    return pose;
}

Pose indoor_pose(Vec2 p, int building, int floor, double floor_height, double heading) {
    Pose pose;
    pose.x = p.x;
    pose.y = p.y;
    pose.z = floor * floor_height + kDeviceHeightM;
    pose.heading = normalize_heading(heading);
    pose.building_index = building;
    pose.floor_index = floor;
    return pose;
}

namespace {

[[noreturn]] void invalid(const std::string& what) {
    throw ScenarioError(ScenarioError::Kind::validation, what);
}

bool in_extent(const Rect& extent, Vec2 p) { return extent.contains(p, 1e-6); }

void validate_pose(const Scenario& sc, const Pose& p, const std::string& who) {
    if (!in_extent(sc.extent, p.xy())) invalid(who + ": position outside extent");
    if (p.building_index.has_value() != p.floor_index.has_value()) {
        invalid(who + ": indoor poses need both building and floor");
    }
    if (p.building_index) {
        const int b = *p.building_index;
        if (b < 0 || b >= static_cast<int>(sc.buildings.size())) invalid(who + ": building index out of range");
        const auto& bld = sc.buildings[b];
        if (*p.floor_index < 0 || *p.floor_index >= bld.floor_count) invalid(who + ": floor index out of range");
        if (!bld.footprint.contains(p.xy(), 1e-6)) invalid(who + ": indoor pose outside building footprint");
    }
}

}  // namespace

void validate_scenario(const Scenario& sc) {
    if (!(sc.extent.area() > 0.0) || !sc.extent.valid()) invalid("extent: area must be positive");

    for (std::size_t bi = 0; bi < sc.buildings.size(); ++bi) {
        const auto& b = sc.buildings[bi];
        const std::string tag = "building " + std::to_string(bi);
        if (!b.footprint.valid()) invalid(tag + ": footprint must have positive area");
        if (!sc.extent.contains(b.footprint, 1e-6)) invalid(tag + ": footprint outside extent");
        if (b.floor_count < 1) invalid(tag + ": needs at least one floor");
        if (b.floor_count != static_cast<int>(b.floors.size())) invalid(tag + ": floor_count does not match floors");
        if (!(b.floor_height > 0.0)) invalid(tag + ": floor_height must be positive");
        for (std::size_t fi = 0; fi < b.floors.size(); ++fi) {
            const auto& f = b.floors[fi];
            const std::string ftag = tag + " floor " + std::to_string(fi);
            if (f.rooms.empty()) invalid(ftag + ": needs at least one room");
            for (std::size_t ri = 0; ri < f.rooms.size(); ++ri) {
                const Rect& r = f.rooms[ri];
                const std::string rtag = ftag + " room " + std::to_string(ri);
                if (!r.valid()) invalid(rtag + ": room must have positive area");
                if (!b.footprint.contains(r, 1e-6)) invalid(rtag + ": room outside floor footprint");
                for (std::size_t rj = 0; rj < ri; ++rj) {
                    if (r.overlaps(f.rooms[rj], 1e-6)) {
                        invalid(rtag + ": overlaps room " + std::to_string(rj));
                    }
                }
            }
            if (f.corridor.size() < 2) invalid(ftag + ": corridor needs at least two points");
            for (const Vec2& p : f.corridor) {
                if (!b.footprint.contains(p, 1e-6)) invalid(ftag + ": corridor outside floor footprint");
            }
        }
    }

    for (std::size_t ri = 0; ri < sc.roads.size(); ++ri) {
        if (sc.roads[ri].size() < 2) invalid("road " + std::to_string(ri) + ": needs at least two points");
        for (const Vec2& p : sc.roads[ri]) {
            if (!in_extent(sc.extent, p)) invalid("road " + std::to_string(ri) + ": outside extent");
        }
    }

    if (!sc.channels.contains(sc.target.tx_profile)) invalid("target: unknown tx_profile " + sc.target.tx_profile);
    validate_pose(sc, sc.target.pose, "target");
    if (sc.target.pose.building_index) {
        const auto& bld = sc.buildings[*sc.target.pose.building_index];
        const auto& floor = bld.floors[*sc.target.pose.floor_index];
        if (!sc.target.room_index) invalid("target: indoor placement needs a room index");
        const int r = *sc.target.room_index;
        if (r < 0 || r >= static_cast<int>(floor.rooms.size())) invalid("target: room index out of range");
        if (!floor.rooms[r].contains(sc.target.pose.xy(), 1e-6)) invalid("target: pose outside its room");
    } else if (sc.target.room_index) {
        invalid("target: outdoor placement cannot name a room");
    }

    const RfParams& rf = sc.rf;
    if (rf.exterior_wall_loss_db < 0 || rf.interior_wall_loss_db < 0 || rf.floor_loss_db < 0) {
        invalid("rf: loss values must be non-negative");
    }
    if (rf.path_loss_exponent_outdoor < 2.0 || rf.path_loss_exponent_indoor < 2.0) {
        invalid("rf: path loss exponents must be >= 2");
    }
    if (!(rf.decorrelation_distance_outdoor_m > 0) || !(rf.decorrelation_distance_indoor_m > 0)) {
        invalid("rf: decorrelation distances must be positive");
    }
    if (rf.shadowing_sigma_outdoor_db < 0 || rf.shadowing_sigma_indoor_db < 0) {
        invalid("rf: shadowing sigma must be non-negative");
    }
    if (!(rf.reference_distance_m > 0) || !(rf.uplink_carrier_hz > 0) || !(rf.downlink_carrier_hz > 0)) {
        invalid("rf: reference distance and carriers must be positive");
    }
    if (rf.shadowing_components < 1) invalid("rf: shadowing_components must be >= 1");

    for (const auto& [name, ch] : sc.channels) {
        const std::string tag = "channel " + name;
        if (!(ch.subframe_duration_ms > 0)) invalid(tag + ": subframe duration must be positive");
        if (ch.period_ms < ch.subframe_duration_ms) invalid(tag + ": period shorter than subframe");
        if (!(ch.bandwidth_hz > 0) || ch.bandwidth_hz > kSystemBandwidthHz) {
            invalid(tag + ": bandwidth must be within the 10 MHz system bandwidth");
        }
        if (ch.tx_power_dbm > kMaxUeTxPowerDbm) invalid(tag + ": tx power above 23 dBm");
        if (ch.dmrs_symbols_per_subframe < 1) invalid(tag + ": needs at least one DM-RS symbol");
    }

    const AntennaPattern& ant = sc.directional_antenna;
    if (!(ant.hpbw_deg > 0.0 && ant.hpbw_deg < 180.0)) invalid("antenna: hpbw must be in (0, 180)");
    if (ant.front_to_back_db < 0.0) invalid("antenna: front_to_back must be non-negative");

    if (sc.measurement.sigma_per_observation_db < 0 || sc.measurement.rx_antennas < 1 ||
        sc.measurement.self_pose_sigma_m < 0) {
        invalid("measurement: invalid noise parameters");
    }

    std::set<std::string> ids;
    for (const auto& r : sc.rescuers) {
        if (r.id.empty()) invalid("rescuer: empty id");
        if (!ids.insert(r.id).second) invalid("rescuer " + r.id + ": duplicate id");
        if (!(r.speed_mps > 0)) invalid("rescuer " + r.id + ": speed must be positive");
        validate_pose(sc, r.start, "rescuer " + r.id);
    }

    const TimingParams& t = sc.timing;
    if (t.building_sweep_bearings < 4 || t.room_sweep_bearings < 4) invalid("timing: sweeps need >= 4 bearings");
    if (!(t.building_sweep_dwell_s > 0) || !(t.room_sweep_dwell_s > 0)) invalid("timing: dwell must be positive");
    if (t.building_sweep_positions < 1 || t.room_sweep_positions < 1) invalid("timing: sweep positions must be >= 1");
    if (t.door_knock_s < 0 || t.door_check_s < 0 || t.floor_change_s < 0) invalid("timing: durations must be >= 0");
    if (!(t.vehicle_speed_mps > 0) || !(t.foot_speed_mps > 0)) invalid("timing: speeds must be positive");
    if (!(t.timeout_s > 0) || !(t.tick_s > 0) || !(t.lcs_interval_s > 0)) invalid("timing: clock intervals must be positive");
    if (!(t.lane_spacing_m > 0) || t.estimate_window < 4 || t.max_retries < 0) invalid("timing: invalid search settings");
    if (!(t.visual_range_m > 0) || !(t.homing_step_m > 0)) invalid("timing: outdoor homing distances must be positive");

    const NetworkParams& n = sc.network;
    if (n.loss_probability < 0 || n.loss_probability > 1) invalid("network: loss probability outside [0, 1]");
    if (n.latency_min_s < 0 || n.latency_max_s < n.latency_min_s) invalid("network: invalid latency range");
    if (n.setup_delay_s < 0 || !(n.retry_timeout_s > 0)) invalid("network: invalid timers");

    if (!(sc.initial_fix.radius_3sigma_m > 0)) invalid("initial_fix: radius must be positive");
}

namespace {

json rect_to_json(const Rect& r) { return {{"x0", r.x0}, {"y0", r.y0}, {"x1", r.x1}, {"y1", r.y1}}; }

Rect rect_from_json(const json& j) {
    return {j.at("x0").get<double>(), j.at("y0").get<double>(), j.at("x1").get<double>(), j.at("y1").get<double>()};
}

json polyline_to_json(const Polyline& line) {
    json arr = json::array();
    for (const Vec2& p : line) arr.push_back({p.x, p.y});
    return arr;
}

Polyline polyline_from_json(const json& j) {
    Polyline out;
    for (const auto& p : j) out.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    return out;
}

json pose_to_json(const Pose& p) {
    json j = {{"x", p.x}, {"y", p.y}, {"heading", p.heading}};
    if (p.building_index) j["building"] = *p.building_index;
    if (p.floor_index) j["floor"] = *p.floor_index;
    return j;
}

// z is derived from the floor, so it is not stored in the document.
Pose pose_from_json(const json& j, const std::vector<Building>& buildings) {
    const Vec2 xy{j.at("x").get<double>(), j.at("y").get<double>()};
    const double heading = j.value("heading", 0.0);
    if (j.contains("building") || j.contains("floor")) {
        if (!j.contains("building") || !j.contains("floor")) {
            throw ScenarioError(ScenarioError::Kind::validation, "indoor poses need both building and floor");
        }
        const int b = j.at("building").get<int>();
        const int f = j.at("floor").get<int>();
        const double h = (b >= 0 && b < static_cast<int>(buildings.size())) ? buildings[b].floor_height : 0.0;
        Pose p = indoor_pose(xy, b, f, h, 0.0);
        p.heading = heading;
        return p;
    }
    Pose p = outdoor_pose(xy, 0.0);
    p.heading = heading;
    return p;
}

json rf_to_json(const RfParams& rf) {
    return {{"uplink_carrier_hz", rf.uplink_carrier_hz},
            {"downlink_carrier_hz", rf.downlink_carrier_hz},
            {"path_loss_exponent_outdoor", rf.path_loss_exponent_outdoor},
            {"path_loss_exponent_indoor", rf.path_loss_exponent_indoor},
            {"exterior_wall_loss_db", rf.exterior_wall_loss_db},
            {"interior_wall_loss_db", rf.interior_wall_loss_db},
            {"floor_loss_db", rf.floor_loss_db},
            {"shadowing_sigma_outdoor_db", rf.shadowing_sigma_outdoor_db},
            {"shadowing_sigma_indoor_db", rf.shadowing_sigma_indoor_db},
            {"decorrelation_distance_outdoor_m", rf.decorrelation_distance_outdoor_m},
            {"decorrelation_distance_indoor_m", rf.decorrelation_distance_indoor_m},
            {"noise_figure_db", rf.noise_figure_db},
            {"reference_distance_m", rf.reference_distance_m},
            {"shadowing_components", rf.shadowing_components}};
}

RfParams rf_from_json(const json& j) {
    RfParams rf;
    rf.uplink_carrier_hz = j.value("uplink_carrier_hz", rf.uplink_carrier_hz);
    rf.downlink_carrier_hz = j.value("downlink_carrier_hz", rf.downlink_carrier_hz);
    rf.path_loss_exponent_outdoor = j.value("path_loss_exponent_outdoor", rf.path_loss_exponent_outdoor);
    rf.path_loss_exponent_indoor = j.value("path_loss_exponent_indoor", rf.path_loss_exponent_indoor);
    rf.exterior_wall_loss_db = j.value("exterior_wall_loss_db", rf.exterior_wall_loss_db);
    rf.interior_wall_loss_db = j.value("interior_wall_loss_db", rf.interior_wall_loss_db);
    rf.floor_loss_db = j.value("floor_loss_db", rf.floor_loss_db);
    rf.shadowing_sigma_outdoor_db = j.value("shadowing_sigma_outdoor_db", rf.shadowing_sigma_outdoor_db);
    rf.shadowing_sigma_indoor_db = j.value("shadowing_sigma_indoor_db", rf.shadowing_sigma_indoor_db);
    rf.decorrelation_distance_outdoor_m =
        j.value("decorrelation_distance_outdoor_m", rf.decorrelation_distance_outdoor_m);
    rf.decorrelation_distance_indoor_m = j.value("decorrelation_distance_indoor_m", rf.decorrelation_distance_indoor_m);
    rf.noise_figure_db = j.value("noise_figure_db", rf.noise_figure_db);
    rf.reference_distance_m = j.value("reference_distance_m", rf.reference_distance_m);
    rf.shadowing_components = j.value("shadowing_components", rf.shadowing_components);
    return rf;
}

json timing_to_json(const TimingParams& t) {
    return {{"building_sweep_bearings", t.building_sweep_bearings},
            {"building_sweep_dwell_s", t.building_sweep_dwell_s},
            {"room_sweep_bearings", t.room_sweep_bearings},
            {"room_sweep_dwell_s", t.room_sweep_dwell_s},
            {"building_sweep_positions", t.building_sweep_positions},
            {"room_sweep_positions", t.room_sweep_positions},
            {"room_sweep_spacing_m", t.room_sweep_spacing_m},
            {"verify_building", t.verify_building},
            {"door_knock_s", t.door_knock_s},
            {"door_check_s", t.door_check_s},
            {"floor_change_s", t.floor_change_s},
            {"vehicle_speed_mps", t.vehicle_speed_mps},
            {"foot_speed_mps", t.foot_speed_mps},
            {"timeout_s", t.timeout_s},
            {"lane_spacing_m", t.lane_spacing_m},
            {"max_retries", t.max_retries},
            {"lcs_interval_s", t.lcs_interval_s},
            {"estimate_window", t.estimate_window},
            {"candidate_radius_m", t.candidate_radius_m},
            {"tick_s", t.tick_s},
            {"visual_range_m", t.visual_range_m},
            {"homing_step_m", t.homing_step_m}};
}

TimingParams timing_from_json(const json& j) {
    TimingParams t;
    t.building_sweep_bearings = j.value("building_sweep_bearings", t.building_sweep_bearings);
    t.building_sweep_dwell_s = j.value("building_sweep_dwell_s", t.building_sweep_dwell_s);
    t.room_sweep_bearings = j.value("room_sweep_bearings", t.room_sweep_bearings);
    t.room_sweep_dwell_s = j.value("room_sweep_dwell_s", t.room_sweep_dwell_s);
    t.building_sweep_positions = j.value("building_sweep_positions", t.building_sweep_positions);
    t.room_sweep_positions = j.value("room_sweep_positions", t.room_sweep_positions);
    t.room_sweep_spacing_m = j.value("room_sweep_spacing_m", t.room_sweep_spacing_m);
    t.verify_building = j.value("verify_building", t.verify_building);
    t.door_knock_s = j.value("door_knock_s", t.door_knock_s);
    t.door_check_s = j.value("door_check_s", t.door_check_s);
    t.floor_change_s = j.value("floor_change_s", t.floor_change_s);
    t.vehicle_speed_mps = j.value("vehicle_speed_mps", t.vehicle_speed_mps);
    t.foot_speed_mps = j.value("foot_speed_mps", t.foot_speed_mps);
    t.timeout_s = j.value("timeout_s", t.timeout_s);
    t.lane_spacing_m = j.value("lane_spacing_m", t.lane_spacing_m);
    t.max_retries = j.value("max_retries", t.max_retries);
    t.lcs_interval_s = j.value("lcs_interval_s", t.lcs_interval_s);
    t.estimate_window = j.value("estimate_window", t.estimate_window);
    t.candidate_radius_m = j.value("candidate_radius_m", t.candidate_radius_m);
    t.tick_s = j.value("tick_s", t.tick_s);
    t.visual_range_m = j.value("visual_range_m", t.visual_range_m);
    t.homing_step_m = j.value("homing_step_m", t.homing_step_m);
    return t;
}

json network_to_json(const NetworkParams& n) {
    return {{"loss_probability", n.loss_probability}, {"latency_min_s", n.latency_min_s},
            {"latency_max_s", n.latency_max_s},       {"retry_timeout_s", n.retry_timeout_s},
            {"setup_delay_s", n.setup_delay_s},       {"target_unreachable", n.target_unreachable},
            {"preloaded_config", n.preloaded_config}};
}

NetworkParams network_from_json(const json& j) {
    NetworkParams n;
    n.loss_probability = j.value("loss_probability", n.loss_probability);
    n.latency_min_s = j.value("latency_min_s", n.latency_min_s);
    n.latency_max_s = j.value("latency_max_s", n.latency_max_s);
    n.retry_timeout_s = j.value("retry_timeout_s", n.retry_timeout_s);
    n.setup_delay_s = j.value("setup_delay_s", n.setup_delay_s);
    n.target_unreachable = j.value("target_unreachable", n.target_unreachable);
    n.preloaded_config = j.value("preloaded_config", n.preloaded_config);
    return n;
}

}  // namespace

Scenario load_scenario(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ScenarioError(ScenarioError::Kind::parse, std::string("malformed scenario document: ") + e.what());
    }
    Scenario sc;
    try {
        if (!doc.is_object()) throw ScenarioError(ScenarioError::Kind::parse, "scenario document must be an object");
        if (!doc.contains("schema_version")) invalid("schema_version: missing");
        if (doc.at("schema_version").get<int>() != kScenarioSchemaVersion) {
            invalid("schema_version: unsupported version " + doc.at("schema_version").dump());
        }
        sc.name = doc.value("name", std::string{});
        sc.extent = rect_from_json(doc.at("extent"));
        for (const auto& jb : doc.value("buildings", json::array())) {
            Building b;
            b.footprint = rect_from_json(jb.at("footprint"));
            b.floor_height = jb.value("floor_height", 3.0);
            for (const auto& jf : jb.at("floors")) {
                Floor f;
                f.corridor = polyline_from_json(jf.at("corridor"));
                for (const auto& jr : jf.at("rooms")) f.rooms.push_back(rect_from_json(jr));
                b.floors.push_back(std::move(f));
            }
            b.floor_count = jb.value("floor_count", static_cast<int>(b.floors.size()));
            sc.buildings.push_back(std::move(b));
        }
        for (const auto& jr : doc.value("roads", json::array())) sc.roads.push_back(polyline_from_json(jr));

        const json& jt = doc.at("target");
        sc.target.pose = pose_from_json(jt, sc.buildings);
        if (jt.contains("room")) sc.target.room_index = jt.at("room").get<int>();
        sc.target.tx_profile = jt.value("tx_profile", std::string{"default"});

        if (doc.contains("rf")) sc.rf = rf_from_json(doc.at("rf"));
        if (doc.contains("channels")) {
            sc.channels.clear();
            for (const auto& [name, jc] : doc.at("channels").items()) sc.channels[name] = channel_config_from_json(jc);
        }
        if (doc.contains("antenna")) {
            const json& ja = doc.at("antenna");
            sc.directional_antenna = AntennaPattern::directional(ja.value("hpbw_deg", 60.0),
                                                                 ja.value("front_to_back_db", 15.0),
                                                                 ja.value("gain_db", 6.0));
        }
        if (doc.contains("measurement")) {
            const json& jm = doc.at("measurement");
            sc.measurement.sigma_per_observation_db =
                jm.value("sigma_per_observation_db", sc.measurement.sigma_per_observation_db);
            sc.measurement.rx_antennas = jm.value("rx_antennas", sc.measurement.rx_antennas);
            sc.measurement.self_pose_sigma_m = jm.value("self_pose_sigma_m", sc.measurement.self_pose_sigma_m);
        }
        if (doc.contains("timing")) sc.timing = timing_from_json(doc.at("timing"));
        if (doc.contains("network")) sc.network = network_from_json(doc.at("network"));
        for (const auto& jr : doc.value("rescuers", json::array())) {
            RescuerSpec r;
            r.id = jr.at("id").get<std::string>();
            r.start = pose_from_json(jr.at("start"), sc.buildings);
            const std::string mode = jr.value("mode", std::string{"vehicle"});
            if (mode == "vehicle") {
                r.mode = RescuerMode::vehicle;
            } else if (mode == "foot") {
                r.mode = RescuerMode::foot;
            } else {
                invalid("rescuer " + r.id + ": mode must be vehicle or foot");
            }
            const double default_speed =
                r.mode == RescuerMode::vehicle ? sc.timing.vehicle_speed_mps : sc.timing.foot_speed_mps;
            r.speed_mps = jr.value("speed_mps", default_speed);
            sc.rescuers.push_back(std::move(r));
        }
        if (doc.contains("initial_fix")) {
            const json& ji = doc.at("initial_fix");
            sc.initial_fix.x = ji.at("x").get<double>();
            sc.initial_fix.y = ji.at("y").get<double>();
            sc.initial_fix.radius_3sigma_m = ji.value("radius_3sigma_m", 125.0);
            sc.initial_fix.noisy = ji.value("noisy", false);
        } else {
            sc.initial_fix.x = sc.extent.center().x;
            sc.initial_fix.y = sc.extent.center().y;
        }
        sc.seed = doc.value("seed", std::uint64_t{0});
    } catch (const json::exception& e) {
        throw ScenarioError(ScenarioError::Kind::parse, std::string("malformed scenario document: ") + e.what());
    }
    validate_scenario(sc);
    return sc;
}

Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError(ScenarioError::Kind::parse, "cannot open scenario file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return load_scenario(ss.str());
}

std::string serialize_scenario(const Scenario& sc) {
    json doc;
    doc["schema_version"] = kScenarioSchemaVersion;
    doc["name"] = sc.name;
    doc["extent"] = rect_to_json(sc.extent);
    json buildings = json::array();
    for (const auto& b : sc.buildings) {
        json jb;
        jb["footprint"] = rect_to_json(b.footprint);
        jb["floor_count"] = b.floor_count;
        jb["floor_height"] = b.floor_height;
        json floors = json::array();
        for (const auto& f : b.floors) {
            json rooms = json::array();
            for (const auto& r : f.rooms) rooms.push_back(rect_to_json(r));
            floors.push_back({{"corridor", polyline_to_json(f.corridor)}, {"rooms", rooms}});
        }
        jb["floors"] = floors;
        buildings.push_back(jb);
    }
    doc["buildings"] = buildings;
    json roads = json::array();
    for (const auto& r : sc.roads) roads.push_back(polyline_to_json(r));
    doc["roads"] = roads;
    json target = pose_to_json(sc.target.pose);
    if (sc.target.room_index) target["room"] = *sc.target.room_index;
    target["tx_profile"] = sc.target.tx_profile;
    doc["target"] = target;
    doc["rf"] = rf_to_json(sc.rf);
    json channels = json::object();
    for (const auto& [name, ch] : sc.channels) channels[name] = channel_config_to_json(ch);
    doc["channels"] = channels;
    doc["antenna"] = {{"hpbw_deg", sc.directional_antenna.hpbw_deg},
                      {"front_to_back_db", sc.directional_antenna.front_to_back_db},
                      {"gain_db", sc.directional_antenna.gain_db}};
    doc["measurement"] = {{"sigma_per_observation_db", sc.measurement.sigma_per_observation_db},
                          {"rx_antennas", sc.measurement.rx_antennas},
                          {"self_pose_sigma_m", sc.measurement.self_pose_sigma_m}};
    json rescuers = json::array();
    for (const auto& r : sc.rescuers) {
        rescuers.push_back({{"id", r.id},
                            {"start", pose_to_json(r.start)},
                            {"mode", r.mode == RescuerMode::vehicle ? "vehicle" : "foot"},
                            {"speed_mps", r.speed_mps}});
    }
    doc["rescuers"] = rescuers;
    doc["timing"] = timing_to_json(sc.timing);
    doc["network"] = network_to_json(sc.network);
    doc["initial_fix"] = {{"x", sc.initial_fix.x},
                          {"y", sc.initial_fix.y},
                          {"radius_3sigma_m", sc.initial_fix.radius_3sigma_m},
                          {"noisy", sc.initial_fix.noisy}};
    doc["seed"] = sc.seed;
    return doc.dump(1);
}

ObstructionCount walls_between(const Pose& a, const Pose& b, const Scenario& sc) {
    ObstructionCount out;
    const Vec2 a2 = a.xy();
    const Vec2 b2 = b.xy();
    const double len2 = distance(a2, b2);
    const Rect seg_box{std::min(a2.x, b2.x), std::min(a2.y, b2.y), std::max(a2.x, b2.x), std::max(a2.y, b2.y)};
    const double z_lo = std::min(a.z, b.z);
    const double z_hi = std::max(a.z, b.z);
    const auto z_at = [&](double t) { return a.z + t * (b.z - a.z); };
    // Crossing parameters closer than this (in meters along the ground track) are one wall.
    const double merge_t = len2 > 0.0 ? 1e-6 / len2 : 0.0;

    std::vector<double> exterior;
    std::vector<double> interior;
    for (const Building& bld : sc.buildings) {
        const Rect& fp = bld.footprint;
        if (seg_box.x1 < fp.x0 || seg_box.x0 > fp.x1 || seg_box.y1 < fp.y0 || seg_box.y0 > fp.y1) continue;
        const double h = bld.floor_height;
        const double top = bld.height();

        exterior.clear();
        for (double t : boundary_crossings(a2, b2, fp)) {
            const double z = z_at(t);
            if (z >= 0.0 && z <= top) exterior.push_back(t);
        }
        out.exterior_walls += static_cast<int>(exterior.size());

        for (int k = 1; k <= bld.floor_count; ++k) {
            const double zk = k * h;
            if ((a.z - zk) * (b.z - zk) >= 0.0) continue;
            const double t = (zk - a.z) / (b.z - a.z);
            if (fp.contains_strict(a2 + (b2 - a2) * t)) ++out.floors_crossed;
        }

        if (len2 <= kGeomEps) continue;
        interior.clear();
        for (int f = 0; f < bld.floor_count; ++f) {
            const double lo = f * h;
            const double hi = (f + 1) * h;
            if (hi < z_lo || lo > z_hi) continue;
            const bool top_floor = (f + 1 == bld.floor_count);
            for (const Rect& room : bld.floors[f].rooms) {
                for (double t : boundary_crossings(a2, b2, room)) {
                    const double z = z_at(t);
                    if (z >= lo && (z < hi || (top_floor && z <= hi))) interior.push_back(t);
                }
            }
        }
        std::sort(interior.begin(), interior.end());
        double last = -1.0;
        for (double t : interior) {
            if (last >= 0.0 && t - last <= merge_t) continue;
            last = t;
            const bool on_exterior = std::any_of(exterior.begin(), exterior.end(),
                                                 [&](double te) { return std::abs(te - t) <= merge_t; });
            if (!on_exterior) ++out.interior_walls;
        }
    }
    return out;
}

Pose route_point_at(std::span<const Vec2> route, double s) {
    const double len = polyline_length(route);
    if (route.empty() || s < -1e-9 || s > len + 1e-9) {
        throw std::out_of_range("route_point_at: arc length outside [0, route length]");
    }
    const PolylinePoint p = polyline_at(route, s);
    return outdoor_pose(p.point, p.heading);
}

std::optional<int> room_at(const Building& building, int floor, Vec2 p) {
    if (floor < 0 || floor >= building.floor_count) return std::nullopt;
    const auto& rooms = building.floors[floor].rooms;
    for (std::size_t i = 0; i < rooms.size(); ++i) {
        if (rooms[i].contains(p)) return static_cast<int>(i);
    }
    return std::nullopt;
}

std::optional<int> building_at(const Scenario& sc, Vec2 p) {
    for (std::size_t i = 0; i < sc.buildings.size(); ++i) {
        if (sc.buildings[i].footprint.contains(p)) return static_cast<int>(i);
    }
    return std::nullopt;
}

Pose pose_in_room(const Scenario& sc, int building, int floor, int room, double u, double v, double margin) {
    const Building& b = sc.buildings.at(building);
    const Rect& r = b.floors.at(floor).rooms.at(room);
    const double mx = std::min(margin, 0.25 * r.width());
    const double my = std::min(margin, 0.25 * r.height());
    const Vec2 p{r.x0 + mx + u * (r.width() - 2 * mx), r.y0 + my + v * (r.height() - 2 * my)};
    return indoor_pose(p, building, floor, b.floor_height);
}

}  // namespace helps
