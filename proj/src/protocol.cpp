// SPDX-FileCopyrightText: Copyright (c) 2026 The helps-sim Authors
// SPDX-License-Identifier: Apache-2.0

#include "helps/protocol.hpp"

#include <charconv>

#include "json_io.hpp"

namespace helps {

using nlohmann::json;

std::string_view to_string(ProtocolError::Kind kind) {
    switch (kind) {
        case ProtocolError::Kind::malformed_frame: return "malformed_frame";
        case ProtocolError::Kind::unknown_type: return "unknown_type";
        case ProtocolError::Kind::unsupported_version: return "unsupported_version";
        case ProtocolError::Kind::invalid_field: return "invalid_field";
    }
    return "unknown";
}

namespace {

[[noreturn]] void bad_field(const std::string& what) { throw ProtocolError(ProtocolError::Kind::invalid_field, what); }

const json& field(const json& j, const char* key) {
    if (!j.is_object()) bad_field(std::string("expected object holding '") + key + "'");
    const auto it = j.find(key);
    if (it == j.end()) bad_field(std::string("missing field '") + key + "'");
    return *it;
}

template <class T>
T get(const json& j, const char* key) {
    try {
        return field(j, key).get<T>();
    } catch (const json::exception&) {
        bad_field(std::string("bad type for field '") + key + "'");
    }
}

template <class T>
std::optional<T> get_opt(const json& j, const char* key) {
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        bad_field(std::string("bad type for field '") + key + "'");
    }
}

template <class T>
void put_opt(json& j, const char* key, const std::optional<T>& v) {
    if (v) j[key] = *v;
}

json vec_to_json(Vec2 v) { return json::array({v.x, v.y}); }

Vec2 vec_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) bad_field("expected [x, y]");
    return {j[0].get<double>(), j[1].get<double>()};
}

json polyline_to_json(const Polyline& line) {
    json out = json::array();
    for (const Vec2& v : line) out.push_back(vec_to_json(v));
    return out;
}

Polyline polyline_from_json(const json& j) {
    if (!j.is_array()) bad_field("expected polyline array");
    Polyline out;
    for (const json& v : j) out.push_back(vec_from_json(v));
    return out;
}

json rect_to_json(const Rect& r) { return {{"x0", r.x0}, {"y0", r.y0}, {"x1", r.x1}, {"y1", r.y1}}; }

Rect rect_from_json(const json& j) {
    return {get<double>(j, "x0"), get<double>(j, "y0"), get<double>(j, "x1"), get<double>(j, "y1")};
}

json pose_to_json(const Pose& p) {
    json j{{"x", p.x}, {"y", p.y}, {"z", p.z}, {"heading", p.heading}};
    put_opt(j, "building", p.building_index);
    put_opt(j, "floor", p.floor_index);
    return j;
}

Pose pose_from_json(const json& j) {
    Pose p;
    p.x = get<double>(j, "x");
    p.y = get<double>(j, "y");
    p.z = get<double>(j, "z");
    p.heading = get<double>(j, "heading");
    p.building_index = get_opt<int>(j, "building");
    p.floor_index = get_opt<int>(j, "floor");
    return p;
}

json cov_to_json(const Cov2& c) { return {{"xx", c.xx}, {"xy", c.xy}, {"yy", c.yy}}; }
Cov2 cov_from_json(const json& j) { return {get<double>(j, "xx"), get<double>(j, "xy"), get<double>(j, "yy")}; }

template <class E>
E enum_from(const json& j, const char* key, std::initializer_list<std::pair<const char*, E>> names) {
    const auto s = get<std::string>(j, key);
    for (const auto& [name, value] : names) {
        if (s == name) return value;
    }
    bad_field(std::string("unknown value '") + s + "' for '" + key + "'");
}

const char* mode_name(MeasureMode m) { return m == MeasureMode::omni ? "omni" : "directional"; }
const char* phase_name(PlanPhase p) { return p == PlanPhase::building ? "building" : "floor_room"; }

const char* task_name(TaskKind k) {
    switch (k) {
        case TaskKind::route: return "route";
        case TaskKind::sweep: return "sweep";
        case TaskKind::door_check: return "door_check";
        case TaskKind::hold: return "hold";
    }
    return "hold";
}

const char* role_name(ClientRole r) {
    switch (r) {
        case ClientRole::sme: return "sme";
        case ClientRole::console: return "console";
        case ClientRole::admin: return "admin";
    }
    return "sme";
}

json estimate_to_json(const PositionEstimate& e) {
    json j{{"xy", vec_to_json(e.xy)},
           {"cov", cov_to_json(e.cov)},
           {"n_reports_used", e.n_reports_used},
           {"timestamp_s", e.timestamp_s},
           {"degenerate", e.degenerate}};
    put_opt(j, "floor", e.floor_index);
    return j;
}

PositionEstimate estimate_from_json(const json& j) {
    PositionEstimate e;
    e.xy = vec_from_json(field(j, "xy"));
    e.cov = cov_from_json(field(j, "cov"));
    e.n_reports_used = get<int>(j, "n_reports_used");
    e.timestamp_s = get<double>(j, "timestamp_s");
    e.degenerate = get<bool>(j, "degenerate");
    e.floor_index = get_opt<int>(j, "floor");
    return e;
}

json boundary_to_json(const SearchBoundary& b) {
    return {{"center", vec_to_json(b.center)},
            {"semi_major_m", b.semi_major_m},
            {"semi_minor_m", b.semi_minor_m},
            {"orientation_rad", b.orientation_rad},
            {"bounding_rect", rect_to_json(b.bounding_rect)}};
}

SearchBoundary boundary_from_json(const json& j) {
    SearchBoundary b;
    b.center = vec_from_json(field(j, "center"));
    b.semi_major_m = get<double>(j, "semi_major_m");
    b.semi_minor_m = get<double>(j, "semi_minor_m");
    b.orientation_rad = get<double>(j, "orientation_rad");
    b.bounding_rect = rect_from_json(field(j, "bounding_rect"));
    return b;
}

json profile_to_json(const BearingProfile& p) {
    json bearings = json::array();
    for (const BearingSample& s : p.bearings) {
        bearings.push_back({{"bearing_rad", s.bearing_rad}, {"mean_rssi_dbm", s.mean_rssi_dbm}, {"samples", s.samples}});
    }
    return {{"sme_id", p.sme_id},
            {"position", pose_to_json(p.position)},
            {"start_s", p.start_s},
            {"duration_s", p.duration_s},
            {"bearings", bearings},
            {"argmax_bearing_rad", p.argmax_bearing_rad}};
}

BearingProfile profile_from_json(const json& j) {
    BearingProfile p;
    p.sme_id = get<std::string>(j, "sme_id");
    p.position = pose_from_json(field(j, "position"));
    p.start_s = get<double>(j, "start_s");
    p.duration_s = get<double>(j, "duration_s");
    const json& bearings = field(j, "bearings");
    if (!bearings.is_array()) bad_field("bearings must be an array");
    for (const json& b : bearings) {
        p.bearings.push_back({get<double>(b, "bearing_rad"), get<double>(b, "mean_rssi_dbm"), get<int>(b, "samples")});
    }
    p.argmax_bearing_rad = get<double>(j, "argmax_bearing_rad");
    return p;
}

json body_to_json(const MessageBody& body) {
    return std::visit(
        [](const auto& b) -> json {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, CallConnectRequest>) {
                return {{"target_id", b.target_id}, {"requester", b.requester}};
            } else if constexpr (std::is_same_v<T, ChannelConfigMsg>) {
                return {{"config", channel_config_to_json(b.config)}};
            } else if constexpr (std::is_same_v<T, MeasurementReportMsg>) {
                return {{"report", to_json(b.report)}};
            } else if constexpr (std::is_same_v<T, LocationEstimateMsg>) {
                return {{"estimate", estimate_to_json(b.estimate)}, {"boundary", boundary_to_json(b.boundary)}};
            } else if constexpr (std::is_same_v<T, ContourMapMsg>) {
                return {{"map", to_json(b.map)}};
            } else if constexpr (std::is_same_v<T, TaskAssignmentMsg>) {
                json j{{"rescuer_id", b.rescuer_id},
                       {"kind", task_name(b.kind)},
                       {"phase", phase_name(b.phase)},
                       {"plan_revision", b.plan_revision},
                       {"route", polyline_to_json(b.route)},
                       {"floors", b.floors},
                       {"n_bearings", b.n_bearings},
                       {"dwell_s", b.dwell_s}};
                put_opt(j, "building", b.building);
                put_opt(j, "floor", b.floor);
                put_opt(j, "room", b.room);
                return j;
            } else if constexpr (std::is_same_v<T, SweepResultMsg>) {
                return {{"profile", profile_to_json(b.profile)}};
            } else if constexpr (std::is_same_v<T, SessionEventMsg>) {
                return {{"record", to_json(b.record)}};
            } else if constexpr (std::is_same_v<T, ErrorMsg>) {
                json j{{"code", b.code}, {"detail", b.detail}};
                put_opt(j, "ref_seq", b.ref_seq);
                return j;
            } else if constexpr (std::is_same_v<T, Hello>) {
                return {{"role", role_name(b.role)}, {"client_id", b.client_id}, {"token", b.token}};
            } else if constexpr (std::is_same_v<T, Ack>) {
                return {{"ref_seq", b.ref_seq}};
            } else {
                static_assert(std::is_same_v<T, CloseSession>);
                return {{"reason", b.reason}};
            }
        },
        body);
}

MessageBody body_from_json(std::string_view type, const json& j) {
    if (type == "CallConnectRequest") return CallConnectRequest{get<std::string>(j, "target_id"), get<std::string>(j, "requester")};
    if (type == "ChannelConfigMsg") {
        const json& c = field(j, "config");
        if (!c.is_object()) bad_field("config must be an object");
        // Every channel field is required on the wire.
        for (const char* k : {"subframe_duration_ms", "bandwidth_hz", "period_ms", "tx_power_dbm",
                              "dmrs_symbols_per_subframe", "carrier_hz", "target_id"}) {
            field(c, k);
        }
        try {
            return ChannelConfigMsg{channel_config_from_json(c)};
        } catch (const json::exception&) {
            bad_field("bad channel config field type");
        }
    }
    if (type == "MeasurementReportMsg") return MeasurementReportMsg{report_from_json(field(j, "report"))};
    if (type == "LocationEstimateMsg") {
        return LocationEstimateMsg{estimate_from_json(field(j, "estimate")), boundary_from_json(field(j, "boundary"))};
    }
    if (type == "ContourMapMsg") return ContourMapMsg{contour_from_json(field(j, "map"))};
    if (type == "TaskAssignmentMsg") {
        TaskAssignmentMsg t;
        t.rescuer_id = get<std::string>(j, "rescuer_id");
        t.kind = enum_from<TaskKind>(j, "kind",
                                     {{"route", TaskKind::route},
                                      {"sweep", TaskKind::sweep},
                                      {"door_check", TaskKind::door_check},
                                      {"hold", TaskKind::hold}});
        t.phase = enum_from<PlanPhase>(j, "phase", {{"building", PlanPhase::building}, {"floor_room", PlanPhase::floor_room}});
        t.plan_revision = get<std::uint64_t>(j, "plan_revision");
        t.route = polyline_from_json(field(j, "route"));
        t.floors = get<std::vector<int>>(j, "floors");
        t.building = get_opt<int>(j, "building");
        t.floor = get_opt<int>(j, "floor");
        t.room = get_opt<int>(j, "room");
        t.n_bearings = get<int>(j, "n_bearings");
        t.dwell_s = get<double>(j, "dwell_s");
        return t;
    }
    if (type == "SweepResultMsg") return SweepResultMsg{profile_from_json(field(j, "profile"))};
    if (type == "SessionEventMsg") return SessionEventMsg{event_from_json(field(j, "record"))};
    if (type == "ErrorMsg") {
        return ErrorMsg{get<std::string>(j, "code"), get<std::string>(j, "detail"), get_opt<std::uint64_t>(j, "ref_seq")};
    }
    if (type == "Hello") {
        return Hello{enum_from<ClientRole>(j, "role",
                                           {{"sme", ClientRole::sme},
                                            {"console", ClientRole::console},
                                            {"admin", ClientRole::admin}}),
                     get<std::string>(j, "client_id"), get<std::string>(j, "token")};
    }
    if (type == "Ack") return Ack{get<std::uint64_t>(j, "ref_seq")};
    if (type == "CloseSession") return CloseSession{get<std::string>(j, "reason")};
    throw ProtocolError(ProtocolError::Kind::unknown_type, "unknown message type '" + std::string(type) + "'");
}

void check_version(const std::string& version) {
    const auto dot = version.find('.');
    int major = -1;
    const char* end = version.data() + (dot == std::string::npos ? version.size() : dot);
    const auto [ptr, ec] = std::from_chars(version.data(), end, major);
    if (ec != std::errc() || ptr != end) {
        throw ProtocolError(ProtocolError::Kind::unsupported_version, "unparseable schema_version '" + version + "'");
    }
    if (major != kSchemaMajor) {
        throw ProtocolError(ProtocolError::Kind::unsupported_version, "unsupported schema_version '" + version + "'");
    }
}

}  // namespace

json to_json(const MeasurementReport& r) {
    json j{{"sme_id", r.sme_id},
           {"target_id", r.target_id},
           {"seq", r.seq},
           {"timestamp_s", r.timestamp_s},
           {"pose", pose_to_json(r.pose)},
           {"mode", mode_name(r.mode)},
           {"rssi", {{"value_dbm", r.rssi.value_dbm}, {"timestamp_s", r.rssi.timestamp_s}, {"valid", r.rssi.valid}}}};
    put_opt(j, "heading_rad", r.heading_rad);
    return j;
}

MeasurementReport report_from_json(const json& j) {
    MeasurementReport r;
    r.sme_id = get<std::string>(j, "sme_id");
    r.target_id = get<std::string>(j, "target_id");
    r.seq = get<std::uint64_t>(j, "seq");
    r.timestamp_s = get<double>(j, "timestamp_s");
    r.pose = pose_from_json(field(j, "pose"));
    r.mode = enum_from<MeasureMode>(j, "mode", {{"omni", MeasureMode::omni}, {"directional", MeasureMode::directional}});
    r.heading_rad = get_opt<double>(j, "heading_rad");
    const json& s = field(j, "rssi");
    r.rssi = {get<double>(s, "value_dbm"), get<double>(s, "timestamp_s"), get<bool>(s, "valid")};
    return r;
}

json to_json(const EventRecord& e) {
    return {{"time_s", e.time_s}, {"actor", e.actor}, {"event", e.event}, {"payload", e.payload}};
}

EventRecord event_from_json(const json& j) {
    EventRecord e;
    e.time_s = get<double>(j, "time_s");
    e.actor = get<std::string>(j, "actor");
    e.event = get<std::string>(j, "event");
    e.payload = j.value("payload", json::object());
    return e;
}

json to_json(const ContourMap& m) {
    json values = json::array();
    for (std::size_t i = 0; i < m.values.size(); ++i) {
        values.push_back(m.filled[i] ? json(m.values[i]) : json(nullptr));
    }
    json region{{"rect", rect_to_json(m.region.rect)}, {"floor", m.region.floor}};
    put_opt(region, "building", m.region.building);
    json j{{"region", region},   {"cell_m", m.cell_m}, {"rows", m.rows},
           {"cols", m.cols},     {"values", values},   {"generation", m.generation}};
    if (m.peak) {
        j["peak"] = {{"row", m.peak->row},
                     {"col", m.peak->col},
                     {"value_dbm", m.peak->value_dbm},
                     {"xy", vec_to_json(m.peak->xy)}};
    }
    return j;
}

ContourMap contour_from_json(const json& j) {
    ContourMap m;
    const json& region = field(j, "region");
    m.region.rect = rect_from_json(field(region, "rect"));
    m.region.floor = get<int>(region, "floor");
    m.region.building = get_opt<int>(region, "building");
    m.cell_m = get<double>(j, "cell_m");
    m.rows = get<int>(j, "rows");
    m.cols = get<int>(j, "cols");
    m.generation = get<std::uint64_t>(j, "generation");
    const json& values = field(j, "values");
    if (!values.is_array() || m.rows < 0 || m.cols < 0 ||
        values.size() != static_cast<std::size_t>(m.rows) * static_cast<std::size_t>(m.cols)) {
        bad_field("values must hold rows * cols entries");
    }
    for (const json& v : values) {
        if (v.is_null()) {
            m.values.push_back(0.0);
            m.filled.push_back(0);
        } else if (v.is_number()) {
            m.values.push_back(v.get<double>());
            m.filled.push_back(1);
        } else {
            bad_field("contour values must be numbers or null");
        }
    }
    if (const auto it = j.find("peak"); it != j.end() && !it->is_null()) {
        m.peak = Peak{get<int>(*it, "row"), get<int>(*it, "col"), get<double>(*it, "value_dbm"),
                      vec_from_json(field(*it, "xy"))};
    }
    return m;
}

std::string_view message_type(const MessageBody& body) {
    static constexpr std::string_view names[] = {
        "CallConnectRequest", "ChannelConfigMsg", "MeasurementReportMsg", "LocationEstimateMsg",
        "ContourMapMsg",      "TaskAssignmentMsg", "SweepResultMsg",      "SessionEventMsg",
        "ErrorMsg",           "Hello",            "Ack",                  "CloseSession"};
    static_assert(std::size(names) == std::variant_size_v<MessageBody>);
    return names[body.index()];
}

std::string encode(const Message& message) {
    const json j{{"schema_version", message.schema_version},
                 {"session_id", message.session_id},
                 {"sender", message.sender},
                 {"seq", message.seq},
                 {"type", message_type(message.body)},
                 {"body", body_to_json(message.body)}};
    std::string line = j.dump(-1, ' ', false, json::error_handler_t::strict);
    line.push_back('\n');
    return line;
}

Message decode(std::string_view line) {
    if (!line.empty() && line.back() == '\n') line.remove_suffix(1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find('\n') != std::string_view::npos) {
        throw ProtocolError(ProtocolError::Kind::malformed_frame, "frame contains an embedded newline");
    }
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& e) {
        throw ProtocolError(ProtocolError::Kind::malformed_frame, std::string("malformed frame: ") + e.what());
    }
    if (!j.is_object()) throw ProtocolError(ProtocolError::Kind::malformed_frame, "frame is not a JSON object");
    Message m;
    m.schema_version = get<std::string>(j, "schema_version");
    check_version(m.schema_version);
    m.session_id = get<std::string>(j, "session_id");
    m.sender = get<std::string>(j, "sender");
    m.seq = get<std::uint64_t>(j, "seq");
    const auto type = get<std::string>(j, "type");
    m.body = body_from_json(type, field(j, "body"));
    return m;
}

}  // namespace helps
