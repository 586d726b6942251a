// SPDX-FileCopyrightText: Copyright (c) 2026 The helps-sim Authors
// SPDX-License-Identifier: Apache-2.0

// Wire protocol: one JSON object per line, UTF-8. Every message carries an
// envelope (schema_version, session_id, sender, seq) plus a typed body.
//
//   {"body":{...},"schema_version":"1.0","sender":"sme-1","seq":7,
//    "session_id":"s-1","type":"MeasurementReportMsg"}
//
// Keys are emitted sorted so equal messages encode to identical bytes.

#ifndef HELPS_PROTOCOL_HPP
#define HELPS_PROTOCOL_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

#include "json.hpp"

#include "helps/lcs.hpp"

namespace helps {

inline constexpr std::string_view kSchemaVersion = "1.0";
inline constexpr int kSchemaMajor = 1;

class ProtocolError : public std::runtime_error {
public:
    enum class Kind { malformed_frame, unknown_type, unsupported_version, invalid_field };
    ProtocolError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

std::string_view to_string(ProtocolError::Kind kind);

struct CallConnectRequest {
    std::string target_id;
    std::string requester;
    friend bool operator==(const CallConnectRequest&, const CallConnectRequest&) = default;
};

struct ChannelConfigMsg {
    ChannelConfig config;
    friend bool operator==(const ChannelConfigMsg&, const ChannelConfigMsg&) = default;
};

struct MeasurementReportMsg {
    MeasurementReport report;
    friend bool operator==(const MeasurementReportMsg&, const MeasurementReportMsg&) = default;
};

struct LocationEstimateMsg {
    PositionEstimate estimate;
    SearchBoundary boundary;
    friend bool operator==(const LocationEstimateMsg&, const LocationEstimateMsg&) = default;
};

/// Masked cells travel as null and decode to value 0 with filled = 0.
struct ContourMapMsg {
    ContourMap map;
    friend bool operator==(const ContourMapMsg&, const ContourMapMsg&) = default;
};

enum class TaskKind { route, sweep, door_check, hold };

struct TaskAssignmentMsg {
    std::string rescuer_id;
    TaskKind kind = TaskKind::route;
    PlanPhase phase = PlanPhase::building;
    std::uint64_t plan_revision = 0;
    Polyline route;                 // route: path to follow
    std::vector<int> floors;        // route: floors covered, floor phase only
    std::optional<int> building;    // door_check, indoor routes
    std::optional<int> floor;
    std::optional<int> room;        // door_check
    int n_bearings = 0;             // sweep
    double dwell_s = 0.0;           // sweep
    friend bool operator==(const TaskAssignmentMsg&, const TaskAssignmentMsg&) = default;
};

struct SweepResultMsg {
    BearingProfile profile;
    friend bool operator==(const SweepResultMsg&, const SweepResultMsg&) = default;
};

/// One record of a session event log.
struct EventRecord {
    double time_s = 0.0;
    std::string actor;
    std::string event;
    nlohmann::json payload = nlohmann::json::object();
    friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

struct SessionEventMsg {
    EventRecord record;
    friend bool operator==(const SessionEventMsg&, const SessionEventMsg&) = default;
};

struct ErrorMsg {
    std::string code;
    std::string detail;
    std::optional<std::uint64_t> ref_seq;
    friend bool operator==(const ErrorMsg&, const ErrorMsg&) = default;
};

enum class ClientRole { sme, console, admin };

/// Connection handshake; must be the first frame on a socket.
struct Hello {
    ClientRole role = ClientRole::sme;
    std::string client_id;
    std::string token;
    friend bool operator==(const Hello&, const Hello&) = default;
};

struct Ack {
    std::uint64_t ref_seq = 0;
    friend bool operator==(const Ack&, const Ack&) = default;
};

struct CloseSession {
    std::string reason;
    friend bool operator==(const CloseSession&, const CloseSession&) = default;
};

using MessageBody = std::variant<CallConnectRequest, ChannelConfigMsg, MeasurementReportMsg, LocationEstimateMsg,
                                 ContourMapMsg, TaskAssignmentMsg, SweepResultMsg, SessionEventMsg, ErrorMsg, Hello,
                                 Ack, CloseSession>;

struct Message {
    std::string schema_version{kSchemaVersion};
    std::string session_id;
    std::string sender;
    std::uint64_t seq = 0;
    MessageBody body;

    friend bool operator==(const Message&, const Message&) = default;
};

/// Wire name of the body type, e.g. "MeasurementReportMsg".
std::string_view message_type(const MessageBody& body);

/// One line including the trailing newline.
std::string encode(const Message& message);
/// Parses one line (trailing newline optional). Unknown fields are ignored.
/// Throws ProtocolError.
Message decode(std::string_view line);

// Record conversions reused by the persistence layer and the CLI.
nlohmann::json to_json(const MeasurementReport& r);
MeasurementReport report_from_json(const nlohmann::json& j);
nlohmann::json to_json(const EventRecord& e);
EventRecord event_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ContourMap& m);
ContourMap contour_from_json(const nlohmann::json& j);

}  // namespace helps

#endif  // HELPS_PROTOCOL_HPP
