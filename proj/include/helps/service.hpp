// SPDX-FileCopyrightText: Copyright (c) 2026 The helps-sim Authors
// SPDX-License-Identifier: Apache-2.0

// LCS service: client registry, one session per target phone, idempotent
// report ingestion, throttled map and estimate regeneration, event log and
// optional on-disk persistence. Transport agnostic: frames go in through
// handle() and come out as addressed Outbound messages. Not thread-safe; the
// socket server and the simulator both drive it from a single thread.

#ifndef HELPS_SERVICE_HPP
#define HELPS_SERVICE_HPP

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "helps/protocol.hpp"

namespace helps {

inline constexpr const char* kLcsSender = "lcs";

struct ServiceConfig {
    std::string token;  // shared bearer token; empty disables the check
    double setup_delay_s = 2.0;
    double recompute_interval_s = 1.0;
    bool preloaded_config = false;
    std::set<std::string> unreachable_targets;
    Scenario world;     // buildings, extent, rf and channel profile
    std::size_t estimate_window = 200;
    std::optional<std::filesystem::path> persist_dir;
};

enum class SessionStatus { pending, active, closed };

struct Outbound {
    std::string to;  // client id
    Message message;
};

enum class IngestResult { accepted, duplicate };

class LcsService {
public:
    explicit LcsService(ServiceConfig config);
    ~LcsService();
    LcsService(const LcsService&) = delete;
    LcsService& operator=(const LcsService&) = delete;

    /// Processes one inbound frame. Protocol-level rejections come back as
    /// ErrorMsg frames addressed to the sender, never as exceptions.
    std::vector<Outbound> handle(const Message& in, double now_s);
    /// Activates sessions whose setup delay elapsed and publishes fresh maps,
    /// estimates and events to consoles, at most once per recompute interval.
    std::vector<Outbound> tick(double now_s);

    // In-process API used by the orchestrator. Unknown ids throw std::out_of_range.
    std::optional<std::string> session_for(const std::string& target_id) const;
    SessionStatus status(const std::string& session_id) const;
    const std::string& target_of(const std::string& session_id) const;
    std::vector<std::string> session_ids() const;
    const ChannelConfig& channel() const { return channel_; }

    /// Throws std::invalid_argument for a closed or pending session.
    IngestResult ingest(const std::string& session_id, const MeasurementReport& report, double now_s);
    /// Reports ordered by (timestamp, sme_id, seq).
    const std::vector<MeasurementReport>& reports(const std::string& session_id) const;

    /// Contour map of a region, regenerated when new reports arrived and the
    /// region was last regenerated at least one interval ago. Throws
    /// LcsError(no_valid_reports) when the region holds no usable report.
    const ContourMap& map(const std::string& session_id, const MapRegion& region, double now_s);
    /// Regions holding at least one valid omni report.
    std::vector<MapRegion> regions_with_reports(const std::string& session_id) const;

    /// Appends to the event log; consoles receive it on the next tick.
    void log_event(const std::string& session_id, EventRecord record);
    const std::vector<EventRecord>& events(const std::string& session_id) const;
    void write_outcome(const std::string& session_id, const nlohmann::json& outcome);

    void close(const std::string& session_id, const std::string& reason, double now_s);

    std::optional<ClientRole> role_of(const std::string& client_id) const;

private:
    struct RegionCache {
        ContourMap map;
        std::uint64_t revision = 0;  // report revision the map reflects
        double computed_s = 0.0;
        bool valid = false;
    };
    struct Session {
        std::string id;
        std::string target_id;
        SessionStatus status = SessionStatus::pending;
        double active_at_s = 0.0;
        std::vector<MeasurementReport> reports;
        std::set<std::pair<std::string, std::uint64_t>> seen;
        std::uint64_t revision = 0;
        std::map<std::string, RegionCache> maps;  // keyed by region label
        std::uint64_t estimate_revision = 0;
        std::optional<double> estimate_s;
        std::vector<EventRecord> events;
        std::size_t events_published = 0;
        std::unique_ptr<std::ofstream> report_log;
        std::unique_ptr<std::ofstream> event_log;
    };

    Session& session(const std::string& id);
    const Session& session(const std::string& id) const;
    Message make(const std::string& session_id, MessageBody body);
    Outbound error_to(const Message& in, std::string code, std::string detail);
    std::vector<std::string> clients_with(ClientRole role) const;
    void open_logs(Session& s);
    std::vector<Outbound> broadcast_config(const Session& s);

    ServiceConfig config_;
    ChannelConfig channel_;
    std::map<std::string, ClientRole> clients_;
    std::map<std::string, Session> sessions_;
    std::uint64_t next_session_ = 1;
    std::uint64_t next_seq_ = 1;
};

std::string_view to_string(SessionStatus status);

}  // namespace helps

#endif  // HELPS_SERVICE_HPP
