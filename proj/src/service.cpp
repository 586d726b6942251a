// SPDX-FileCopyrightText: Copyright (c) 2026 The helps-sim Authors
// SPDX-License-Identifier: Apache-2.0

#include "helps/service.hpp"

#include <algorithm>
#include <stdexcept>
#include <tuple>

namespace helps {

std::string_view to_string(SessionStatus status) {
    switch (status) {
        case SessionStatus::pending: return "pending";
        case SessionStatus::active: return "active";
        case SessionStatus::closed: return "closed";
    }
    return "?";
}

namespace {

std::string region_key(const MapRegion& r) {
    if (!r.building) {
        return "outdoor:" + std::to_string(r.rect.x0) + ":" + std::to_string(r.rect.y0) + ":" +
               std::to_string(r.rect.x1) + ":" + std::to_string(r.rect.y1);
    }
    return "b" + std::to_string(*r.building) + "f" + std::to_string(r.floor);
}

bool report_less(const MeasurementReport& a, const MeasurementReport& b) {
    return std::tie(a.timestamp_s, a.sme_id, a.seq) < std::tie(b.timestamp_s, b.sme_id, b.seq);
}

std::string session_name(std::uint64_t n) {
    std::string digits = std::to_string(n);
    if (digits.size() < 4) digits.insert(0, 4 - digits.size(), '0');
    return "session-" + digits;
}

}  // namespace

LcsService::LcsService(ServiceConfig config) : config_(std::move(config)) {
    if (config_.recompute_interval_s <= 0.0) throw std::invalid_argument("recompute interval must be positive");
    if (config_.setup_delay_s < 0.0) throw std::invalid_argument("setup delay must be non-negative");
    channel_ = config_.world.channel();
}

LcsService::~LcsService() = default;

LcsService::Session& LcsService::session(const std::string& id) {
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) throw std::out_of_range("unknown session '" + id + "'");
    return it->second;
}

const LcsService::Session& LcsService::session(const std::string& id) const {
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) throw std::out_of_range("unknown session '" + id + "'");
    return it->second;
}

Message LcsService::make(const std::string& session_id, MessageBody body) {
    return Message{std::string(kSchemaVersion), session_id, kLcsSender, next_seq_++, std::move(body)};
}

Outbound LcsService::error_to(const Message& in, std::string code, std::string detail) {
    return {in.sender, make(in.session_id, ErrorMsg{std::move(code), std::move(detail), in.seq})};
}

std::vector<std::string> LcsService::clients_with(ClientRole role) const {
    std::vector<std::string> out;
    for (const auto& [id, r] : clients_) {
        if (r == role) out.push_back(id);
    }
    return out;
}

std::optional<ClientRole> LcsService::role_of(const std::string& client_id) const {
    const auto it = clients_.find(client_id);
    if (it == clients_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::string> LcsService::session_for(const std::string& target_id) const {
    for (const auto& [id, s] : sessions_) {
        if (s.target_id == target_id && s.status != SessionStatus::closed) return id;
    }
    return std::nullopt;
}

SessionStatus LcsService::status(const std::string& session_id) const { return session(session_id).status; }

const std::string& LcsService::target_of(const std::string& session_id) const {
    return session(session_id).target_id;
}

std::vector<std::string> LcsService::session_ids() const {
    std::vector<std::string> out;
    for (const auto& kv : sessions_) out.push_back(kv.first);
    return out;
}

void LcsService::open_logs(Session& s) {
    if (!config_.persist_dir) return;
    const auto dir = *config_.persist_dir / s.id;
    std::filesystem::create_directories(dir);
    s.report_log = std::make_unique<std::ofstream>(dir / "reports.jsonl", std::ios::app);
    s.event_log = std::make_unique<std::ofstream>(dir / "events.jsonl", std::ios::app);
    if (!*s.report_log || !*s.event_log) throw std::runtime_error("cannot open session logs in " + dir.string());
}

std::vector<Outbound> LcsService::broadcast_config(const Session& s) {
    std::vector<Outbound> out;
    ChannelConfig cfg = channel_;
    cfg.target_id = s.target_id;
    for (const auto& id : clients_with(ClientRole::sme)) out.push_back({id, make(s.id, ChannelConfigMsg{cfg})});
    return out;
}

IngestResult LcsService::ingest(const std::string& session_id, const MeasurementReport& report, double now_s) {
    Session& s = session(session_id);
    if (s.status != SessionStatus::active) {
        throw std::invalid_argument("session '" + session_id + "' is " + std::string(to_string(s.status)));
    }
    if (!s.seen.emplace(report.sme_id, report.seq).second) return IngestResult::duplicate;
    const auto pos = std::upper_bound(s.reports.begin(), s.reports.end(), report, report_less);
    s.reports.insert(pos, report);
    ++s.revision;
    if (s.report_log) *s.report_log << to_json(report).dump() << '\n';
    (void)now_s;
    return IngestResult::accepted;
}

const std::vector<MeasurementReport>& LcsService::reports(const std::string& session_id) const {
    return session(session_id).reports;
}

const ContourMap& LcsService::map(const std::string& session_id, const MapRegion& region, double now_s) {
    Session& s = session(session_id);
    RegionCache& cache = s.maps[region_key(region)];
    const bool stale = !cache.valid || cache.revision != s.revision;
    const bool allowed = !cache.valid || now_s - cache.computed_s >= config_.recompute_interval_s - 1e-9;
    if (stale && allowed) {
        const double cell = region.indoor() ? kIndoorCellM : kOutdoorCellM;
        ContourMap fresh = interpolate_idw(s.reports, region, cell);
        fresh.generation = cache.valid ? cache.map.generation + 1 : 1;
        cache.map = std::move(fresh);
        cache.revision = s.revision;
        cache.computed_s = now_s;
        cache.valid = true;
    }
    return cache.map;
}

std::vector<MapRegion> LcsService::regions_with_reports(const std::string& session_id) const {
    const Session& s = session(session_id);
    std::set<std::pair<int, int>> floors;
    bool outdoor = false;
    for (const auto& r : s.reports) {
        if (r.mode != MeasureMode::omni || !r.rssi.valid) continue;
        if (r.pose.indoor()) {
            floors.emplace(*r.pose.building_index, r.pose.floor_index.value_or(0));
        } else if (config_.world.extent.contains(r.pose.xy())) {
            outdoor = true;
        }
    }
    std::vector<MapRegion> out;
    if (outdoor) out.push_back(MapRegion::outdoor(config_.world.extent));
    for (const auto& [b, f] : floors) out.push_back(MapRegion::indoor(config_.world, b, f));
    return out;
}

void LcsService::log_event(const std::string& session_id, EventRecord record) {
    Session& s = session(session_id);
    if (s.event_log) *s.event_log << to_json(record).dump() << '\n';
    s.events.push_back(std::move(record));
}

const std::vector<EventRecord>& LcsService::events(const std::string& session_id) const {
    return session(session_id).events;
}

void LcsService::write_outcome(const std::string& session_id, const nlohmann::json& outcome) {
    const Session& s = session(session_id);
    if (!config_.persist_dir) return;
    const auto dir = *config_.persist_dir / s.id;
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / "outcome.json");
    out << outcome.dump(2) << '\n';
    if (!out) throw std::runtime_error("cannot write outcome for " + s.id);
}

void LcsService::close(const std::string& session_id, const std::string& reason, double now_s) {
    Session& s = session(session_id);
    if (s.status == SessionStatus::closed) return;
    s.status = SessionStatus::closed;
    log_event(session_id, {now_s, kLcsSender, "session_closed", {{"reason", reason}}});
    if (s.report_log) s.report_log->flush();
    if (s.event_log) s.event_log->flush();
}

std::vector<Outbound> LcsService::handle(const Message& in, double now_s) {
    std::vector<Outbound> out;

    if (const auto* hello = std::get_if<Hello>(&in.body)) {
        if (!config_.token.empty() && hello->token != config_.token) {
            Outbound err = error_to(in, "unauthorized", "bad token");
            err.to = hello->client_id;
            out.push_back(std::move(err));
            return out;
        }
        clients_[hello->client_id] = hello->role;
        out.push_back({hello->client_id, make(in.session_id, Ack{in.seq})});
        if (hello->role == ClientRole::sme && !config_.preloaded_config) {
            // Late joiners still need the channel configuration of live sessions.
            for (const auto& [id, s] : sessions_) {
                if (s.status != SessionStatus::active) continue;
                ChannelConfig cfg = channel_;
                cfg.target_id = s.target_id;
                out.push_back({hello->client_id, make(id, ChannelConfigMsg{cfg})});
            }
        }
        return out;
    }

    const auto role = role_of(in.sender);
    if (!role) {
        out.push_back(error_to(in, "unregistered_sender", "client '" + in.sender + "' has not said Hello"));
        return out;
    }

    const auto require_session = [&](bool active_only) -> Session* {
        const auto it = sessions_.find(in.session_id);
        if (it == sessions_.end()) {
            out.push_back(error_to(in, "unknown_session", "no session '" + in.session_id + "'"));
            return nullptr;
        }
        if (it->second.status == SessionStatus::closed) {
            out.push_back(error_to(in, "session_closed", "session '" + in.session_id + "' is closed"));
            return nullptr;
        }
        if (active_only && it->second.status != SessionStatus::active) {
            out.push_back(error_to(in, "session_not_active", "session '" + in.session_id + "' is still connecting"));
            return nullptr;
        }
        return &it->second;
    };

    std::visit(
        [&](const auto& body) {
            using T = std::decay_t<decltype(body)>;
            if constexpr (std::is_same_v<T, CallConnectRequest>) {
                if (*role == ClientRole::sme) {
                    out.push_back(error_to(in, "forbidden", "SMEs cannot open sessions"));
                } else if (config_.unreachable_targets.count(body.target_id) != 0) {
                    out.push_back(error_to(in, "target_unreachable", "no connection to '" + body.target_id + "'"));
                } else if (const auto existing = session_for(body.target_id)) {
                    out.push_back(error_to(in, "session_exists", *existing));
                } else {
                    Session s;
                    s.id = session_name(next_session_++);
                    s.target_id = body.target_id;
                    s.active_at_s = now_s + config_.setup_delay_s;
                    const std::string id = s.id;
                    open_logs(s);
                    sessions_.emplace(id, std::move(s));
                    log_event(id, {now_s, kLcsSender, "session_requested",
                                   {{"target_id", body.target_id}, {"requester", body.requester}}});
                    out.push_back({in.sender, make(id, Ack{in.seq})});
                }
            } else if constexpr (std::is_same_v<T, MeasurementReportMsg>) {
                if (*role != ClientRole::sme) {
                    out.push_back(error_to(in, "forbidden", "only SMEs submit measurements"));
                    return;
                }
                Session* s = require_session(true);
                if (s == nullptr) return;
                if (body.report.target_id != s->target_id) {
                    out.push_back(error_to(in, "invalid_report", "report names target '" + body.report.target_id + "'"));
                    return;
                }
                ingest(s->id, body.report, now_s);
                out.push_back({in.sender, make(s->id, Ack{in.seq})});
            } else if constexpr (std::is_same_v<T, SweepResultMsg>) {
                Session* s = require_session(true);
                if (s == nullptr) return;
                const auto& p = body.profile;
                log_event(s->id, {now_s, in.sender, "sweep_result",
                                  {{"x", p.position.x}, {"y", p.position.y}, {"argmax_bearing_rad", p.argmax_bearing_rad},
                                   {"bearings", p.bearings.size()}}});
                for (const auto& id : clients_with(ClientRole::console)) out.push_back({id, make(s->id, body)});
                out.push_back({in.sender, make(s->id, Ack{in.seq})});
            } else if constexpr (std::is_same_v<T, SessionEventMsg>) {
                Session* s = require_session(false);
                if (s == nullptr) return;
                log_event(s->id, body.record);
                out.push_back({in.sender, make(s->id, Ack{in.seq})});
            } else if constexpr (std::is_same_v<T, TaskAssignmentMsg>) {
                if (*role == ClientRole::sme) {
                    out.push_back(error_to(in, "forbidden", "SMEs cannot assign tasks"));
                    return;
                }
                Session* s = require_session(true);
                if (s == nullptr) return;
                log_event(s->id, {now_s, in.sender, "task_override", {{"rescuer_id", body.rescuer_id}}});
                out.push_back({body.rescuer_id, make(s->id, body)});
                out.push_back({in.sender, make(s->id, Ack{in.seq})});
            } else if constexpr (std::is_same_v<T, CloseSession>) {
                if (*role == ClientRole::sme) {
                    out.push_back(error_to(in, "forbidden", "SMEs cannot close sessions"));
                    return;
                }
                Session* s = require_session(false);
                if (s == nullptr) return;
                close(s->id, body.reason, now_s);
                out.push_back({in.sender, make(s->id, Ack{in.seq})});
            } else if constexpr (std::is_same_v<T, Ack> || std::is_same_v<T, ErrorMsg>) {
                // Client acknowledgements need no reply.
            } else {
                out.push_back(error_to(in, "unsupported_message",
                                       std::string(message_type(in.body)) + " is not accepted from clients"));
            }
        },
        in.body);
    return out;
}

std::vector<Outbound> LcsService::tick(double now_s) {
    std::vector<Outbound> out;
    const auto consoles = clients_with(ClientRole::console);
    for (auto& [id, s] : sessions_) {
        if (s.status == SessionStatus::pending && now_s >= s.active_at_s - 1e-9) {
            s.status = SessionStatus::active;
            log_event(id, {now_s, kLcsSender, "session_active", {{"target_id", s.target_id}}});
            if (!config_.preloaded_config) {
                auto cfg = broadcast_config(s);
                out.insert(out.end(), std::make_move_iterator(cfg.begin()), std::make_move_iterator(cfg.end()));
            }
        }
        if (consoles.empty()) {
            s.events_published = s.events.size();
            continue;
        }
        if (s.status == SessionStatus::active) {
            for (const auto& region : regions_with_reports(id)) {
                const std::string key = region_key(region);
                const auto before = s.maps.count(key) != 0 ? s.maps[key].map.generation : 0;
                try {
                    const ContourMap& m = map(id, region, now_s);
                    if (m.generation != before) {
                        for (const auto& c : consoles) out.push_back({c, make(id, ContourMapMsg{m})});
                    }
                } catch (const LcsError&) {
                    // Region has reports but none usable yet.
                }
            }
            const bool due = !s.estimate_s || now_s - *s.estimate_s >= config_.recompute_interval_s - 1e-9;
            if (due && s.estimate_revision != s.revision) {
                s.estimate_revision = s.revision;
                s.estimate_s = now_s;
                std::vector<MeasurementReport> window;
                for (auto it = s.reports.rbegin(); it != s.reports.rend() && window.size() < config_.estimate_window;
                     ++it) {
                    if (it->mode == MeasureMode::omni && it->rssi.valid && !it->pose.indoor()) window.push_back(*it);
                }
                try {
                    PositionEstimate est = estimate_position(window, config_.world.extent, config_.world.rf);
                    est.timestamp_s = now_s;
                    const SearchBoundary boundary = derive_boundary(est);
                    for (const auto& c : consoles) out.push_back({c, make(id, LocationEstimateMsg{est, boundary})});
                } catch (const LcsError&) {
                    // Too few or degenerate reports; the next interval retries.
                }
            }
        }
        for (; s.events_published < s.events.size(); ++s.events_published) {
            for (const auto& c : consoles) {
                out.push_back({c, make(id, SessionEventMsg{s.events[s.events_published]})});
            }
        }
    }
    return out;
}

}  // namespace helps
