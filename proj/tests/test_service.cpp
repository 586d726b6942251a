// SPDX-FileCopyrightText: Copyright (c) 2026 The helps-sim Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "helps/layouts.hpp"
#include "helps/service.hpp"
#include "helps/transport.hpp"
#include "test_support.hpp"

namespace helps {
namespace {

TEST(Transport, LosslessLinkDeliversEverythingInOrder) {
    VirtualLink<int> link({0.0, 0.03, 0.12}, 1);
    for (int i = 0; i < 1000; ++i) EXPECT_TRUE(link.send(i, i * 0.001));
    EXPECT_TRUE(link.receive(0.02).empty());
    const auto got = link.receive(10.0);
    ASSERT_EQ(got.size(), 1000u);
    for (int i = 0; i < 1000; ++i) EXPECT_EQ(got[static_cast<std::size_t>(i)], i);
}

TEST(Transport, CertainLossDropsEverything) {
    VirtualLink<int> link({1.0, 0.03, 0.12}, 2);
    for (int i = 0; i < 1000; ++i) EXPECT_FALSE(link.send(i, 0.0));
    EXPECT_TRUE(link.receive(1e9).empty());
    EXPECT_EQ(link.dropped(), 1000u);
}

TEST(Transport, EmpiricalLossRateMatches) {
    VirtualLink<int> link({0.01, 0.03, 0.12}, 3);
    int lost = 0;
    for (int i = 0; i < 100000; ++i) lost += link.send(i, i * 1e-3) ? 0 : 1;
    EXPECT_NEAR(lost / 1e5, 0.01, 0.002);
}

TEST(Transport, LatencyStaysWithinBounds) {
    Rng rng(4);
    double tail = -1e300;
    for (int i = 0; i < 10000; ++i) {
        const double now = i * 1.0;  // far apart so FIFO never holds a message back
        const auto d = transport({0.0, 0.03, 0.12}, rng, now, tail);
        ASSERT_FALSE(d.dropped);
        EXPECT_GE(d.deliver_at_s - now, 0.03);
        EXPECT_LE(d.deliver_at_s - now, 0.12);
    }
}

TEST(Transport, ReliableLinkRetriesUntilDelivered) {
    VirtualLink<int> link({0.5, 0.03, 0.12}, 5, true, 1.0);
    for (int i = 0; i < 200; ++i) EXPECT_TRUE(link.send(i, 0.0));
    EXPECT_GT(link.dropped(), 50u);
    const auto got = link.receive(1e6);
    ASSERT_EQ(got.size(), 200u);
    for (int i = 0; i < 200; ++i) EXPECT_EQ(got[static_cast<std::size_t>(i)], i);
}

class ServiceTest : public ::testing::Test {
protected:
    ServiceConfig config(double setup = 2.0) {
        ServiceConfig c;
        c.token = "secret";
        c.setup_delay_s = setup;
        c.world = make_minimal_scenario();
        return c;
    }

    static Message msg(const std::string& sender, std::uint64_t seq, MessageBody body, std::string session = "") {
        return Message{std::string(kSchemaVersion), std::move(session), sender, seq, std::move(body)};
    }

    static void hello(LcsService& svc, const std::string& id, ClientRole role) {
        const auto out = svc.handle(msg(id, 0, Hello{role, id, "secret"}), 0.0);
        ASSERT_FALSE(out.empty());
        ASSERT_TRUE(std::holds_alternative<Ack>(out.front().message.body));
    }

    static std::string open(LcsService& svc, double now = 0.0) {
        const auto out = svc.handle(msg("console-1", 1, CallConnectRequest{"target-0", "console-1"}), now);
        EXPECT_EQ(out.size(), 1u);
        EXPECT_TRUE(std::holds_alternative<Ack>(out.front().message.body));
        return out.front().message.session_id;
    }

    static MeasurementReport report(const std::string& sme, std::uint64_t seq, double t, Vec2 p, double v = -80.0) {
        MeasurementReport r = testing::omni_report(p, v, seq);
        r.sme_id = sme;
        r.timestamp_s = t;
        r.rssi.timestamp_s = t;
        return r;
    }

    static const ErrorMsg* error_of(const std::vector<Outbound>& out) {
        for (const auto& o : out) {
            if (const auto* e = std::get_if<ErrorMsg>(&o.message.body)) return e;
        }
        return nullptr;
    }
};

TEST_F(ServiceTest, RejectsBadTokenAndUnregisteredSenders) {
    LcsService svc(config());
    auto out = svc.handle(msg("sme-1", 0, Hello{ClientRole::sme, "sme-1", "wrong"}), 0.0);
    ASSERT_NE(error_of(out), nullptr);
    EXPECT_EQ(error_of(out)->code, "unauthorized");
    EXPECT_FALSE(svc.role_of("sme-1"));

    out = svc.handle(msg("sme-1", 1, CallConnectRequest{"target-0", "sme-1"}), 0.0);
    ASSERT_NE(error_of(out), nullptr);
    EXPECT_EQ(error_of(out)->code, "unregistered_sender");
    EXPECT_EQ(error_of(out)->ref_seq, 1u);
}

TEST_F(ServiceTest, SessionActivatesAfterSetupDelayAndBroadcastsConfig) {
    LcsService svc(config());
    hello(svc, "console-1", ClientRole::console);
    hello(svc, "sme-1", ClientRole::sme);
    hello(svc, "sme-2", ClientRole::sme);
    const std::string id = open(svc);
    EXPECT_EQ(id, "session-0001");
    EXPECT_EQ(svc.status(id), SessionStatus::pending);

    auto out = svc.handle(msg("sme-1", 5, MeasurementReportMsg{report("sme-1", 1, 0.5, {10, 10})}, id), 0.5);
    ASSERT_NE(error_of(out), nullptr);
    EXPECT_EQ(error_of(out)->code, "session_not_active");

    EXPECT_TRUE(svc.tick(1.9).empty() || svc.status(id) == SessionStatus::pending);
    out = svc.tick(2.0);
    EXPECT_EQ(svc.status(id), SessionStatus::active);
    int configs = 0;
    for (const auto& o : out) {
        if (const auto* c = std::get_if<ChannelConfigMsg>(&o.message.body)) {
            ++configs;
            EXPECT_EQ(c->config.target_id, "target-0");
            EXPECT_TRUE(o.to == "sme-1" || o.to == "sme-2");
        }
    }
    EXPECT_EQ(configs, 2);
}

TEST_F(ServiceTest, PreloadedConfigSkipsBroadcast) {
    auto c = config();
    c.preloaded_config = true;
    LcsService svc(std::move(c));
    hello(svc, "console-1", ClientRole::console);
    hello(svc, "sme-1", ClientRole::sme);
    const std::string id = open(svc);
    for (const auto& o : svc.tick(2.0)) EXPECT_FALSE(std::holds_alternative<ChannelConfigMsg>(o.message.body));
    EXPECT_EQ(svc.status(id), SessionStatus::active);
}

TEST_F(ServiceTest, OneSessionPerTargetAndUnreachableTargets) {
    auto c = config();
    c.unreachable_targets = {"target-9"};
    LcsService svc(std::move(c));
    hello(svc, "console-1", ClientRole::console);
    hello(svc, "sme-1", ClientRole::sme);
    const std::string id = open(svc);

    auto out = svc.handle(msg("console-1", 2, CallConnectRequest{"target-0", "console-1"}), 0.1);
    ASSERT_NE(error_of(out), nullptr);
    EXPECT_EQ(error_of(out)->code, "session_exists");
    EXPECT_EQ(error_of(out)->detail, id);

    out = svc.handle(msg("console-1", 3, CallConnectRequest{"target-9", "console-1"}), 0.1);
    ASSERT_NE(error_of(out), nullptr);
    EXPECT_EQ(error_of(out)->code, "target_unreachable");

    out = svc.handle(msg("sme-1", 4, CallConnectRequest{"target-1", "sme-1"}), 0.1);
    ASSERT_NE(error_of(out), nullptr);
    EXPECT_EQ(error_of(out)->code, "forbidden");

    svc.close(id, "found", 5.0);
    EXPECT_FALSE(svc.session_for("target-0"));
    EXPECT_EQ(open(svc, 6.0), "session-0002");
}

TEST_F(ServiceTest, IngestIsIdempotentAndOrdered) {
    LcsService svc(config(0.0));
    hello(svc, "console-1", ClientRole::console);
    hello(svc, "sme-1", ClientRole::sme);
    hello(svc, "sme-2", ClientRole::sme);
    const std::string id = open(svc);
    svc.tick(0.0);

    const auto a = report("sme-2", 1, 3.0, {1, 1});
    const auto b = report("sme-1", 7, 3.0, {2, 2});
    const auto c = report("sme-1", 8, 1.0, {3, 3});
    for (const auto& r : {a, b, c, a, b}) {
        const auto out = svc.handle(msg(r.sme_id, r.seq, MeasurementReportMsg{r}, id), 4.0);
        ASSERT_EQ(out.size(), 1u);
        EXPECT_TRUE(std::holds_alternative<Ack>(out.front().message.body));
    }
    const auto& stored = svc.reports(id);
    ASSERT_EQ(stored.size(), 3u);
    EXPECT_EQ(stored[0], c);
    EXPECT_EQ(stored[1], b);
    EXPECT_EQ(stored[2], a);
    EXPECT_EQ(svc.ingest(id, a, 5.0), IngestResult::duplicate);
}

TEST_F(ServiceTest, ClosedSessionProcessesNothing) {
    LcsService svc(config(0.0));
    hello(svc, "admin-1", ClientRole::admin);
    hello(svc, "sme-1", ClientRole::sme);
    const auto out0 = svc.handle(msg("admin-1", 1, CallConnectRequest{"target-0", "admin-1"}), 0.0);
    const std::string id = out0.front().message.session_id;
    svc.tick(0.0);
    svc.handle(msg("admin-1", 2, CloseSession{"cancelled"}, id), 1.0);
    EXPECT_EQ(svc.status(id), SessionStatus::closed);

    const auto r = report("sme-1", 1, 1.5, {1, 1});
    const auto out = svc.handle(msg("sme-1", 3, MeasurementReportMsg{r}, id), 1.5);
    ASSERT_NE(error_of(out), nullptr);
    EXPECT_EQ(error_of(out)->code, "session_closed");
    EXPECT_TRUE(svc.reports(id).empty());
    EXPECT_THROW(svc.ingest(id, r, 2.0), std::invalid_argument);
    EXPECT_EQ(svc.events(id).back().event, "session_closed");
}

TEST_F(ServiceTest, RegenerationIsThrottledUnderFlood) {
    LcsService svc(config(0.0));
    hello(svc, "console-1", ClientRole::console);
    hello(svc, "sme-1", ClientRole::sme);
    const std::string id = open(svc);
    svc.tick(0.0);

    int maps = 0;
    int estimates = 0;
    Rng rng(9);
    std::uniform_real_distribution<double> u(0.0, 100.0);
    for (int i = 1; i <= 1000; ++i) {
        const double t = i * 0.01;  // 100 Hz for 10 s
        const auto r = report("sme-1", static_cast<std::uint64_t>(i), t, {u(rng), u(rng)}, -60.0 - u(rng) / 4);
        svc.handle(msg("sme-1", static_cast<std::uint64_t>(i), MeasurementReportMsg{r}, id), t);
        for (const auto& o : svc.tick(t)) {
            maps += std::holds_alternative<ContourMapMsg>(o.message.body) ? 1 : 0;
            estimates += std::holds_alternative<LocationEstimateMsg>(o.message.body) ? 1 : 0;
        }
    }
    EXPECT_GE(maps, 9);
    EXPECT_LE(maps, 11);  // 1.1 per second
    EXPECT_LE(estimates, 11);
    const ContourMap& m = svc.map(id, svc.regions_with_reports(id).front(), 10.0);
    EXPECT_GE(m.generation, 1u);
}

TEST_F(ServiceTest, PersistsReportsEventsAndOutcome) {
    const auto dir = std::filesystem::temp_directory_path() / "helps_service_test";
    std::filesystem::remove_all(dir);
    auto c = config(0.0);
    c.persist_dir = dir;
    {
        LcsService svc(std::move(c));
        hello(svc, "console-1", ClientRole::console);
        hello(svc, "sme-1", ClientRole::sme);
        const std::string id = open(svc);
        svc.tick(0.0);
        for (std::uint64_t i = 1; i <= 5; ++i) {
            const auto r = report("sme-1", i, i * 0.08, {static_cast<double>(i), 0});
            svc.handle(msg("sme-1", i, MeasurementReportMsg{r}, id), 1.0);
        }
        svc.handle(msg("sme-1", 3, MeasurementReportMsg{report("sme-1", 3, 0.24, {3, 0})}, id), 1.0);
        svc.close(id, "found", 2.0);
        svc.write_outcome(id, {{"found", true}});
    }
    const auto session_dir = dir / "session-0001";
    std::ifstream reports(session_dir / "reports.jsonl");
    std::string line;
    int n = 0;
    while (std::getline(reports, line)) {
        const auto r = report_from_json(nlohmann::json::parse(line));
        EXPECT_EQ(r.seq, static_cast<std::uint64_t>(++n));
    }
    EXPECT_EQ(n, 5);
    std::ifstream events(session_dir / "events.jsonl");
    int e = 0;
    std::string last;
    while (std::getline(events, line)) {
        ++e;
        last = event_from_json(nlohmann::json::parse(line)).event;
    }
    EXPECT_GE(e, 3);
    EXPECT_EQ(last, "session_closed");
    std::ifstream outcome(session_dir / "outcome.json");
    EXPECT_TRUE(nlohmann::json::parse(outcome).at("found").get<bool>());
    std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace helps
