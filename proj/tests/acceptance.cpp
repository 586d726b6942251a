// SPDX-FileCopyrightText: Copyright (c) 2026 The helps-sim Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance run: prints one PASS/FAIL line per criterion and exits non-zero
// when any criterion fails. Runs headless; the bundled scenario files are used
// for the batch criteria.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

#include "helps/harness.hpp"
#include "helps/layouts.hpp"
#include "helps/rng.hpp"
#include "message_gen.hpp"
#include "test_support.hpp"

namespace {

using namespace helps;

int g_failures = 0;

void report(bool pass, const std::string& name, const std::string& detail) {
    std::cout << (pass ? "[PASS] " : "[FAIL] ") << name << ": " << detail << std::endl;
    if (!pass) ++g_failures;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

int workers() { return static_cast<int>(std::max(2u, std::thread::hardware_concurrency())); }

std::string csv_of(const BatchResult& r) {
    std::ostringstream out;
    write_trials_csv(out, r.trials);
    return out.str();
}

struct Batches {
    BatchResult building;
    BatchResult room;
    BatchResult knock;
    bool deterministic = true;
    std::string determinism_detail;
};

/// Runs a spec serially and in parallel; records whether the trials agree.
BatchResult run_twice(BatchSpec spec, Batches& b) {
    spec.workers = 1;
    BatchResult serial = run_batch(spec);
    spec.workers = workers();
    const BatchResult parallel = run_batch(spec);
    const bool same = serial.trials == parallel.trials && csv_of(serial) == csv_of(parallel) &&
                      serial.summary == parallel.summary;
    if (!same) b.deterministic = false;
    b.determinism_detail += std::string(b.determinism_detail.empty() ? "" : ", ") + spec.scenario.name + "/" +
                            std::string(to_string(spec.policy)) + " " + std::to_string(spec.n_trials) +
                            " trials 1 vs " + std::to_string(spec.workers) + " workers " +
                            (same ? "identical" : "DIFFER");
    return serial;
}

Batches run_batches() {
    Batches b;
    BatchSpec building;
    building.scenario = load_scenario_file(testing::source_path("scenarios/testbed.json"));
    building.n_trials = 200;
    building.seed_base = 1000;
    building.placement = Placement::uniform_random_building;
    building.milestone = Milestone::building;
    building.options.stop_after_building = true;
    b.building = run_twice(building, b);

    BatchSpec room;
    room.scenario = load_scenario_file(testing::source_path("scenarios/room_search.json"));
    room.n_trials = 200;
    room.seed_base = 2000;
    room.placement = Placement::uniform_random_room;
    room.milestone = Milestone::room;
    room.options.building_known = true;
    b.room = run_twice(room, b);

    BatchSpec knock = room;
    knock.policy = Policy::knock_baseline;
    b.knock = run_twice(knock, b);
    return b;
}

void building_criterion(const Batches& b) {
    const auto& s = b.building.summary;
    report(s.success_rate_within_deadline >= 0.8 && s.n_trials >= 200, "building search >= 80% within 180 s",
           fmt("%.3f of %.0f testbed trials (mean %.1f s", s.success_rate_within_deadline, s.n_trials,
               s.mean_time_s.value_or(0.0)) +
               fmt(", p90 %.1f s)", s.p90_time_s.value_or(0.0)));
}

void room_criterion(const Batches& b) {
    const auto& s = b.room.summary;
    report(s.success_rate_within_deadline >= 0.85 && s.n_trials >= 200, "room search >= 85% within 180 s",
           fmt("%.3f of %.0f trials (mean %.1f s", s.success_rate_within_deadline, s.n_trials,
               s.mean_time_s.value_or(0.0)) +
               fmt(", p90 %.1f s)", s.p90_time_s.value_or(0.0)));
}

void baseline_criterion(const Batches& b) {
    const double helps_mean = b.room.summary.mean_time_s.value_or(1e300);
    const double knock_mean = b.knock.summary.mean_time_s.value_or(0.0);
    const double ratio = helps_mean / knock_mean;
    const bool calibrated = knock_mean >= 400.0 && knock_mean <= 520.0;
    report(ratio <= 0.4 && calibrated && b.knock.summary.successes == b.knock.summary.n_trials,
           "HELPS / knock baseline <= 0.40 with baseline mean in [400, 520] s",
           fmt("%.1f s / %.1f s = %.3f", helps_mean, knock_mean, ratio));
}

void area_ratio_criterion() {
    const double r = area_ratio(50.0, 125.0);
    report(r == 0.16, "area_ratio(50, 125) == 0.16", fmt("%.17g", r));
}

/// Three vehicle SMEs drive straight at an outdoor caller in an open field and
/// stop at visual range. Checkpoints are fractions of the approach, which ends
/// when the last SME arrives; at each one the LCS re-estimates from its latest
/// report window.
std::vector<double> approach_replay(std::uint64_t seed, const std::vector<double>& fractions) {
    Scenario sc = make_minimal_scenario();
    sc.extent = {0.0, 0.0, 250.0, 300.0};
    Rng place = make_rng(seed, "approach-target");
    std::uniform_real_distribution<double> ux(50.0, 200.0);
    std::uniform_real_distribution<double> uy(100.0, 250.0);
    const Vec2 target{ux(place), uy(place)};
    sc.target.pose = outdoor_pose(target);
    const ShadowingField shadowing(sc, derive_seed(seed, "shadowing"));
    const ChannelConfig cfg = sc.channel();

    std::vector<SmeState> smes;
    std::vector<Rng> rngs;
    double approach_s = 0.0;
    const Vec2 starts[] = {{50.0, 0.0}, {125.0, 0.0}, {200.0, 0.0}};
    for (std::size_t i = 0; i < 3; ++i) {
        SmeState s;
        s.id = "sme-" + std::to_string(i + 1);
        s.pose = outdoor_pose(starts[i]);
        s.speed_mps = 8.0;
        const Vec2 to_target = target - starts[i];
        const double stop = std::max(0.0, to_target.norm() - sc.timing.visual_range_m);
        approach_s = std::max(approach_s, stop / s.speed_mps);
        assign_route(s, {starts[i], starts[i] + to_target * (stop / to_target.norm())});
        smes.push_back(std::move(s));
        rngs.emplace_back(derive_seed(seed, "approach-sme", i));
    }

    std::vector<MeasurementReport> reports;
    std::vector<double> areas;
    double t = 0.0;
    const double dt = 0.25;
    for (double fraction : fractions) {
        const double checkpoint = fraction * approach_s;
        while (t < checkpoint - 1e-9) {
            const double h = std::min(dt, checkpoint - t);
            for (std::size_t i = 0; i < smes.size(); ++i) {
                for (auto& r : step(smes[i], h, sc, cfg, &shadowing, rngs[i])) {
                    if (r.rssi.valid) reports.push_back(std::move(r));
                }
            }
            t += h;
        }
        std::vector<MeasurementReport> window = reports;
        std::stable_sort(window.begin(), window.end(),
                         [](const auto& a, const auto& b) { return a.timestamp_s < b.timestamp_s; });
        const auto keep = static_cast<std::size_t>(sc.timing.estimate_window);
        if (window.size() > keep) window.erase(window.begin(), window.end() - static_cast<std::ptrdiff_t>(keep));
        try {
            areas.push_back(derive_boundary(estimate_position(window, sc.extent, sc.rf)).ellipse_area());
        } catch (const LcsError&) {
            areas.push_back(std::numeric_limits<double>::infinity());
        }
    }
    return areas;
}

void shrinking_ellipse_criterion() {
    const std::vector<double> checkpoints{1.0 / 6.0, 2.0 / 6.0, 3.0 / 6.0, 4.0 / 6.0, 5.0 / 6.0, 1.0};
    std::vector<std::vector<double>> per_checkpoint(checkpoints.size());
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto areas = approach_replay(seed, checkpoints);
        for (std::size_t k = 0; k < areas.size(); ++k) per_checkpoint[k].push_back(areas[k]);
    }
    bool monotone = true;
    std::string detail = "median ellipse area (m^2) at approach fraction";
    double previous = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < checkpoints.size(); ++k) {
        const double median = lower_quantile(per_checkpoint[k], 0.5);
        detail += fmt(" %.2f=%.0f", checkpoints[k], median);
        if (median > previous) monotone = false;
        previous = median;
    }
    report(monotone, "median error-ellipse area non-increasing over 100 approach replays", detail);
}

void estimator_criterion() {
    const RfParams rf;
    std::mt19937_64 rng(20260);
    std::uniform_real_distribution<double> ux(10.0, 240.0);
    std::uniform_real_distribution<double> uy(10.0, 290.0);
    std::uniform_int_distribution<int> count(8, 20);
    const Rect area{0.0, 0.0, 250.0, 300.0};
    int ok = 0;
    double worst = 0.0;
    for (int g = 0; g < 50; ++g) {
        const Vec2 truth{ux(rng), uy(rng)};
        std::vector<MeasurementReport> reports;
        const int n = count(rng);
        for (int i = 0; i < n; ++i) {
            Vec2 p{ux(rng), uy(rng)};
            while (distance(p, truth) < 2.0) p = {ux(rng), uy(rng)};
            reports.push_back(testing::free_space_report(p, truth, rf));
        }
        const PositionEstimate est = estimate_position(reports, area, rf);
        const Vec2 brute = testing::brute_force_ml(reports, area, 1.0, rf);
        const double dev = std::max(std::abs(est.xy.x - brute.x), std::abs(est.xy.y - brute.y));
        worst = std::max(worst, dev);
        if (dev <= kOutdoorCellM) ++ok;
    }
    report(ok == 50, "estimator matches 1 m brute-force grid within one cell",
           fmt("%.0f/50 geometries, worst per-axis deviation %.2f m", ok, worst));
}

void idw_criterion() {
    std::mt19937_64 rng(31337);
    std::uniform_int_distribution<int> count(1, 40);
    std::uniform_int_distribution<int> cell(0, 19);
    std::uniform_real_distribution<double> value(-120.0, -30.0);
    std::uniform_real_distribution<double> u(0.0, 100.0);
    const MapRegion region = MapRegion::outdoor({0.0, 0.0, 100.0, 100.0});
    const double cell_m = 5.0;
    long exact_violations = 0;
    long range_violations = 0;
    long exact_checks = 0;
    for (int set = 0; set < 10000; ++set) {
        std::vector<MeasurementReport> reports;
        std::vector<std::pair<int, int>> sampled_cells;
        const int n = count(rng);
        for (int i = 0; i < n; ++i) {
            if (i % 2 == 0) {
                // On a cell center: the map must reproduce the sample there.
                const int r = cell(rng);
                const int c = cell(rng);
                if (std::find(sampled_cells.begin(), sampled_cells.end(), std::pair{r, c}) != sampled_cells.end()) continue;
                sampled_cells.emplace_back(r, c);
                reports.push_back(testing::omni_report({(c + 0.5) * cell_m, (r + 0.5) * cell_m}, value(rng)));
            } else {
                reports.push_back(testing::omni_report({u(rng), u(rng)}, value(rng)));
            }
        }
        const ContourMap map = interpolate_idw(reports, region, cell_m);
        double lo = 1e300;
        double hi = -1e300;
        for (const auto& r : reports) {
            lo = std::min(lo, r.rssi.value_dbm);
            hi = std::max(hi, r.rssi.value_dbm);
        }
        for (int r = 0; r < map.rows; ++r) {
            for (int c = 0; c < map.cols; ++c) {
                const auto v = map.at(r, c);
                if (v && (*v < lo - 1e-9 || *v > hi + 1e-9)) ++range_violations;
            }
        }
        for (const auto& r : reports) {
            const int col = static_cast<int>(r.pose.x / cell_m);
            const int row = static_cast<int>(r.pose.y / cell_m);
            const Vec2 center = map.cell_center(row, col);
            if (distance(center, r.pose.xy()) > 1e-9) continue;
            // Another report within cell/4 of the same center would share the cell.
            const bool alone = std::none_of(reports.begin(), reports.end(), [&](const MeasurementReport& o) {
                return &o != &r && distance(o.pose.xy(), center) <= cell_m / 4.0;
            });
            if (!alone) continue;
            ++exact_checks;
            const auto v = map.at(row, col);
            if (!v || std::abs(*v - r.rssi.value_dbm) > 1e-9) ++exact_violations;
        }
    }
    report(exact_violations == 0 && range_violations == 0 && exact_checks > 0,
           "IDW exact at samples and bounded by sample range over 1e4 sets",
           fmt("%.0f exactness checks, %.0f exactness violations, %.0f range violations",
               static_cast<double>(exact_checks), static_cast<double>(exact_violations),
               static_cast<double>(range_violations)));
}

void protocol_criterion() {
    testing::MessageGenerator gen(777);
    int round_trip_failures = 0;
    for (int i = 0; i < 10000; ++i) {
        const Message m = gen.next();
        const std::string line = encode(m);
        if (decode(line) != m || encode(decode(line)) != line) ++round_trip_failures;
    }

    std::ifstream in(testing::golden_fixture_path());
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) lines.push_back(line + "\n");
    const auto golden = testing::golden_messages();
    int golden_failures = lines.size() == golden.size() ? 0 : 1;
    for (std::size_t i = 0; i < std::min(lines.size(), golden.size()); ++i) {
        if (encode(golden[i]) != lines[i] || decode(lines[i]) != golden[i]) ++golden_failures;
    }

    // Every report delivered three times, in shuffled order.
    ServiceConfig cfg;
    cfg.token = "t";
    cfg.setup_delay_s = 0.0;
    cfg.world = make_minimal_scenario();
    LcsService svc(cfg);
    svc.handle(Message{std::string(kSchemaVersion), "", "sme-1", 0, Hello{ClientRole::sme, "sme-1", "t"}}, 0.0);
    svc.handle(Message{std::string(kSchemaVersion), "", "admin", 0, Hello{ClientRole::admin, "admin", "t"}}, 0.0);
    const auto opened =
        svc.handle(Message{std::string(kSchemaVersion), "", "admin", 1, CallConnectRequest{"target-0", "admin"}}, 0.0);
    const std::string session = opened.front().message.session_id;
    svc.tick(0.0);
    std::vector<Message> deliveries;
    for (std::uint64_t seq = 1; seq <= 300; ++seq) {
        MeasurementReport r = testing::omni_report({static_cast<double>(seq % 100), 10.0}, -60.0, seq);
        r.sme_id = "sme-1";
        r.timestamp_s = 0.08 * static_cast<double>(seq);
        for (int k = 0; k < 3; ++k) {
            deliveries.push_back(Message{std::string(kSchemaVersion), session, "sme-1", seq, MeasurementReportMsg{r}});
        }
    }
    std::mt19937_64 rng(5);
    std::shuffle(deliveries.begin(), deliveries.end(), rng);
    for (const auto& m : deliveries) svc.handle(m, 30.0);
    const auto& stored = svc.reports(session);
    bool ordered = std::is_sorted(stored.begin(), stored.end(), [](const auto& a, const auto& b) {
        return a.timestamp_s < b.timestamp_s;
    });
    const bool idempotent = stored.size() == 300 && ordered;

    report(round_trip_failures == 0 && golden_failures == 0 && idempotent,
           "protocol round trip, golden fixtures, idempotent ingestion",
           fmt("%.0f/10000 round-trip failures, %.0f golden mismatches, ", round_trip_failures, golden_failures) +
               std::to_string(stored.size()) + " reports stored from 900 deliveries");
}

}  // namespace

int main() {
    const auto start = std::chrono::steady_clock::now();
    try {
        area_ratio_criterion();
        estimator_criterion();
        idw_criterion();
        protocol_criterion();
        shrinking_ellipse_criterion();
        const Batches b = run_batches();
        building_criterion(b);
        room_criterion(b);
        baseline_criterion(b);
        report(b.deterministic, "per-trial records identical across worker counts", b.determinism_detail);
    } catch (const std::exception& e) {
        report(false, "acceptance run", e.what());
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << (g_failures == 0 ? "all criteria passed" : std::to_string(g_failures) + " criteria failed")
              << fmt(" (%.1f s)", wall) << std::endl;
    return g_failures == 0 ? 0 : 1;
}
