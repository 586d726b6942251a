// SPDX-FileCopyrightText: Copyright (c) 2026 The helps-sim Authors
// SPDX-License-Identifier: Apache-2.0

#include "helps/harness.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "helps/rng.hpp"

namespace helps {

std::string_view to_string(Placement placement) {
    switch (placement) {
        case Placement::fixed: return "fixed";
        case Placement::uniform_random_room: return "uniform-random-room";
        case Placement::uniform_random_building: return "uniform-random-building";
    }
    return "fixed";
}

Placement placement_from_string(std::string_view name) {
    for (auto p : {Placement::fixed, Placement::uniform_random_room, Placement::uniform_random_building}) {
        if (to_string(p) == name) return p;
    }
    throw std::invalid_argument("unknown placement '" + std::string(name) + "'");
}

std::string_view to_string(Milestone milestone) {
    switch (milestone) {
        case Milestone::building: return "building";
        case Milestone::room: return "room";
        case Milestone::found: return "found";
    }
    return "found";
}

Milestone milestone_from_string(std::string_view name) {
    for (auto m : {Milestone::building, Milestone::room, Milestone::found}) {
        if (to_string(m) == name) return m;
    }
    throw std::invalid_argument("unknown milestone '" + std::string(name) + "'");
}

void validate_batch(const BatchSpec& spec) {
    if (spec.n_trials < 1) throw std::invalid_argument("n_trials must be at least 1");
    if (!(spec.deadline_s > 0.0)) throw std::invalid_argument("deadline must be positive");
    if (spec.workers < 1) throw std::invalid_argument("workers must be at least 1");
}

double lower_quantile(std::vector<double> samples, double q) {
    if (samples.empty()) throw std::invalid_argument("lower_quantile: empty sample");
    std::sort(samples.begin(), samples.end());
    const auto n = static_cast<double>(samples.size());
    // Smallest index k with (k + 1) / n >= q; the epsilon absorbs q * n landing a hair above an integer.
    const auto k = static_cast<std::size_t>(std::max(0.0, std::ceil(q * n - 1e-9) - 1.0));
    return samples[std::min(k, samples.size() - 1)];
}

MetricsSummary summarize(const std::vector<ScoredTime>& outcomes, double deadline_s) {
    if (outcomes.empty()) throw std::invalid_argument("summarize: no outcomes");
    MetricsSummary s;
    s.n_trials = static_cast<int>(outcomes.size());
    s.deadline_s = deadline_s;
    std::vector<double> times;
    int within = 0;
    for (const auto& o : outcomes) {
        if (!o.success) continue;
        times.push_back(o.time_s);
        if (o.time_s <= deadline_s) ++within;
    }
    s.successes = static_cast<int>(times.size());
    s.success_rate_within_deadline = static_cast<double>(within) / static_cast<double>(outcomes.size());
    if (!times.empty()) {
        // Sorted before summing so the mean does not depend on outcome order.
        std::sort(times.begin(), times.end());
        double sum = 0.0;
        for (double t : times) sum += t;
        s.mean_time_s = sum / static_cast<double>(times.size());
        s.median_time_s = lower_quantile(times, 0.5);
        s.p90_time_s = lower_quantile(times, 0.9);
    }
    return s;
}

Scenario place_target(const Scenario& scenario, Placement placement, std::uint64_t seed) {
    if (placement == Placement::fixed) return scenario;
    if (scenario.buildings.empty()) throw ScenarioError(ScenarioError::Kind::validation, "random placement needs at least one building");
    Scenario sc = scenario;
    Rng rng = make_rng(seed, "placement");
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const auto pick = [&](std::size_t n) {
        return static_cast<int>(std::uniform_int_distribution<std::size_t>(0, n - 1)(rng));
    };
    int b = 0;
    int f = 0;
    int r = 0;
    if (placement == Placement::uniform_random_building) {
        b = pick(sc.buildings.size());
        const Building& bb = sc.buildings[static_cast<std::size_t>(b)];
        f = pick(bb.floors.size());
        r = pick(bb.floors[static_cast<std::size_t>(f)].rooms.size());
    } else {
        std::vector<std::array<int, 3>> rooms;
        for (std::size_t bi = 0; bi < sc.buildings.size(); ++bi) {
            const auto& floors = sc.buildings[bi].floors;
            for (std::size_t fi = 0; fi < floors.size(); ++fi) {
                for (std::size_t ri = 0; ri < floors[fi].rooms.size(); ++ri) {
                    rooms.push_back({static_cast<int>(bi), static_cast<int>(fi), static_cast<int>(ri)});
                }
            }
        }
        if (rooms.empty()) throw ScenarioError(ScenarioError::Kind::validation, "random placement needs at least one room");
        const auto& chosen = rooms[static_cast<std::size_t>(pick(rooms.size()))];
        b = chosen[0];
        f = chosen[1];
        r = chosen[2];
    }
    const double u = u01(rng);
    const double v = u01(rng);
    sc.target.pose = pose_in_room(sc, b, f, r, u, v);
    sc.target.room_index = r;
    return sc;
}

TrialRecord run_trial(const BatchSpec& spec, int index) {
    const std::uint64_t seed = spec.seed_base + static_cast<std::uint64_t>(index);
    const Scenario sc = place_target(spec.scenario, spec.placement, seed);
    RunOptions options = spec.options;
    options.persist_dir.reset();
    if (spec.out_dir) options.persist_dir = *spec.out_dir / "trials" / ("trial-" + std::to_string(seed));
    const SessionResult result = run_session(sc, spec.policy, seed, options);
    const SearchOutcome& o = result.outcome;

    TrialRecord rec;
    rec.seed = seed;
    rec.building_time_s = o.building_id_time_s;
    if (o.room_id_time_s && o.building_id_time_s) rec.room_time_s = *o.room_id_time_s - *o.building_id_time_s;
    rec.total_time_s = o.total_time_s;
    rec.distance_m = o.distance_m;
    rec.reason = o.reason;
    if (sc.target.pose.building_index) {
        rec.target_building = *sc.target.pose.building_index;
        rec.target_floor = sc.target.pose.floor_index.value_or(0);
        rec.target_room = sc.target.room_index.value_or(-1);
    }
    switch (spec.milestone) {
        case Milestone::building:
            rec.success = o.building_correct && rec.building_time_s.has_value();
            rec.time_s = rec.building_time_s.value_or(o.total_time_s);
            break;
        case Milestone::room:
            rec.success = o.room_correct && rec.room_time_s.has_value();
            rec.time_s = rec.room_time_s.value_or(o.total_time_s);
            break;
        case Milestone::found:
            rec.success = o.success;
            rec.time_s = o.total_time_s;
            break;
    }
    return rec;
}

BatchResult run_batch(const BatchSpec& spec) {
    validate_batch(spec);
    BatchResult result;
    result.trials.resize(static_cast<std::size_t>(spec.n_trials));
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    const auto worker = [&] {
        for (int i = next++; i < spec.n_trials; i = next++) {
            try {
                result.trials[static_cast<std::size_t>(i)] = run_trial(spec, i);
            } catch (...) {
                const std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    const int n_workers = std::min(spec.workers, spec.n_trials);
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (error) std::rethrow_exception(error);

    std::vector<ScoredTime> scored;
    std::vector<double> building, room, total;
    for (const auto& t : result.trials) {
        scored.push_back({t.success, t.time_s});
        ++result.reasons[t.reason];
        if (!t.success) continue;
        if (t.building_time_s) building.push_back(*t.building_time_s);
        if (t.room_time_s) room.push_back(*t.room_time_s);
        total.push_back(t.total_time_s);
    }
    result.summary = summarize(scored, spec.deadline_s);
    const auto mean = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
    };
    if (!building.empty()) result.milestone_means["building"] = mean(building);
    if (!room.empty()) result.milestone_means["room"] = mean(room);
    if (!total.empty()) result.milestone_means["total"] = mean(total);
    result.fingerprint = batch_fingerprint(spec);

    if (spec.out_dir) {
        std::filesystem::create_directories(*spec.out_dir);
        std::ofstream csv(*spec.out_dir / "trials.csv");
        write_trials_csv(csv, result.trials);
        std::ofstream summary(*spec.out_dir / "summary.json");
        summary << summary_json(spec, result).dump(2) << "\n";
    }
    return result;
}

std::string batch_fingerprint(const BatchSpec& spec) {
    const nlohmann::json j = {{"scenario", nlohmann::json::parse(serialize_scenario(spec.scenario))},
                              {"policy", std::string(to_string(spec.policy))},
                              {"n_trials", spec.n_trials},
                              {"seed_base", spec.seed_base},
                              {"deadline_s", spec.deadline_s},
                              {"placement", std::string(to_string(spec.placement))},
                              {"milestone", std::string(to_string(spec.milestone))},
                              {"building_known", spec.options.building_known},
                              {"stop_after_building", spec.options.stop_after_building}};
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash_tag(j.dump())));
    return buf;
}

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : ""; }

}  // namespace

void write_trials_csv(std::ostream& out, const std::vector<TrialRecord>& trials) {
    std::vector<std::string> ids;
    for (const auto& t : trials) {
        for (const auto& [id, d] : t.distance_m) {
            if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
        }
    }
    std::sort(ids.begin(), ids.end());
    out << "seed,success,building_time,room_time,total_time";
    for (const auto& id : ids) out << ",distance_" << id;
    out << ",milestone_time,target_building,target_floor,target_room,reason\n";
    for (const auto& t : trials) {
        out << t.seed << ',' << (t.success ? 1 : 0) << ',' << opt_num(t.building_time_s) << ','
            << opt_num(t.room_time_s) << ',' << num(t.total_time_s);
        for (const auto& id : ids) {
            const auto it = t.distance_m.find(id);
            out << ',' << (it == t.distance_m.end() ? "" : num(it->second));
        }
        out << ',' << num(t.time_s) << ',' << t.target_building << ',' << t.target_floor << ',' << t.target_room << ','
            << t.reason << '\n';
    }
}

nlohmann::json summary_json(const BatchSpec& spec, const BatchResult& result) {
    const auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    const MetricsSummary& s = result.summary;
    return {{"scenario", spec.scenario.name},
            {"policy", std::string(to_string(spec.policy))},
            {"placement", std::string(to_string(spec.placement))},
            {"milestone", std::string(to_string(spec.milestone))},
            {"n_trials", s.n_trials},
            {"successes", s.successes},
            {"success_rate_within_deadline", s.success_rate_within_deadline},
            {"deadline_s", s.deadline_s},
            {"mean_time_s", opt(s.mean_time_s)},
            {"median_time_s", opt(s.median_time_s)},
            {"p90_time_s", opt(s.p90_time_s)},
            {"milestone_means_s", result.milestone_means},
            {"reasons", result.reasons},
            {"seed_base", spec.seed_base},
            {"fingerprint", result.fingerprint}};
}

}  // namespace helps
