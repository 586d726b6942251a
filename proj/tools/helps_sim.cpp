// SPDX-FileCopyrightText: Copyright (c) 2026 The helps-sim Authors
// SPDX-License-Identifier: Apache-2.0

// helps_sim: single sessions, Monte Carlo batches and scenario utilities.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "helps/harness.hpp"
#include "helps/layouts.hpp"
#include "helps/rng.hpp"
#include "helps/server.hpp"

namespace {

using namespace helps;

struct SessionArgs {
    std::string scenario_path;
    std::string policy = "helps";
    std::uint64_t seed = 1;
    std::string placement = "fixed";
    bool building_known = false;
    bool stop_after_building = false;
};

void add_session_options(CLI::App* app, SessionArgs& a) {
    app->add_option("--scenario", a.scenario_path, "Scenario JSON file")->required()->check(CLI::ExistingFile);
    app->add_option("--policy", a.policy, "helps | knock_baseline")->capture_default_str();
    app->add_option("--seed", a.seed, "Session seed")->capture_default_str();
    app->add_option("--placement", a.placement, "fixed | uniform-random-room | uniform-random-building")
        ->capture_default_str();
    app->add_flag("--building-known", a.building_known, "Start the floor search at the caller's building");
    app->add_flag("--stop-after-building", a.stop_after_building, "End once a building is confirmed");
}

RunOptions run_options(const SessionArgs& a) {
    RunOptions o;
    o.building_known = a.building_known;
    o.stop_after_building = a.stop_after_building;
    return o;
}

Scenario placed_scenario(const SessionArgs& a) {
    return place_target(load_scenario_file(a.scenario_path), placement_from_string(a.placement), a.seed);
}

int cmd_run(const SessionArgs& a, const std::string& persist, bool interactive, const std::string& host,
            std::uint16_t port, double speedup) {
    const Scenario sc = placed_scenario(a);
    RunOptions options = run_options(a);
    if (!persist.empty()) options.persist_dir = persist;
    const Policy policy = policy_from_string(a.policy);
    if (!interactive) {
        const auto r = run_session(sc, policy, a.seed, options);
        std::cout << to_json(r.outcome).dump(2) << "\n";
        return r.outcome.success ? 0 : 2;
    }
    if (policy != Policy::helps) throw std::invalid_argument("--interactive needs the helps policy");
    SessionRunner runner(sc, a.seed, options);
    std::optional<double> done_at;
    TcpServer* server_ptr = nullptr;
    TcpServer server(
        host, port, [&](const Message& m, double) { return runner.handle_client(m); },
        [&](double now) {
            std::vector<Outbound> out;
            while (!runner.done() && runner.clock() < now * speedup) {
                auto step = runner.step();
                out.insert(out.end(), step.begin(), step.end());
            }
            if (runner.done() && !done_at) done_at = now;
            // Give consoles a moment to read the final frames.
            if (done_at && now - *done_at > 2.0) server_ptr->stop();
            return out;
        });
    server_ptr = &server;
    std::cerr << "listening on " << host << ":" << server.port() << " (token sim-token, session "
              << runner.session_id() << ")\n";
    server.run();
    std::cout << to_json(runner.result().outcome).dump(2) << "\n";
    return runner.result().outcome.success ? 0 : 2;
}

int cmd_batch(const SessionArgs& a, int trials, double deadline, int workers, const std::string& milestone,
              const std::string& out) {
    BatchSpec spec;
    spec.scenario = load_scenario_file(a.scenario_path);
    spec.policy = policy_from_string(a.policy);
    spec.n_trials = trials;
    spec.seed_base = a.seed;
    spec.deadline_s = deadline;
    spec.placement = placement_from_string(a.placement);
    spec.milestone = milestone_from_string(milestone);
    spec.workers = workers;
    spec.options = run_options(a);
    if (!out.empty()) spec.out_dir = out;
    const auto result = run_batch(spec);
    std::cout << summary_json(spec, result).dump(2) << "\n";
    return 0;
}

int cmd_export_contour(const SessionArgs& a, const std::string& out) {
    const Scenario sc = placed_scenario(a);
    SessionRunner runner(sc, a.seed, run_options(a));
    while (!runner.done()) runner.step();
    const auto& map = runner.last_map();
    if (!map) {
        std::cerr << "the session produced no contour map\n";
        return 2;
    }
    if (out.empty()) {
        write_contour_csv(std::cout, *map);
    } else {
        std::ofstream f(out);
        write_contour_csv(f, *map);
    }
    return 0;
}

int cmd_export_shadowing(const SessionArgs& a, int building, int floor, double cell, const std::string& out) {
    const Scenario sc = load_scenario_file(a.scenario_path);
    const ShadowingField field(sc, derive_seed(a.seed, "shadowing"));
    const Rect area = building < 0 ? sc.extent : sc.buildings.at(static_cast<std::size_t>(building)).footprint;
    if (out.empty()) {
        field.write_csv(std::cout, {building, floor}, area, cell);
    } else {
        std::ofstream f(out);
        field.write_csv(f, {building, floor}, area, cell);
    }
    return 0;
}

int cmd_generate(const std::string& dir) {
    std::filesystem::create_directories(dir);
    const std::pair<const char*, Scenario> all[] = {{"minimal", make_minimal_scenario()},
                                                    {"testbed", make_testbed_scenario()},
                                                    {"room_search", make_room_search_scenario()}};
    for (const auto& [name, sc] : all) {
        const auto path = std::filesystem::path(dir) / (std::string(name) + ".json");
        std::ofstream(path) << serialize_scenario(sc) << "\n";
        std::cout << path.string() << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Emergency caller search simulator"};
    app.require_subcommand(1);

    SessionArgs run_args;
    std::string persist;
    bool interactive = false;
    std::string host = "127.0.0.1";
    std::uint16_t port = 7400;
    double speedup = 1.0;
    auto* run = app.add_subcommand("run", "Run one search session");
    add_session_options(run, run_args);
    run->add_option("--out", persist, "Directory for the session's reports, events and outcome");
    run->add_flag("--interactive", interactive, "Serve the session over TCP for a console");
    run->add_option("--host", host, "Interactive listen address")->capture_default_str();
    run->add_option("--port", port, "Interactive listen port (0 picks one)")->capture_default_str();
    run->add_option("--speedup", speedup, "Simulated seconds per wall-clock second")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    SessionArgs batch_args;
    int trials = 200;
    double deadline = 180.0;
    int workers = 1;
    std::string milestone = "found";
    std::string batch_out;
    auto* batch = app.add_subcommand("batch", "Run a Monte Carlo batch; trial i uses seed + i");
    add_session_options(batch, batch_args);
    batch->add_option("--trials", trials, "Number of trials")->check(CLI::PositiveNumber)->capture_default_str();
    batch->add_option("--deadline", deadline, "Success deadline in seconds")->capture_default_str();
    batch->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
    batch->add_option("--milestone", milestone, "building | room | found")->capture_default_str();
    batch->add_option("--out", batch_out, "Output directory for trials.csv, summary.json and session logs");

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "Check a scenario file");
    validate->add_option("--scenario", validate_path, "Scenario JSON file")->required();

    SessionArgs contour_args;
    std::string contour_out;
    auto* contour = app.add_subcommand("export-contour", "Run a session and dump its last contour grid as CSV");
    add_session_options(contour, contour_args);
    contour->add_option("--out", contour_out, "CSV path (default stdout)");

    SessionArgs shadow_args;
    int shadow_building = -1;
    int shadow_floor = 0;
    double shadow_cell = 1.0;
    std::string shadow_out;
    auto* shadow = app.add_subcommand("export-shadowing", "Dump one shadowing region as CSV");
    shadow->add_option("--scenario", shadow_args.scenario_path, "Scenario JSON file")->required();
    shadow->add_option("--seed", shadow_args.seed, "Session seed")->capture_default_str();
    shadow->add_option("--building", shadow_building, "Building index, -1 for outdoor")->capture_default_str();
    shadow->add_option("--floor", shadow_floor, "Floor index")->capture_default_str();
    shadow->add_option("--cell", shadow_cell, "Grid cell in meters")->check(CLI::PositiveNumber)->capture_default_str();
    shadow->add_option("--out", shadow_out, "CSV path (default stdout)");

    std::string generate_dir = "scenarios";
    auto* generate = app.add_subcommand("generate", "Write the bundled scenarios");
    generate->add_option("--out-dir", generate_dir, "Destination directory")->capture_default_str();

    CLI11_PARSE(app, argc, argv);
    try {
        if (*run) return cmd_run(run_args, persist, interactive, host, port, speedup);
        if (*batch) return cmd_batch(batch_args, trials, deadline, workers, milestone, batch_out);
        if (*validate) {
            load_scenario_file(validate_path);
            std::cout << "ok\n";
            return 0;
        }
        if (*contour) return cmd_export_contour(contour_args, contour_out);
        if (*shadow) return cmd_export_shadowing(shadow_args, shadow_building, shadow_floor, shadow_cell, shadow_out);
        if (*generate) return cmd_generate(generate_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
