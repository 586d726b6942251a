// SPDX-FileCopyrightText: Copyright (c) 2026 The helps-sim Authors
// SPDX-License-Identifier: Apache-2.0

// Monte Carlo batches over search sessions and the metrics computed from them.
// Trial i runs with seed base + i and owns every random stream it uses, so the
// per-trial records do not depend on the number of workers.

#ifndef HELPS_HARNESS_HPP
#define HELPS_HARNESS_HPP

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "helps/orchestrator.hpp"

namespace helps {

enum class Placement { fixed, uniform_random_room, uniform_random_building };
std::string_view to_string(Placement placement);
Placement placement_from_string(std::string_view name);  // throws std::invalid_argument

/// Which time a batch scores against the deadline.
///   building: building identification time
///   room:     room identification time minus building identification time
///   found:    total session time
enum class Milestone { building, room, found };
std::string_view to_string(Milestone milestone);
Milestone milestone_from_string(std::string_view name);  // throws std::invalid_argument

struct BatchSpec {
    Scenario scenario;
    Policy policy = Policy::helps;
    int n_trials = 1;
    std::uint64_t seed_base = 0;
    double deadline_s = 180.0;
    Placement placement = Placement::fixed;
    Milestone milestone = Milestone::found;
    int workers = 1;
    RunOptions options;  // persist_dir is ignored; see out_dir
    /// Per-trial CSV, summary JSON and one session directory per trial.
    std::optional<std::filesystem::path> out_dir;
};

/// Throws std::invalid_argument for n_trials < 1, deadline <= 0 or workers < 1.
void validate_batch(const BatchSpec& spec);

struct TrialRecord {
    std::uint64_t seed = 0;
    bool success = false;           // the milestone was reached correctly
    double time_s = 0.0;            // milestone time (meaningful when success)
    std::optional<double> building_time_s;
    std::optional<double> room_time_s;  // after the building was identified
    double total_time_s = 0.0;
    std::map<std::string, double> distance_m;
    int target_building = -1;       // -1 for an outdoor caller
    int target_floor = -1;
    int target_room = -1;
    std::string reason;

    friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

struct ScoredTime {
    bool success = false;
    double time_s = 0.0;
};

struct MetricsSummary {
    int n_trials = 0;
    int successes = 0;
    double success_rate_within_deadline = 0.0;
    std::optional<double> mean_time_s;    // over successes
    std::optional<double> median_time_s;  // lower empirical quantiles over successes
    std::optional<double> p90_time_s;
    double deadline_s = 0.0;

    friend bool operator==(const MetricsSummary&, const MetricsSummary&) = default;
};

/// success_rate counts success and time <= deadline over all outcomes; the
/// time statistics use successes only. Throws std::invalid_argument when empty.
MetricsSummary summarize(const std::vector<ScoredTime>& outcomes, double deadline_s);

/// Smallest sample t with empirical CDF(t) >= q. Throws on an empty sample.
double lower_quantile(std::vector<double> samples, double q);

struct BatchResult {
    std::vector<TrialRecord> trials;  // in trial order
    MetricsSummary summary;
    std::map<std::string, double> milestone_means;  // building, room, total over successes
    std::map<std::string, int> reasons;
    std::string fingerprint;
};

/// Places the caller for one trial.
Scenario place_target(const Scenario& scenario, Placement placement, std::uint64_t seed);

TrialRecord run_trial(const BatchSpec& spec, int index);
BatchResult run_batch(const BatchSpec& spec);

/// Hex digest of everything that determines a batch's records.
std::string batch_fingerprint(const BatchSpec& spec);

void write_trials_csv(std::ostream& out, const std::vector<TrialRecord>& trials);
nlohmann::json summary_json(const BatchSpec& spec, const BatchResult& result);

}  // namespace helps

#endif  // HELPS_HARNESS_HPP
