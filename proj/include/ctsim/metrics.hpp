#ifndef CTSIM_METRICS_HPP
#define CTSIM_METRICS_HPP

#include <array>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ctsim/simulation.hpp"

namespace ctsim {

struct Confusion {
    int64_t true_positive = 0;
    int64_t false_positive_attack = 0;
    int64_t false_positive_noise = 0;
    int64_t false_negative = 0;
};

struct LatencySummary {
    int64_t count = 0;
    double median_seconds = 0.0;
    double mean_seconds = 0.0;
    double min_seconds = 0.0;
    double max_seconds = 0.0;
};

// Ground-truth exposed set for this run, recomputed from the contact log
// and the report timeline under the active protocol's delivery windows:
// an (app-carrying) agent with at least the exposure-minutes threshold of
// contact inside the infection radius with a reporting agent, within the
// published window, with a delivery opportunity inside the run.
std::set<std::pair<int, int>> exposed_pairs(const RunResult& run); // (reporter, exposed)
std::set<int> exposed_agents(const RunResult& run);

// Agent-level confusion counts against the ground-truth exposed set.
Confusion score_notifications(const RunResult& run);
Confusion score_notifications(const RunResult& run, const std::set<int>& exposed);

LatencySummary latency_summary(const RunResult& run);

// Full per-run metrics document (report.json content).
std::string build_report_json(const RunResult& run);
std::string build_manifest_json(const RunResult& run);
std::string build_attack_report_json(const RunResult& run);

std::string timeseries_csv(const RunResult& run);
std::string notifications_csv(const RunResult& run);
std::string contacts_csv(const RunResult& run);
std::string reports_csv(const RunResult& run);
std::string receptions_csv(const RunResult& run);

// Writes every output file for one run into `dir` (created, must be empty
// or absent). Byte-stable for fixed inputs.
void write_run_outputs(const RunResult& run, const std::string& dir);

// Paired comparison of two runs sharing seed and scenario except the
// protocol family. Throws ConfigError on a scenario mismatch.
std::vector<std::array<std::string, 3>> compare_protocols(const RunResult& a, const RunResult& b);
std::string comparison_csv(const RunResult& a, const RunResult& b);

} // namespace ctsim

#endif
