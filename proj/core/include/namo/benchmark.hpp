#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "namo/baselines.hpp"
#include "namo/config.hpp"
#include "namo/scenario.hpp"

namespace namo::bench {

using baselines::PlannerKind;

struct TrialResult {
  std::uint64_t seed = 0;
  PlannerKind planner = PlannerKind::SVG;
  bool path_found = false;
  double planner_time = 0.0;    // s, initial build + search only
  bool executed = false;        // goal reached within tolerance
  double execution_time = 0.0;  // s of simulated time
  double cumulative_force = 0.0;  // N*s, sum of per-step force times dt
  double force_steps = 0.0;       // N*steps, sum of per-step force
  int replans = 0;
  int cycles = 0;
  std::string outcome;  // reached | no_path | timeout | replan_failed | start_blocked | wall_timeout
  std::string trace_path;
};

struct TrialOptions {
  std::optional<std::filesystem::path> trace_file;
};

// Plans, then closes the loop: MPPI on the planner's belief model, the true
// world stepped with true masses, the monitor and (optionally) replanning.
TrialResult run_trial(const Scenario& scenario, PlannerKind planner, const Config& config,
                      const TrialOptions& options = {});

struct Stat {
  double mean = 0.0;
  double se = 0.0;  // sample standard deviation / sqrt(n), 0 for n < 2
  int n = 0;
};
Stat mean_se(std::span<const double> xs);

struct PlannerRow {
  PlannerKind planner = PlannerKind::SVG;
  int trials = 0;
  double path_success_pct = 0.0;
  Stat planner_time;     // over trials with a path
  double exec_success_pct = 0.0;
  Stat execution_time;   // over executed trials
  Stat force_ns;         // N*s over executed trials
  Stat force_ksteps;     // kN*steps over executed trials
  int replans = 0;
};

struct AggregateReport {
  std::vector<PlannerRow> rows;       // in requested planner order
  std::vector<TrialResult> trials;    // ordered by (seed, planner)
};

AggregateReport aggregate(std::span<const TrialResult> trials, std::span<const PlannerKind> planners);

// Writes report.csv, trials.csv and traces/ under out_dir when given.
AggregateReport run_suite(std::span<const std::uint64_t> seeds, std::span<const PlannerKind> planners,
                          const Config& config, const std::optional<std::filesystem::path>& out_dir = std::nullopt);

std::string report_csv(const AggregateReport& report);
std::string trials_csv(std::span<const TrialResult> trials);

nlohmann::ordered_json graph_to_json(const svg::SemanticGraph& graph);
nlohmann::ordered_json waypoints_to_json(const svg::Waypoints& wps);

// Sum of per-cycle force times the header's dt, read back from a trace file.
double trace_cumulative_force(const std::filesystem::path& trace);

}  // namespace namo::bench
