#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "namo/baselines.hpp"
#include "namo/mppi.hpp"
#include "namo/physics.hpp"
#include "namo/scenario.hpp"
#include "namo/svg_planner.hpp"

namespace namo {

struct TrialLimits {
  double goal_tolerance = 0.2;   // m, robot centre to goal
  double max_sim_time = 300.0;   // s of simulated time
  double max_wall_time = 0.0;    // s per trial, 0 = unlimited
  bool replan = true;
  bool record_timing = true;     // false zeroes planner times in outputs
  double model_mass_noise = 0.0; // relative std of controller-model mass error
};

struct Config {
  baselines::PlannerKind planner = baselines::PlannerKind::SVG;
  svg::PlannerParams planner_params;
  double binary_model_mass = 15.0;  // controller mass for movables under binary belief
  baselines::RrtParams rrt;
  mppi::MppiConfig mppi;
  mppi::MonitorThresholds monitor;
  physics::PhysicsParams physics;
  physics::RobotModel robot;
  bench::GenerationParams scenario;
  TrialLimits trial;
  unsigned jobs = 1;  // concurrent trials in a suite
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

nlohmann::ordered_json config_to_json(const Config& c);
// Starts from defaults and applies every key present in `j`. Unknown keys and
// type mismatches throw ConfigError naming the dotted key.
Config config_from_json(const nlohmann::json& j);

// "a.b.c=value"; value is parsed as JSON when possible, otherwise kept as a
// string.
void apply_override(nlohmann::json& j, const std::string& assignment);

// Defaults <- file (if any) <- overrides.
Config load_config(const std::optional<std::filesystem::path>& file, const std::vector<std::string>& overrides = {});

std::string dump_config(const Config& c);

// Environment variable naming the default config file.
inline constexpr const char* kConfigEnv = "NAMO_CONFIG";

}  // namespace namo
