#include "namo/config.hpp"

#include <fstream>

namespace namo {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

ordered_json vel(const physics::Velocity& v) { return ordered_json::array({v.vx, v.vy, v.omega}); }
ordered_json range(const bench::Range& r) { return ordered_json::array({r.lo, r.hi}); }

}  // namespace

ordered_json config_to_json(const Config& c) {
  ordered_json j;
  j["planner"] = {
      {"kind", std::string(baselines::to_string(c.planner))},
      {"margin", c.planner_params.margin},
      {"max_mass", c.planner_params.max_mass},
      {"waypoint_spacing", c.planner_params.waypoint_spacing},
      {"wall_mass", c.planner_params.wall_mass},
      {"binary_model_mass", c.binary_model_mass},
  };
  j["rrt"] = {{"step", c.rrt.step},
              {"goal_bias", c.rrt.goal_bias},
              {"max_iterations", c.rrt.max_iterations},
              {"shortcut", c.rrt.shortcut}};
  const auto& m = c.mppi;
  j["mppi"] = {{"K", m.K},
               {"T", m.T},
               {"dt", m.dt},
               {"sigma", vel(m.sigma)},
               {"beta", m.beta},
               {"alpha", m.alpha},
               {"eps_force", m.eps_force},
               {"threads", m.threads},
               {"weights",
                {{"ctrl", ordered_json::array({m.weights.ctrl[0], m.weights.ctrl[1], m.weights.ctrl[2]})},
                 {"dist", m.weights.dist},
                 {"prog", m.weights.prog},
                 {"rot", m.weights.rot},
                 {"force", m.weights.force}}}};
  j["monitor"] = {{"eps", c.monitor.eps},       {"lambda", c.monitor.lambda}, {"mu", c.monitor.mu},
                  {"tau", c.monitor.tau},       {"window", c.monitor.window}, {"still", c.monitor.still}};
  const auto& p = c.physics;
  j["physics"] = {{"mu_g", p.mu_g},
                  {"gravity", p.gravity},
                  {"f_max", p.f_max},
                  {"stiffness", p.stiffness},
                  {"max_substep", p.max_substep},
                  {"max_chain", p.max_chain},
                  {"rotation", p.obstacle_rotation},
                  {"max_rotation_per_substep", p.max_rotation_per_substep}};
  j["robot"] = {{"length", c.robot.length}, {"width", c.robot.width}, {"u_max", vel(c.robot.u_max)}};
  const auto& g = c.scenario;
  j["scenario"] = {{"room_x", g.room_x},
                   {"room_y", g.room_y},
                   {"movable_coverage", g.movable_coverage},
                   {"static_coverage", g.static_coverage},
                   {"coverage_tolerance", g.coverage_tolerance},
                   {"movable_mass", range(g.movable_mass)},
                   {"static_mass", range(g.static_mass)},
                   {"circumradius", range(g.circumradius)},
                   {"rect_aspect_deg", range(g.rect_aspect_deg)},
                   {"min_sides", g.min_sides},
                   {"max_sides", g.max_sides},
                   {"rect_probability", g.rect_probability},
                   {"min_gap", g.min_gap},
                   {"endpoint_clearance", g.endpoint_clearance},
                   {"endpoint_x", g.endpoint_x},
                   {"endpoint_y", range(g.endpoint_y)},
                   {"mass_belief_error", g.mass_belief_error},
                   {"heavy_mass", range(g.heavy_mass)},
                   {"max_attempts", g.max_attempts}};
  j["trial"] = {{"goal_tolerance", c.trial.goal_tolerance},
                {"max_sim_time", c.trial.max_sim_time},
                {"max_wall_time", c.trial.max_wall_time},
                {"replan", c.trial.replan},
                {"record_timing", c.trial.record_timing},
                {"model_mass_noise", c.trial.model_mass_noise}};
  j["jobs"] = c.jobs;
  return j;
}

namespace {

// Every key in `given` must exist in `schema` with the same kind of value.
void check_keys(const json& given, const json& schema, const std::string& prefix) {
  if (!given.is_object()) throw ConfigError("config: '" + (prefix.empty() ? "$" : prefix) + "' must be an object");
  for (auto it = given.begin(); it != given.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!schema.contains(it.key())) throw ConfigError("config: unknown key '" + key + "'");
    const auto& s = schema.at(it.key());
    if (s.is_object()) {
      check_keys(it.value(), s, key);
    } else if (s.is_array()) {
      if (!it.value().is_array() || it.value().size() != s.size())
        throw ConfigError("config: '" + key + "' must be an array of " + std::to_string(s.size()) + " numbers");
    } else if (s.is_boolean() != it.value().is_boolean() || s.is_string() != it.value().is_string() ||
               s.is_number() != it.value().is_number()) {
      throw ConfigError("config: '" + key + "' has the wrong type");
    }
  }
}

template <class T>
void take(const json& j, const char* section, const char* key, T& out) {
  if (!j.contains(section) || !j.at(section).contains(key)) return;
  try {
    out = j.at(section).at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: '") + section + "." + key + "': " + e.what());
  }
}

void take_vel(const json& j, const char* section, const char* key, physics::Velocity& v) {
  std::array<double, 3> a{v.vx, v.vy, v.omega};
  take(j, section, key, a);
  v = {a[0], a[1], a[2]};
}

void take_range(const json& j, const char* section, const char* key, bench::Range& r) {
  std::array<double, 2> a{r.lo, r.hi};
  take(j, section, key, a);
  r = {a[0], a[1]};
}

}  // namespace

Config config_from_json(const json& j) {
  Config c;
  check_keys(j, json(config_to_json(c)), "");

  std::string kind(baselines::to_string(c.planner));
  take(j, "planner", "kind", kind);
  if (auto k = baselines::parse_planner(kind)) {
    c.planner = *k;
  } else {
    throw ConfigError("config: 'planner.kind' must be one of nvg, bvg, brrt, svg");
  }
  take(j, "planner", "margin", c.planner_params.margin);
  take(j, "planner", "max_mass", c.planner_params.max_mass);
  take(j, "planner", "waypoint_spacing", c.planner_params.waypoint_spacing);
  take(j, "planner", "wall_mass", c.planner_params.wall_mass);
  take(j, "planner", "binary_model_mass", c.binary_model_mass);

  take(j, "rrt", "step", c.rrt.step);
  take(j, "rrt", "goal_bias", c.rrt.goal_bias);
  take(j, "rrt", "max_iterations", c.rrt.max_iterations);
  take(j, "rrt", "shortcut", c.rrt.shortcut);

  auto& m = c.mppi;
  take(j, "mppi", "K", m.K);
  take(j, "mppi", "T", m.T);
  take(j, "mppi", "dt", m.dt);
  take_vel(j, "mppi", "sigma", m.sigma);
  take(j, "mppi", "beta", m.beta);
  take(j, "mppi", "alpha", m.alpha);
  take(j, "mppi", "eps_force", m.eps_force);
  take(j, "mppi", "threads", m.threads);
  if (j.contains("mppi") && j["mppi"].contains("weights")) {
    const json w = j["mppi"]["weights"];
    const json wrapped{{"w", w}};
    take(wrapped, "w", "ctrl", m.weights.ctrl);
    take(wrapped, "w", "dist", m.weights.dist);
    take(wrapped, "w", "prog", m.weights.prog);
    take(wrapped, "w", "rot", m.weights.rot);
    take(wrapped, "w", "force", m.weights.force);
  }

  take(j, "monitor", "eps", c.monitor.eps);
  take(j, "monitor", "lambda", c.monitor.lambda);
  take(j, "monitor", "mu", c.monitor.mu);
  take(j, "monitor", "tau", c.monitor.tau);
  take(j, "monitor", "window", c.monitor.window);
  take(j, "monitor", "still", c.monitor.still);

  auto& p = c.physics;
  take(j, "physics", "mu_g", p.mu_g);
  take(j, "physics", "gravity", p.gravity);
  take(j, "physics", "f_max", p.f_max);
  take(j, "physics", "stiffness", p.stiffness);
  take(j, "physics", "max_substep", p.max_substep);
  take(j, "physics", "max_chain", p.max_chain);
  take(j, "physics", "rotation", p.obstacle_rotation);
  take(j, "physics", "max_rotation_per_substep", p.max_rotation_per_substep);

  take(j, "robot", "length", c.robot.length);
  take(j, "robot", "width", c.robot.width);
  take_vel(j, "robot", "u_max", c.robot.u_max);

  auto& g = c.scenario;
  take(j, "scenario", "room_x", g.room_x);
  take(j, "scenario", "room_y", g.room_y);
  take(j, "scenario", "movable_coverage", g.movable_coverage);
  take(j, "scenario", "static_coverage", g.static_coverage);
  take(j, "scenario", "coverage_tolerance", g.coverage_tolerance);
  take_range(j, "scenario", "movable_mass", g.movable_mass);
  take_range(j, "scenario", "static_mass", g.static_mass);
  take_range(j, "scenario", "circumradius", g.circumradius);
  take_range(j, "scenario", "rect_aspect_deg", g.rect_aspect_deg);
  take(j, "scenario", "min_sides", g.min_sides);
  take(j, "scenario", "max_sides", g.max_sides);
  take(j, "scenario", "rect_probability", g.rect_probability);
  take(j, "scenario", "min_gap", g.min_gap);
  take(j, "scenario", "endpoint_clearance", g.endpoint_clearance);
  take(j, "scenario", "endpoint_x", g.endpoint_x);
  take_range(j, "scenario", "endpoint_y", g.endpoint_y);
  take(j, "scenario", "mass_belief_error", g.mass_belief_error);
  take_range(j, "scenario", "heavy_mass", g.heavy_mass);
  take(j, "scenario", "max_attempts", g.max_attempts);

  take(j, "trial", "goal_tolerance", c.trial.goal_tolerance);
  take(j, "trial", "max_sim_time", c.trial.max_sim_time);
  take(j, "trial", "max_wall_time", c.trial.max_wall_time);
  take(j, "trial", "replan", c.trial.replan);
  take(j, "trial", "record_timing", c.trial.record_timing);
  take(j, "trial", "model_mass_noise", c.trial.model_mass_noise);
  if (j.contains("jobs")) {
    try {
      c.jobs = j.at("jobs").get<unsigned>();
    } catch (const json::exception& e) {
      throw ConfigError(std::string("config: 'jobs': ") + e.what());
    }
  }

  try {
    mppi::validate(c.mppi);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (!(c.planner_params.margin > 0.0)) throw ConfigError("config: 'planner.margin' must be > 0");
  if (!(c.planner_params.waypoint_spacing > 0.0)) throw ConfigError("config: 'planner.waypoint_spacing' must be > 0");
  if (!(c.robot.u_max.vx > 0 && c.robot.u_max.vy > 0 && c.robot.u_max.omega > 0))
    throw ConfigError("config: 'robot.u_max' must be positive");
  if (!(c.physics.f_max > 0.0)) throw ConfigError("config: 'physics.f_max' must be > 0");
  if (!(c.physics.max_substep > 0.0)) throw ConfigError("config: 'physics.max_substep' must be > 0");
  return c;
}

void apply_override(json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  json* node = &j;
  std::size_t pos = 0;
  while (true) {
    const auto dot = key.find('.', pos);
    const std::string part = key.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
    if (part.empty()) throw ConfigError("override key '" + key + "' has an empty component");
    if (!node->is_object()) *node = json::object();
    if (dot == std::string::npos) {
      (*node)[part] = value;
      break;
    }
    node = &(*node)[part];
    pos = dot + 1;
  }
}

Config load_config(const std::optional<std::filesystem::path>& file, const std::vector<std::string>& overrides) {
  json j = json::object();
  if (file) {
    std::ifstream in(*file);
    if (!in) throw ConfigError("cannot read config " + file->string());
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError("config " + file->string() + " is not valid JSON: " + e.what());
    }
  }
  for (const auto& o : overrides) apply_override(j, o);
  return config_from_json(j);
}

std::string dump_config(const Config& c) { return config_to_json(c).dump(2) + "\n"; }

}  // namespace namo
