#include "namo/benchmark.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "namo/mppi.hpp"
#include "namo/physics.hpp"

namespace namo::bench {

using nlohmann::ordered_json;

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t planner_salt(PlannerKind k) { return static_cast<std::uint64_t>(k) + 1; }

ordered_json vel_json(const physics::Velocity& v) { return ordered_json::array({v.vx, v.vy, v.omega}); }

ordered_json points_json(std::span<const Point2> pts) {
  ordered_json a = ordered_json::array();
  for (const auto& p : pts) a.push_back(point_json(p));
  return a;
}

// Believed obstacles at their current poses.
std::vector<Obstacle> snapshot(const std::vector<Obstacle>& believed, const physics::WorldState& s) {
  std::vector<Obstacle> out = believed;
  for (std::size_t k = 0; k < out.size(); ++k) out[k].pose = s.obstacle_poses[k];
  return out;
}

std::vector<double> perturbed(std::vector<double> masses, double rel_std, std::uint64_t seed) {
  if (rel_std <= 0.0) return masses;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, rel_std);
  for (auto& m : masses) {
    if (std::isfinite(m)) m = std::max(0.1, m * (1.0 + n(rng)));
  }
  return masses;
}

class TraceWriter {
 public:
  explicit TraceWriter(const std::optional<std::filesystem::path>& path) {
    if (path) {
      out_.open(*path, std::ios::binary);
      if (!out_) throw std::runtime_error("cannot write trace " + path->string());
    }
  }
  void write(const ordered_json& j) {
    if (out_.is_open()) out_ << j.dump() << '\n';
  }

 private:
  std::ofstream out_;
};

}  // namespace

TrialResult run_trial(const Scenario& sc, PlannerKind kind, const Config& cfg, const TrialOptions& options) {
  TrialResult res;
  res.seed = sc.seed;
  res.planner = kind;
  if (options.trace_file) res.trace_path = options.trace_file->filename().string();
  TraceWriter trace(options.trace_file);
  const auto wall_start = std::chrono::steady_clock::now();

  svg::PlannerParams pp = cfg.planner_params;
  pp.bounds = sc.room;
  std::vector<Obstacle> believed = sc.obstacles;
  const std::uint64_t base = splitmix64(sc.seed * 8 + planner_salt(kind));

  ordered_json header{{"type", "header"},
                      {"planner", std::string(baselines::to_string(kind))},
                      {"dt", cfg.mppi.dt},
                      {"scenario", to_json(sc)}};

  baselines::PlanOutcome outcome;
  try {
    outcome = baselines::plan(kind, believed, sc.room, sc.start, sc.goal, pp, cfg.rrt, base);
  } catch (const svg::StartOrGoalBlocked&) {
    res.outcome = "start_blocked";
    header["path_found"] = false;
    trace.write(header);
    return res;
  }
  res.path_found = outcome.found;
  res.planner_time = cfg.trial.record_timing ? outcome.seconds : 0.0;
  header["path_found"] = outcome.found;
  header["planner_time"] = res.planner_time;
  header["path"] = points_json(outcome.path);
  header["waypoints"] = points_json(outcome.waypoints.points);
  trace.write(header);
  if (!outcome.found) {
    res.outcome = "no_path";
    return res;
  }

  std::vector<double> true_mass;
  for (const auto& o : sc.obstacles) true_mass.push_back(o.mass_true);
  const physics::PhysicsModel world_model(cfg.robot, cfg.physics, sc.obstacles, true_mass, sc.room);
  auto make_ctrl_model = [&] {
    auto m = baselines::controller_masses(kind, believed, pp.max_mass, cfg.binary_model_mass);
    m = perturbed(std::move(m), cfg.trial.model_mass_noise, base ^ 0x5eedULL);
    return physics::PhysicsModel(cfg.robot, cfg.physics, sc.obstacles, m, sc.room);
  };
  auto ctrl_model = make_ctrl_model();

  std::vector<Point2> waypoints = outcome.waypoints.points;
  const Point2 first = waypoints.size() > 1 ? waypoints[1] : sc.goal;
  physics::WorldState state = physics::initial_state(
      sc.obstacles, {sc.start.x, sc.start.y, std::atan2(first.y - sc.start.y, first.x - sc.start.x)});
  mppi::ControlSequence nominal(static_cast<std::size_t>(cfg.mppi.T));
  mppi::MonitorState mon;
  mon.thresholds = cfg.monitor;
  const double dt = cfg.mppi.dt;

  res.outcome = "timeout";
  for (std::uint64_t cycle = 0;; ++cycle) {
    if (geom::distance(state.robot_pose.position(), sc.goal) <= cfg.trial.goal_tolerance) {
      res.executed = true;
      res.execution_time = state.time;
      res.outcome = "reached";
      break;
    }
    if (state.time >= cfg.trial.max_sim_time - 1e-9) break;
    if (cfg.trial.max_wall_time > 0.0 &&
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count() > cfg.trial.max_wall_time) {
      res.outcome = "wall_timeout";
      break;
    }

    physics::Velocity u;
    try {
      auto r = mppi::mppi_step(state, nominal, waypoints, cfg.mppi, ctrl_model, splitmix64(base ^ (cycle + 1)));
      u = r.control;
      nominal = std::move(r.next_nominal);
    } catch (const mppi::AllRolloutsInfeasible&) {
      u = {};
      std::fill(nominal.begin(), nominal.end(), physics::Velocity{});
    }

    auto stepped = physics::step(state, u, dt, world_model);
    res.cumulative_force += stepped.report.total_force * dt;
    res.force_steps += stepped.report.total_force;
    ++res.cycles;

    std::optional<geom::ObstacleId> culprit;
    double strongest = 0.0;
    for (const auto& c : stepped.report.contacts) {
      if (!geom::is_wall(c.obstacle) && c.force > strongest) {
        strongest = c.force;
        culprit = c.obstacle;
      }
    }
    const auto signal = mppi::monitor_update(mon, u, stepped.state.robot_vel, stepped.state.robot_pose.position(),
                                             stepped.state.time, culprit);

    ordered_json rec{{"type", "cycle"},
                     {"t", stepped.state.time},
                     {"pose", pose_json(stepped.state.robot_pose)},
                     {"vel", vel_json(stepped.state.robot_vel)},
                     {"cmd", vel_json(u)},
                     {"force", stepped.report.total_force}};
    ordered_json moved = ordered_json::object();
    for (std::size_t k = 0; k < sc.obstacles.size(); ++k) {
      if (!(stepped.state.obstacle_poses[k] == state.obstacle_poses[k]))
        moved[std::to_string(sc.obstacles[k].id.value)] = pose_json(stepped.state.obstacle_poses[k]);
    }
    rec["moved"] = std::move(moved);
    rec["monitor"] = {{"stalled", mon.last.stalled},
                      {"deviating", mon.last.deviating},
                      {"slipping", mon.last.slipping},
                      {"timer", mon.timer_started ? ordered_json(stepped.state.time - *mon.timer_started)
                                                  : ordered_json(nullptr)}};
    trace.write(rec);
    state = std::move(stepped.state);

    if (signal && signal->obstacle && cfg.trial.replan) {
      mppi::update_movability(believed, *signal->obstacle, pp.max_mass);
      ++res.replans;
      const auto now = snapshot(believed, state);
      baselines::PlanOutcome again;
      again = baselines::plan(kind, now, sc.room, state.robot_pose.position(), sc.goal, pp, cfg.rrt,
                              splitmix64(base + static_cast<std::uint64_t>(res.replans)), false);
      trace.write({{"type", "replan"},
                   {"t", state.time},
                   {"obstacle", signal->obstacle->value},
                   {"path_found", again.found},
                   {"waypoints", points_json(again.waypoints.points)}});
      if (!again.found) {
        res.outcome = "replan_failed";
        break;
      }
      waypoints = again.waypoints.points;
      ctrl_model = make_ctrl_model();
      std::fill(nominal.begin(), nominal.end(), physics::Velocity{});
    }
  }
  if (!res.executed) res.execution_time = state.time;

  trace.write({{"type", "result"},
               {"outcome", res.outcome},
               {"executed", res.executed},
               {"execution_time", res.execution_time},
               {"cumulative_force", res.cumulative_force},
               {"replans", res.replans}});
  return res;
}

Stat mean_se(std::span<const double> xs) {
  Stat s;
  s.n = static_cast<int>(xs.size());
  if (xs.empty()) return s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / s.n;
  if (s.n < 2) return s;
  double ss = 0.0;
  for (double x : xs) ss += (x - s.mean) * (x - s.mean);
  s.se = std::sqrt(ss / (s.n - 1)) / std::sqrt(static_cast<double>(s.n));
  return s;
}

AggregateReport aggregate(std::span<const TrialResult> trials, std::span<const PlannerKind> planners) {
  AggregateReport rep;
  rep.trials.assign(trials.begin(), trials.end());
  for (auto kind : planners) {
    PlannerRow row;
    row.planner = kind;
    std::vector<double> pt, et, fn, fk;
    int found = 0, executed = 0;
    for (const auto& t : trials) {
      if (t.planner != kind) continue;
      ++row.trials;
      row.replans += t.replans;
      if (t.path_found) {
        ++found;
        pt.push_back(t.planner_time);
      }
      if (t.executed) {
        ++executed;
        et.push_back(t.execution_time);
        fn.push_back(t.cumulative_force);
        fk.push_back(t.force_steps / 1000.0);
      }
    }
    if (row.trials > 0) {
      row.path_success_pct = 100.0 * found / row.trials;
      row.exec_success_pct = 100.0 * executed / row.trials;
    }
    row.planner_time = mean_se(pt);
    row.execution_time = mean_se(et);
    row.force_ns = mean_se(fn);
    row.force_ksteps = mean_se(fk);
    rep.rows.push_back(row);
  }
  return rep;
}

namespace {

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

}  // namespace

std::string report_csv(const AggregateReport& r) {
  std::ostringstream o;
  o << "planner,trials,path_success_pct,planner_time_mean_s,planner_time_se_s,exec_success_pct,"
       "exec_time_mean_s,exec_time_se_s,force_mean_Ns,force_se_Ns,force_mean_kN_steps,force_se_kN_steps,replans\n";
  for (const auto& row : r.rows) {
    o << baselines::to_string(row.planner) << ',' << row.trials << ',' << fmt(row.path_success_pct) << ','
      << fmt(row.planner_time.mean) << ',' << fmt(row.planner_time.se) << ',' << fmt(row.exec_success_pct) << ','
      << fmt(row.execution_time.mean) << ',' << fmt(row.execution_time.se) << ',' << fmt(row.force_ns.mean) << ','
      << fmt(row.force_ns.se) << ',' << fmt(row.force_ksteps.mean) << ',' << fmt(row.force_ksteps.se) << ','
      << row.replans << '\n';
  }
  return o.str();
}

std::string trials_csv(std::span<const TrialResult> trials) {
  std::ostringstream o;
  o << "seed,planner,path_found,planner_time_s,executed,execution_time_s,cumulative_force_Ns,force_kN_steps,"
       "replans,cycles,outcome,trace\n";
  for (const auto& t : trials) {
    o << t.seed << ',' << baselines::to_string(t.planner) << ',' << (t.path_found ? 1 : 0) << ','
      << fmt(t.planner_time) << ',' << (t.executed ? 1 : 0) << ',' << fmt(t.execution_time) << ','
      << fmt(t.cumulative_force) << ',' << fmt(t.force_steps / 1000.0) << ',' << t.replans << ',' << t.cycles << ','
      << t.outcome << ',' << t.trace_path << '\n';
  }
  return o.str();
}

AggregateReport run_suite(std::span<const std::uint64_t> seeds, std::span<const PlannerKind> planners,
                          const Config& config, const std::optional<std::filesystem::path>& out_dir) {
  if (seeds.empty()) throw std::invalid_argument("run_suite: no seeds");
  std::optional<std::filesystem::path> trace_dir;
  if (out_dir) {
    trace_dir = *out_dir / "traces";
    std::filesystem::create_directories(*trace_dir);
  }
  // Scenarios are shared by every planner of a seed.
  std::vector<std::optional<Scenario>> scenarios(seeds.size());
  std::vector<std::string> gen_errors(seeds.size());
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    try {
      scenarios[i] = generate_scenario(seeds[i], config.scenario);
      if (out_dir) save_scenario(*scenarios[i], *trace_dir / ("seed_" + std::to_string(seeds[i]) + "_scenario.json"));
    } catch (const GenerationFailed& e) {
      gen_errors[i] = e.what();
    }
  }

  const std::size_t n = seeds.size() * planners.size();
  std::vector<TrialResult> trials(n);
  Config trial_cfg = config;
  if (config.jobs > 1) trial_cfg.mppi.threads = 1;
  physics::parallel_for(n, std::max(1u, config.jobs), [&](std::size_t idx) {
    const std::size_t si = idx / planners.size(), pi = idx % planners.size();
    TrialResult& t = trials[idx];
    t.seed = seeds[si];
    t.planner = planners[pi];
    if (!scenarios[si]) {
      t.outcome = "generation_failed";
      return;
    }
    TrialOptions opt;
    if (trace_dir) {
      opt.trace_file = *trace_dir / ("seed_" + std::to_string(seeds[si]) + "_" +
                                     std::string(baselines::to_string(planners[pi])) + ".jsonl");
    }
    try {
      t = run_trial(*scenarios[si], planners[pi], trial_cfg, opt);
    } catch (const std::exception&) {
      // Never abort the suite over one trial.
      t.seed = seeds[si];
      t.planner = planners[pi];
      t.outcome = std::string("error");
    }
  });

  auto rep = aggregate(trials, planners);
  if (out_dir) {
    std::ofstream(*out_dir / "report.csv", std::ios::binary) << report_csv(rep);
    std::ofstream(*out_dir / "trials.csv", std::ios::binary) << trials_csv(rep.trials);
  }
  return rep;
}

ordered_json graph_to_json(const svg::SemanticGraph& g) {
  ordered_json j;
  j["start_id"] = g.start_id;
  j["goal_id"] = g.goal_id;
  auto& nodes = j["nodes"] = ordered_json::array();
  for (const auto& n : g.nodes()) {
    ordered_json e{{"id", n.id},
                   {"position", point_json(n.position)},
                   {"kind", n.kind == svg::NodeKind::Free ? "free" : "passage"},
                   {"cost", n.node_cost}};
    if (n.passage) {
      e["pair"] = ordered_json::array({n.passage->first.value, n.passage->second.value});
      e["boundary"] = n.passage->boundary == svg::BoundaryKind::Entry ? "entry" : "exit";
      e["gamma"] = n.passage->gamma;
    }
    nodes.push_back(std::move(e));
  }
  auto& edges = j["edges"] = ordered_json::array();
  for (const auto& e : g.edges()) edges.push_back(ordered_json::array({e.a, e.b, e.length}));
  return j;
}

ordered_json waypoints_to_json(const svg::Waypoints& w) {
  return {{"spacing", w.spacing}, {"points", points_json(w.points)}};
}

double trace_cumulative_force(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read trace " + path.string());
  std::string line;
  double dt = 0.0, sum = 0.0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    const auto type = j.at("type").get<std::string>();
    if (type == "header") dt = j.at("dt").get<double>();
    if (type == "cycle") sum += j.at("force").get<double>() * dt;
  }
  return sum;
}

}  // namespace namo::bench
