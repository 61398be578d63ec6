#include "cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "namo/benchmark.hpp"
#include "namo/config.hpp"
#include "render.hpp"

namespace namo::tools {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct Common {
  std::string config_file;
  std::vector<std::string> sets;
  std::string out_dir = "out";
  bool no_replan = false;
  bool no_timing = false;
  bool render = false;
  double mass_belief_error = -1.0;
  unsigned jobs = 0;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_file, "JSON config file (default: $NAMO_CONFIG)");
  cmd->add_option("--set", c.sets, "Override a config key, e.g. --set mppi.K=128")->take_all();
  cmd->add_option("--out", c.out_dir, "Output directory");
}

Config effective_config(const Common& c) {
  std::optional<fs::path> file;
  if (!c.config_file.empty()) {
    file = c.config_file;
  } else if (const char* env = std::getenv(kConfigEnv); env && *env) {
    file = fs::path(env);
  }
  auto sets = c.sets;
  if (c.no_replan) sets.push_back("trial.replan=false");
  if (c.no_timing) sets.push_back("trial.record_timing=false");
  if (c.mass_belief_error >= 0.0) sets.push_back("scenario.mass_belief_error=" + std::to_string(c.mass_belief_error));
  if (c.jobs > 0) sets.push_back("jobs=" + std::to_string(c.jobs));
  return load_config(file, sets);
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

fs::path prepare_out(const Common& c, const Config& cfg) {
  const fs::path out = c.out_dir;
  fs::create_directories(out);
  write_file(out / "config.json", dump_config(cfg));
  return out;
}

baselines::PlannerKind planner_or(const std::string& name, baselines::PlannerKind fallback) {
  if (name.empty()) return fallback;
  auto k = baselines::parse_planner(name);
  if (!k) throw CLI::ValidationError("--planner", "expected one of nvg, bvg, brrt, svg");
  return *k;
}

std::vector<std::uint64_t> parse_seeds(const std::string& spec) {
  // "a..b" inclusive, or a comma list.
  std::vector<std::uint64_t> out;
  if (const auto dots = spec.find(".."); dots != std::string::npos) {
    const auto a = std::stoull(spec.substr(0, dots)), b = std::stoull(spec.substr(dots + 2));
    if (b < a) throw CLI::ValidationError("--seeds", "range end precedes start");
    for (auto s = a; s <= b; ++s) out.push_back(s);
    return out;
  }
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stoull(item));
  }
  if (out.empty()) throw CLI::ValidationError("--seeds", "no seeds given");
  return out;
}

int cmd_plan(const Common& c, const std::string& scenario_file, const std::string& planner_name, std::uint64_t seed) {
  const Config cfg = effective_config(c);
  const auto kind = planner_or(planner_name, cfg.planner);
  const auto sc = bench::load_scenario(scenario_file);
  const fs::path out = prepare_out(c, cfg);
  svg::PlannerParams pp = cfg.planner_params;
  pp.bounds = sc.room;
  const auto res = baselines::plan(kind, sc.obstacles, sc.room, sc.start, sc.goal, pp, cfg.rrt, seed);

  ordered_json dump;
  dump["planner"] = std::string(baselines::to_string(kind));
  dump["path_found"] = res.found;
  dump["planner_time_s"] = cfg.trial.record_timing ? res.seconds : 0.0;
  dump["cost"] = res.cost;
  dump["scenario"] = bench::to_json(sc);
  dump["graph"] = res.graph ? bench::graph_to_json(*res.graph) : ordered_json(nullptr);
  auto& path = dump["path"] = ordered_json::array();
  for (const auto& p : res.path) path.push_back(bench::point_json(p));
  dump["waypoints"] = bench::waypoints_to_json(res.waypoints);
  write_file(out / "graph.json", dump.dump(2) + "\n");
  write_file(out / "waypoints.json", bench::waypoints_to_json(res.waypoints).dump(2) + "\n");
  if (c.render) write_file(out / "plan.svg", render_plan(nlohmann::json::parse(dump.dump())));

  std::cout << baselines::to_string(kind) << ": " << (res.found ? "path found" : "no path") << ", "
            << (res.graph ? res.graph->size() : res.path.size()) << " nodes";
  if (res.graph) std::cout << " (" << res.graph->passage_count() << " passage)";
  std::cout << ", cost " << res.cost << "\n";
  return res.found ? kExitOk : kExitDomain;
}

ordered_json trial_json(const bench::TrialResult& t) {
  return {{"seed", t.seed},
          {"planner", std::string(baselines::to_string(t.planner))},
          {"path_found", t.path_found},
          {"planner_time_s", t.planner_time},
          {"executed", t.executed},
          {"execution_time_s", t.execution_time},
          {"cumulative_force_Ns", t.cumulative_force},
          {"force_kN_steps", t.force_steps / 1000.0},
          {"replans", t.replans},
          {"cycles", t.cycles},
          {"outcome", t.outcome},
          {"trace", t.trace_path}};
}

int cmd_simulate(const Common& c, const std::string& scenario_file, const std::string& planner_name) {
  const Config cfg = effective_config(c);
  const auto kind = planner_or(planner_name, cfg.planner);
  const auto sc = bench::load_scenario(scenario_file);
  const fs::path out = prepare_out(c, cfg);
  bench::TrialOptions opt;
  opt.trace_file = out / "trace.jsonl";
  const auto res = bench::run_trial(sc, kind, cfg, opt);
  write_file(out / "result.json", trial_json(res).dump(2) + "\n");
  if (c.render) write_file(out / "trace.svg", render_trace(out / "trace.jsonl"));
  std::cout << baselines::to_string(kind) << ": " << res.outcome << " after " << res.execution_time
            << " s, force " << res.cumulative_force << " N*s, replans " << res.replans << "\n";
  return res.executed ? kExitOk : kExitDomain;
}

int cmd_bench(const Common& c, const std::string& seeds_spec, const std::vector<std::string>& planner_names) {
  const Config cfg = effective_config(c);
  const auto seeds = parse_seeds(seeds_spec);
  std::vector<baselines::PlannerKind> planners;
  for (const auto& n : planner_names) planners.push_back(planner_or(n, cfg.planner));
  if (planners.empty()) planners.assign(baselines::kAllPlanners.begin(), baselines::kAllPlanners.end());
  const fs::path out = prepare_out(c, cfg);
  const auto rep = bench::run_suite(seeds, planners, cfg, out);
  if (c.render) {
    for (const auto& t : rep.trials) {
      if (t.trace_path.empty()) continue;
      const auto trace = out / "traces" / t.trace_path;
      auto svg_path = trace;
      svg_path.replace_extension(".svg");
      write_file(svg_path, render_trace(trace));
    }
  }
  std::cout << bench::report_csv(rep);
  return kExitOk;
}

int cmd_generate(const Common& c, std::uint64_t seed, const std::string& file) {
  const Config cfg = effective_config(c);
  const auto sc = bench::generate_scenario(seed, cfg.scenario);
  const fs::path target = file.empty() ? fs::path(c.out_dir) / ("scenario_" + std::to_string(seed) + ".json") : fs::path(file);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  bench::save_scenario(sc, target);
  std::cout << target.string() << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Navigation among movable obstacles: planners, controller and benchmark"};
  app.require_subcommand(1);
  Common common;
  std::string scenario, planner;
  std::uint64_t seed = 0;
  std::string seeds = "0..0";
  std::vector<std::string> planners;
  std::string input, output;

  auto* plan = app.add_subcommand("plan", "Build a graph (or tree) and search it");
  add_common(plan, common);
  plan->add_option("--scenario", scenario, "Scenario JSON")->required();
  plan->add_option("--planner", planner, "nvg | bvg | brrt | svg");
  plan->add_option("--seed", seed, "Seed for the sampling planner");
  plan->add_flag("--render", common.render, "Also write plan.svg");
  plan->add_flag("--no-timing", common.no_timing, "Report planner time as 0 (byte-stable outputs)");

  auto* sim = app.add_subcommand("simulate", "Run one closed-loop trial");
  add_common(sim, common);
  sim->add_option("--scenario", scenario, "Scenario JSON")->required();
  sim->add_option("--planner", planner, "nvg | bvg | brrt | svg");
  sim->add_flag("--no-replan", common.no_replan, "Disable replanning");
  sim->add_flag("--render", common.render, "Also write trace.svg");
  sim->add_flag("--no-timing", common.no_timing, "Report planner time as 0");

  auto* bench = app.add_subcommand("bench", "Run seeds x planners and aggregate");
  add_common(bench, common);
  bench->add_option("--seeds", seeds, "Seed range a..b or list a,b,c");
  bench->add_option("--seed", seed, "Single seed (overrides --seeds)");
  bench->add_option("--planner,--planners", planners, "Planners to compare (default: all)")->delimiter(',');
  bench->add_flag("--no-replan", common.no_replan, "Disable replanning for every planner");
  bench->add_option("--mass-belief-error", common.mass_belief_error, "Fraction of movables with heavy true mass");
  bench->add_option("--jobs", common.jobs, "Concurrent trials");
  bench->add_flag("--render", common.render, "Also render every trace");
  bench->add_flag("--no-timing", common.no_timing, "Report planner times as 0 (byte-stable outputs)");

  auto* render = app.add_subcommand("render", "Draw a graph dump or trace as SVG");
  render->add_option("--input", input, "graph.json or trace .jsonl")->required();
  render->add_option("--out", output, "Output .svg")->required();

  auto* gen = app.add_subcommand("generate", "Write a seeded random scenario");
  add_common(gen, common);
  gen->add_option("--seed", seed, "Scenario seed");
  gen->add_option("--file", output, "Target file (default <out>/scenario_<seed>.json)");
  gen->add_option("--mass-belief-error", common.mass_belief_error, "Fraction of movables with heavy true mass");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitError;
  }

  try {
    if (*plan) return cmd_plan(common, scenario, planner, seed);
    if (*sim) return cmd_simulate(common, scenario, planner);
    if (*bench) return cmd_bench(common, bench->count("--seed") ? std::to_string(seed) : seeds, planners);
    if (*render) {
      const auto svg = render_file(input);
      std::ofstream out(output, std::ios::binary);
      if (!out) throw std::runtime_error("cannot write " + output);
      out << svg;
      return kExitOk;
    }
    if (*gen) return cmd_generate(common, seed, output);
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

}  // namespace namo::tools
