// Acceptance runner: one PASS/FAIL line per criterion, exit 1 on any FAIL.
// Pass criterion numbers as arguments to run a subset.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "equations.hpp"
#include "namo/baselines.hpp"
#include "namo/benchmark.hpp"
#include "namo/config.hpp"
#include "namo/mppi.hpp"
#include "namo/physics.hpp"
#include "namo/scenario.hpp"
#include "namo/svg_planner.hpp"
#include "oracles.hpp"
#include "scenes.hpp"

using namespace namo;
using baselines::PlannerKind;
using geom::Point2;
namespace fs = std::filesystem;

namespace {

// Pinned thresholds.
constexpr int kPlanSeeds = 50;
constexpr double kSvgPathMin = 90.0;
constexpr double kBrrtPathMin = 70.0;
constexpr double kNvgPathMax = 40.0;
constexpr double kPlanRuntimeMax = 120.0;  // s
constexpr double kSvgTimeMax = 1.0;        // s, mean build + search
constexpr double kSvgOverBvgMax = 2.0;
constexpr int kSuiteSeeds = 25;
constexpr double kForceMargin = 0.20;      // SVG mean at most 80% of the others
constexpr double kNvgForceNearZero = 0.10; // NVG mean at most 10% of SVG mean
constexpr double kSuiteRuntimeMax = 3600.0;
constexpr double kNvgExecFactor = 3.0;
constexpr int kHullCases = 500;
constexpr int kVisibilityCases = 200;
constexpr double kForceMassTol = 0.05;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct Verdict {
  bool pass = false;
  std::string detail;
};

// Closed-loop settings for the force and execution suite.
Config suite_config() {
  Config c;
  c.mppi.K = 64;
  c.mppi.threads = 1;
  c.trial.replan = false;
  c.trial.max_sim_time = 60.0;
  c.trial.record_timing = false;
  return c;
}

svg::PlannerParams params_for(const geom::Aabb& room) {
  svg::PlannerParams p;
  p.bounds = room;
  return p;
}

// Planning results shared by criteria 1, 2 and 7.
struct PlanRun {
  std::vector<std::array<baselines::PlanOutcome, 4>> outcomes;  // per seed, kAllPlanners order
  double seconds = 0.0;
};

const PlanRun& plan_run() {
  static const PlanRun run = [] {
    PlanRun r;
    const auto t0 = Clock::now();
    for (int seed = 0; seed < kPlanSeeds; ++seed) {
      const auto sc = bench::generate_scenario(static_cast<std::uint64_t>(seed));
      std::array<baselines::PlanOutcome, 4> row;
      for (std::size_t k = 0; k < baselines::kAllPlanners.size(); ++k)
        row[k] = baselines::plan(baselines::kAllPlanners[k], sc.obstacles, sc.room, sc.start, sc.goal,
                                 params_for(sc.room), baselines::RrtParams{}, static_cast<std::uint64_t>(seed));
      r.outcomes.push_back(std::move(row));
    }
    r.seconds = seconds_since(t0);
    return r;
  }();
  return run;
}

std::size_t index_of(PlannerKind k) {
  return static_cast<std::size_t>(std::find(baselines::kAllPlanners.begin(), baselines::kAllPlanners.end(), k) -
                                  baselines::kAllPlanners.begin());
}

Verdict path_success() {
  const auto& run = plan_run();
  std::array<int, 4> found{};
  bool same = true;
  for (const auto& row : run.outcomes) {
    for (std::size_t k = 0; k < 4; ++k) found[k] += row[k].found;
    same = same && row[index_of(PlannerKind::SVG)].found == row[index_of(PlannerKind::BVG)].found;
  }
  auto pct = [&](PlannerKind k) { return 100.0 * found[index_of(k)] / kPlanSeeds; };
  const double nvg = pct(PlannerKind::NVG), bvg = pct(PlannerKind::BVG), brrt = pct(PlannerKind::BRRT),
               svg = pct(PlannerKind::SVG);
  const bool ok = svg >= kSvgPathMin && same && brrt >= kBrrtPathMin && nvg <= kNvgPathMax && nvg < brrt &&
                  brrt <= svg && run.seconds < kPlanRuntimeMax;
  return {ok, fmt("%d seeds: NVG %.0f%%, B-RRT %.0f%%, BVG %.0f%%, SVG %.0f%%, SVG==BVG per seed %s, %.1f s", kPlanSeeds,
                  nvg, brrt, bvg, svg, same ? "yes" : "no", run.seconds)};
}

Verdict planner_time() {
  const auto& run = plan_run();
  std::array<double, 4> total{};
  for (const auto& row : run.outcomes)
    for (std::size_t k = 0; k < 4; ++k) total[k] += row[k].seconds;
  auto mean = [&](PlannerKind k) { return total[index_of(k)] / kPlanSeeds; };
  const double svg = mean(PlannerKind::SVG), bvg = mean(PlannerKind::BVG), brrt = mean(PlannerKind::BRRT);
  const bool ok = svg < kSvgTimeMax && svg <= kSvgOverBvgMax * bvg && brrt > svg;
  return {ok, fmt("mean over %d scenarios: SVG %.4f s, BVG %.4f s, B-RRT %.4f s", kPlanSeeds, svg, bvg, brrt)};
}

// Criteria 3 and 4 share one suite.
const bench::AggregateReport& suite(double* seconds) {
  static double elapsed = 0.0;
  static const bench::AggregateReport report = [] {
    std::vector<std::uint64_t> seeds;
    for (int s = 0; s < kSuiteSeeds; ++s) seeds.push_back(static_cast<std::uint64_t>(s));
    const std::vector<PlannerKind> kinds(baselines::kAllPlanners.begin(), baselines::kAllPlanners.end());
    const auto t0 = Clock::now();
    auto r = bench::run_suite(seeds, kinds, suite_config());
    elapsed = seconds_since(t0);
    return r;
  }();
  if (seconds) *seconds = elapsed;
  return report;
}

const bench::PlannerRow& row_of(const bench::AggregateReport& r, PlannerKind k) {
  return *std::find_if(r.rows.begin(), r.rows.end(), [&](const auto& row) { return row.planner == k; });
}

Verdict force_ordering() {
  double secs = 0;
  const auto& r = suite(&secs);
  const auto& svg = row_of(r, PlannerKind::SVG);
  const auto& bvg = row_of(r, PlannerKind::BVG);
  const auto& brrt = row_of(r, PlannerKind::BRRT);
  const auto& nvg = row_of(r, PlannerKind::NVG);
  const double cap = 1.0 - kForceMargin;
  const bool margins = svg.force_ns.n > 0 && bvg.force_ns.n > 0 && brrt.force_ns.n > 0 &&
                       svg.force_ns.mean <= cap * bvg.force_ns.mean && svg.force_ns.mean <= cap * brrt.force_ns.mean;
  const bool nvg_low = nvg.force_ns.n == 0 || nvg.force_ns.mean <= kNvgForceNearZero * svg.force_ns.mean;
  const bool ok = margins && nvg_low && secs <= kSuiteRuntimeMax;
  return {ok, fmt("mean N*s over successes: SVG %.1f (n=%d), BVG %.1f (n=%d), B-RRT %.1f (n=%d), NVG %.1f (n=%d); "
                  "SVG/BVG %.2f, SVG/B-RRT %.2f; %.0f s",
                  svg.force_ns.mean, svg.force_ns.n, bvg.force_ns.mean, bvg.force_ns.n, brrt.force_ns.mean,
                  brrt.force_ns.n, nvg.force_ns.mean, nvg.force_ns.n,
                  bvg.force_ns.mean > 0 ? svg.force_ns.mean / bvg.force_ns.mean : 0.0,
                  brrt.force_ns.mean > 0 ? svg.force_ns.mean / brrt.force_ns.mean : 0.0, secs)};
}

Verdict execution_success() {
  const auto& r = suite(nullptr);
  const double svg = row_of(r, PlannerKind::SVG).exec_success_pct;
  const double bvg = row_of(r, PlannerKind::BVG).exec_success_pct;
  const double brrt = row_of(r, PlannerKind::BRRT).exec_success_pct;
  const double nvg = row_of(r, PlannerKind::NVG).exec_success_pct;
  const bool ok = svg >= bvg && svg >= kNvgExecFactor * nvg && svg > 0.0;
  return {ok, fmt("%d scenarios: SVG %.0f%%, B-RRT %.0f%%, BVG %.0f%%, NVG %.0f%%", kSuiteSeeds, svg, brrt, bvg, nvg)};
}

// Thresholds of the monitor, probed just either side.
bool monitor_thresholds() {
  using mppi::evaluate_conditions;
  const mppi::MonitorThresholds th;
  bool ok = th.eps == 0.1 && th.lambda == 0.75 && th.mu == 0.1 && th.tau == 30.0;
  mppi::MonitorState mon;
  ok = ok && evaluate_conditions(mon, {1, 0, 0}, {0.0999, 0, 0}, {0, 0}, 0).stalled;
  ok = ok && !evaluate_conditions(mon, {1, 0, 0}, {0.1001, 0, 0}, {0, 0}, 0).stalled;
  ok = ok && evaluate_conditions(mon, {1, 0, 0}, {0.24, 0, 0}, {0, 0}, 0).deviating;
  ok = ok && !evaluate_conditions(mon, {1, 0, 0}, {0.26, 0, 0}, {0, 0}, 0).deviating;
  // Each condition alone, sustained: exactly one signal, just after tau.
  // Slip needs its displacement window to fill first, so its onset is later.
  auto fires_once = [](const physics::Velocity& cmd, const physics::Velocity& act, bool moving, double onset) {
    mppi::MonitorState m;
    int fired = 0;
    double at = 0;
    for (int i = 1; i <= 500; ++i) {
      const double t = 0.08 * i;
      const Point2 pos = moving ? Point2{act.vx * t, 0} : Point2{2, 2};
      if (mppi::monitor_update(m, cmd, act, pos, t, geom::ObstacleId{1})) {
        ++fired;
        at = t;
      }
    }
    return fired == 1 && at > onset + 30.0 && at < onset + 30.0 + 0.16 + 1e-9;
  };
  ok = ok && fires_once({1, 0, 0}, {0.05, 0, 0}, true, 0.0);    // stall
  ok = ok && fires_once({1, 0, 0}, {0.2, 0, 0}, true, 0.0);     // deviation
  ok = ok && fires_once({0.15, 0, 0}, {0.15, 0, 0}, false, 1.08);  // slip, window from the first sample
  mppi::MonitorState slow;
  for (int i = 1; i <= 50; ++i) mppi::monitor_update(slow, {0.15, 0, 0}, {0.099, 0, 0}, {2, 2}, 0.08 * i, std::nullopt);
  return ok && !slow.last.slipping;
}

// Whether the traced robot crossed the barrier line x = 4 in the upper corridor.
bool crossed_upper(const fs::path& trace) {
  std::ifstream in(trace);
  std::string line;
  double px = 0, py = 0;
  bool have = false, upper = false, lower = false;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    if (j["type"] != "cycle") continue;
    const double x = j["pose"][0], y = j["pose"][1];
    if (have && (px - 4.0) * (x - 4.0) <= 0.0 && px != x) {
      const double yc = py + (y - py) * (4.0 - px) / (x - px);
      (yc > 2.5 ? upper : lower) = true;
    }
    px = x;
    py = y;
    have = true;
  }
  return upper && !lower;
}

Verdict replanning() {
  Config c;
  c.mppi.threads = 1;
  c.trial.record_timing = false;
  const auto dir = fs::temp_directory_path() / "namo_acceptance_replan";
  fs::create_directories(dir);
  bench::TrialOptions heavy_opt, truthful_opt;
  heavy_opt.trace_file = dir / "heavy.jsonl";
  truthful_opt.trace_file = dir / "truthful.jsonl";
  const auto heavy = bench::run_trial(testing::two_corridors(80.0), PlannerKind::SVG, c, heavy_opt);
  const auto truthful = bench::run_trial(testing::two_corridors(20.0), PlannerKind::SVG, c, truthful_opt);
  const bool thresholds = monitor_thresholds();
  const bool via_b = crossed_upper(dir / "heavy.jsonl");
  const bool ok = thresholds && heavy.executed && heavy.replans == 1 && via_b && truthful.executed &&
                  truthful.replans == 0;
  return {ok, fmt("monitor thresholds %s; 80 kg: %s, %d replan(s), via corridor B %s; truthful: %s, %d replan(s)",
                  thresholds ? "ok" : "wrong", heavy.outcome.c_str(), heavy.replans, via_b ? "yes" : "no",
                  truthful.outcome.c_str(), truthful.replans)};
}

Verdict equation_suite() {
  bool ok = true;
  std::string detail;
  for (const auto& c : equations::all()) {
    const bool good = c.ok() && c.examples_total == 3 && c.random_total == equations::kRandomCases;
    ok = ok && good;
    detail += fmt("%s %d/%d+%d/%d ", c.name.c_str(), c.examples_passed, c.examples_total, c.random_passed,
                  c.random_total);
  }
  if (!detail.empty()) detail.pop_back();
  return {ok, detail};
}

bool hull_oracle() {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::uniform_int_distribution<int> count(3, 50);
  for (int c = 0; c < kHullCases; ++c) {
    std::vector<Point2> pts(static_cast<std::size_t>(count(rng)));
    for (auto& p : pts) p = {u(rng), u(rng)};
    const auto hull = geom::convex_hull(pts);
    const auto edges = oracle::hull_edges(pts);
    if (hull.size() != edges.size()) return false;
    for (std::size_t i = 0; i < hull.size(); ++i) {
      const auto a = static_cast<std::size_t>(std::find(pts.begin(), pts.end(), hull[i]) - pts.begin());
      const auto b = static_cast<std::size_t>(std::find(pts.begin(), pts.end(), hull.vertex_wrapped(i + 1)) - pts.begin());
      if (!edges.count({a, b})) return false;
    }
  }
  return true;
}

bool visibility_oracle() {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int c = 0; c < kVisibilityCases; ++c) {
    std::vector<geom::Polygon> obs;
    std::vector<Point2> cand;
    while (obs.size() < 10) {
      const geom::Polygon p(oracle::random_convex(rng, {u(rng), u(rng)}, 0.8));
      bool clash = false;
      for (const auto& q : obs) clash = clash || geom::polygons_overlap(p, q);
      if (!clash) obs.push_back(geom::inflate(p, 0.1));
    }
    for (const auto& o : obs)
      for (const auto& v : o.vertices()) cand.push_back(v);
    for (int k = 0; k < 5; ++k) cand.push_back({u(rng), u(rng)});
    const Point2 v = cand[static_cast<std::size_t>(c) % cand.size()];
    const auto vis = geom::visible_vertices(v, cand, obs);
    for (const auto& w : cand) {
      if (w == v) continue;
      bool brute = true;
      for (const auto& o : obs) brute = brute && !oracle::crosses_interior(v, w, o.vertices());
      const bool listed = std::find(vis.begin(), vis.end(), w) != vis.end();
      if (listed != brute || geom::segment_clear(v, w, obs) != geom::segment_clear(w, v, obs)) return false;
      // Symmetry: w sees v exactly when v sees w.
      const std::vector<Point2> back{v};
      if (geom::visible_vertices(w, back, obs).empty() == listed) return false;
    }
  }
  return true;
}

Verdict geometry_oracles() {
  const bool hull = hull_oracle();
  const bool vis = visibility_oracle();
  int graphs = 0, agree = 0;
  for (const auto& row : plan_run().outcomes) {
    for (const auto& o : row) {
      if (!o.graph) continue;
      ++graphs;
      const auto a = svg::astar(*o.graph);
      const auto d = oracle::dijkstra_cost(*o.graph);
      if (a.has_value() == d.has_value() && (!a || std::abs(a->cost - *d) <= 1e-12 * std::max(1.0, *d))) ++agree;
    }
  }
  const bool ok = hull && vis && graphs > 0 && agree == graphs;
  return {ok, fmt("hull %d cases %s, visibility %d cases %s, A* = Dijkstra on %d/%d graphs", kHullCases,
                  hull ? "ok" : "mismatch", kVisibilityCases, vis ? "ok" : "mismatch", agree, graphs)};
}

bool threads_bit_identical() {
  for (std::uint64_t seed : {4u, 17u}) {
    const auto sc = bench::generate_scenario(seed);
    std::vector<double> masses;
    for (const auto& o : sc.obstacles) masses.push_back(o.mass_true);
    const physics::PhysicsModel m(physics::RobotModel{}, physics::PhysicsParams{}, sc.obstacles, masses, sc.room);
    const auto st = physics::initial_state(sc.obstacles, {sc.start.x, sc.start.y, 0});
    std::mt19937_64 rng(21 + seed);
    std::normal_distribution<double> n(0.0, 0.7);
    std::vector<std::vector<physics::Velocity>> batch(64, std::vector<physics::Velocity>(25));
    for (auto& seq : batch)
      for (auto& u : seq) u = {0.6 + n(rng), n(rng), n(rng)};
    const auto serial = physics::batch_rollout(st, batch, 0.08, m, 1);
    for (unsigned threads : {2u, 3u, 8u}) {
      const auto par = physics::batch_rollout(st, batch, 0.08, m, threads);
      for (std::size_t k = 0; k < par.size(); ++k)
        if (par[k].trajectory != serial[k].trajectory || par[k].forces != serial[k].forces) return false;
    }
  }
  return true;
}

double worst_force_mass_error() {
  const geom::Aabb room{{-5, -5}, {15, 5}};
  const physics::PhysicsParams params;
  double worst = 0;
  for (double mass : {4.0, 10.0, 20.0, 30.0}) {
    const std::vector<geom::Obstacle> obs{testing::box(1, 1.0, 0.0, 1.0, 1.0, mass)};
    const std::vector<double> masses{mass};
    const physics::PhysicsModel m(physics::RobotModel{}, params, obs, masses, room);
    auto st = physics::initial_state(obs, {});
    double tail = 0;
    int n = 0;
    for (int i = 0; i < 30; ++i) {
      const auto r = physics::step(st, {0.5, 0, 0}, 0.08, m);
      if (i >= 20) {
        tail += r.report.total_force;
        ++n;
      }
      st = r.state;
    }
    // Coulomb friction of the pushed box: mu m g.
    const double expected = 0.4 * 9.81 * mass;
    worst = std::max(worst, std::abs(tail / n - expected) / expected);
  }
  return worst;
}

bool fixed_bodies_stay() {
  for (std::uint64_t seed : {9u, 21u}) {
    const auto sc = bench::generate_scenario(seed);
    std::vector<double> masses;
    for (const auto& o : sc.obstacles) masses.push_back(o.mass_true);
    const physics::PhysicsModel m(physics::RobotModel{}, physics::PhysicsParams{}, sc.obstacles, masses, sc.room);
    const auto st0 = physics::initial_state(sc.obstacles, {sc.start.x, sc.start.y, 0});
    std::mt19937_64 rng(31 + seed);
    std::normal_distribution<double> n(0.0, 0.8);
    for (int trial = 0; trial < 8; ++trial) {
      std::vector<physics::Velocity> c(150);
      for (auto& u : c) u = {0.7 + n(rng), n(rng), n(rng)};
      const auto r = physics::rollout(st0, c, 0.08, m);
      for (const auto& st : r.trajectory) {
        for (std::size_t k = 0; k < m.bodies().size(); ++k)
          if (m.fixed(k) && st.obstacle_poses[k] != st0.obstacle_poses[k]) return false;
        if (!m.room().contains(st.robot_pose.position())) return false;
      }
    }
  }
  return true;
}

bool no_tunnelling() {
  const geom::Aabb room{{-5, -5}, {15, 5}};
  const std::vector<geom::Obstacle> obs{testing::box(1, 1.0, 0, 0.2, 3.0, 500.0)};
  const std::vector<double> masses{500.0};
  const physics::RobotModel robot;
  const physics::PhysicsModel m(robot, physics::PhysicsParams{}, obs, masses, room);
  for (double angle : {0.0, 0.3, -0.5}) {
    auto st = physics::initial_state(obs, {0, 0, angle});
    for (int i = 0; i < 50; ++i) {
      st = physics::step(st, {robot.u_max.vx, 0.2 * angle, 0}, 0.08, m).state;
      const auto pen = physics::penetration(m.footprint().transformed(st.robot_pose), obs[0].world_shape());
      if ((pen && pen->depth >= 1e-6) || st.robot_pose.x >= 1.0) return false;
    }
  }
  return true;
}

Verdict physics_properties() {
  const bool threads = threads_bit_identical();
  const double err = worst_force_mass_error();
  const bool fixed = fixed_bodies_stay();
  const bool tunnel = no_tunnelling();
  const bool ok = threads && err <= kForceMassTol && fixed && tunnel;
  return {ok, fmt("threads bit-identical %s, force/mass worst error %.2f%%, fixed bodies still %s, no tunnelling %s",
                  threads ? "yes" : "no", 100.0 * err, fixed ? "yes" : "no", tunnel ? "yes" : "no")};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict bench_determinism() {
  const auto dir = fs::temp_directory_path() / "namo_acceptance_bench";
  fs::remove_all(dir);
  const std::string args = " bench --seeds 0..2 --planners nvg,bvg,brrt,svg --no-timing --set mppi.K=32 "
                           "mppi.threads=1 trial.max_sim_time=20 --out ";
  auto run = [&](const char* name) {
    const auto cmd = std::string(NAMO_BIN) + args + (dir / name).string() + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  };
  const int exit_a = run("a"), exit_b = run("b");
  int files = 0, same = 0;
  if (exit_a == 0 && exit_b == 0) {
    for (const auto& f : fs::recursive_directory_iterator(dir / "a")) {
      if (!f.is_regular_file()) continue;
      ++files;
      const auto rel = fs::relative(f.path(), dir / "a");
      same += fs::exists(dir / "b" / rel) && slurp(f.path()) == slurp(dir / "b" / rel);
    }
  }
  const bool report = fs::exists(dir / "a" / "report.csv");
  const bool ok = exit_a == 0 && exit_b == 0 && report && files > 1 && same == files;
  return {ok, fmt("exit %d/%d, %d/%d files byte-identical", exit_a, exit_b, same, files)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<int, std::function<Verdict()>>> criteria{
      {1, path_success},  {2, planner_time},     {3, force_ordering},     {4, execution_success}, {5, replanning},
      {6, equation_suite}, {7, geometry_oracles}, {8, physics_properties}, {9, bench_determinism}};
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  bool all = true;
  for (const auto& [n, fn] : criteria) {
    if (!only.empty() && !only.count(n)) continue;
    const auto t0 = Clock::now();
    const auto v = fn();
    all = all && v.pass;
    std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << n << ": " << v.detail
              << fmt(" [%.1f s]", seconds_since(t0)) << std::endl;
  }
  return all ? 0 : 1;
}
