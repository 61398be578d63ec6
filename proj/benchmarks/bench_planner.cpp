#include <benchmark/benchmark.h>

#include "namo/baselines.hpp"
#include "namo/geometry.hpp"
#include "namo/scenario.hpp"
#include "namo/svg_planner.hpp"

using namespace namo;

namespace {

svg::PlannerParams params_for(const bench::Scenario& sc) {
  svg::PlannerParams p;
  p.bounds = sc.room;
  return p;
}

void BM_ConvexHull(benchmark::State& state) {
  const auto sc = bench::generate_scenario(1);
  std::vector<geom::Point2> pts;
  for (const auto& o : sc.obstacles)
    for (const auto& v : o.world_shape().vertices()) pts.push_back(v);
  for (auto _ : state) benchmark::DoNotOptimize(geom::convex_hull(pts));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(pts.size()));
}
BENCHMARK(BM_ConvexHull);

void BM_BuildGraph(benchmark::State& state) {
  const auto kind = static_cast<baselines::PlannerKind>(state.range(0));
  const auto sc = bench::generate_scenario(static_cast<std::uint64_t>(state.range(1)));
  auto obs = sc.obstacles;
  for (auto& w : geom::make_room_walls(sc.room, 1000.0)) obs.push_back(w);
  const auto costing = kind == baselines::PlannerKind::NVG   ? svg::PassageCosting::None
                       : kind == baselines::PlannerKind::BVG ? svg::PassageCosting::Binary
                                                             : svg::PassageCosting::Weighted;
  for (auto _ : state) benchmark::DoNotOptimize(svg::build_graph(obs, sc.start, sc.goal, params_for(sc), costing));
  state.SetLabel(std::string(baselines::to_string(kind)));
}
BENCHMARK(BM_BuildGraph)
    ->ArgsProduct({{int(baselines::PlannerKind::NVG), int(baselines::PlannerKind::BVG),
                    int(baselines::PlannerKind::SVG)},
                   {0, 7}})
    ->Unit(benchmark::kMillisecond);

void BM_AStar(benchmark::State& state) {
  const auto sc = bench::generate_scenario(0);
  auto obs = sc.obstacles;
  for (auto& w : geom::make_room_walls(sc.room, 1000.0)) obs.push_back(w);
  const auto g = svg::build_svg(obs, sc.start, sc.goal, params_for(sc));
  for (auto _ : state) benchmark::DoNotOptimize(svg::astar(g));
  state.counters["nodes"] = static_cast<double>(g.size());
}
BENCHMARK(BM_AStar)->Unit(benchmark::kMicrosecond);

void BM_PlanEndToEnd(benchmark::State& state) {
  const auto kind = static_cast<baselines::PlannerKind>(state.range(0));
  const auto sc = bench::generate_scenario(2);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        baselines::plan(kind, sc.obstacles, sc.room, sc.start, sc.goal, params_for(sc), baselines::RrtParams{}, 2));
  state.SetLabel(std::string(baselines::to_string(kind)));
}
BENCHMARK(BM_PlanEndToEnd)->DenseRange(0, 3)->Unit(benchmark::kMillisecond);

}  // namespace
