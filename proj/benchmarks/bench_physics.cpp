#include <benchmark/benchmark.h>

#include <random>

#include "namo/mppi.hpp"
#include "namo/physics.hpp"
#include "namo/scenario.hpp"

using namespace namo;

namespace {

struct World {
  bench::Scenario sc = bench::generate_scenario(4);
  std::vector<double> masses;
  physics::PhysicsModel model;
  physics::WorldState state;

  World()
      : masses(true_masses(sc)),
        model(physics::RobotModel{}, physics::PhysicsParams{}, sc.obstacles, masses, sc.room),
        state(physics::initial_state(sc.obstacles, {sc.start.x, sc.start.y, 0})) {}

  static std::vector<double> true_masses(const bench::Scenario& s) {
    std::vector<double> m;
    for (const auto& o : s.obstacles) m.push_back(o.mass_true);
    return m;
  }
};

std::vector<mppi::ControlSequence> noisy_batch(int k, int t) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 0.5);
  std::vector<mppi::ControlSequence> batch(static_cast<std::size_t>(k), mppi::ControlSequence(static_cast<std::size_t>(t)));
  for (auto& seq : batch)
    for (auto& u : seq) u = {0.6 + n(rng), n(rng), n(rng)};
  return batch;
}

void BM_Step(benchmark::State& state) {
  const World w;
  for (auto _ : state) benchmark::DoNotOptimize(physics::step(w.state, {0.8, 0.1, 0.2}, 0.08, w.model));
}
BENCHMARK(BM_Step)->Unit(benchmark::kMicrosecond);

void BM_BatchRollout(benchmark::State& state) {
  const World w;
  const auto batch = noisy_batch(static_cast<int>(state.range(0)), 25);
  for (auto _ : state) benchmark::DoNotOptimize(physics::batch_rollout(w.state, batch, 0.08, w.model, 1));
  state.SetItemsProcessed(state.iterations() * state.range(0) * 25);
}
BENCHMARK(BM_BatchRollout)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_MppiStep(benchmark::State& state) {
  const World w;
  mppi::MppiConfig c;
  c.K = static_cast<int>(state.range(0));
  c.threads = 1;
  std::vector<geom::Point2> wps;
  for (int i = 0; i <= 14; ++i) wps.push_back({w.sc.start.x + 0.5 * i, w.sc.start.y});
  const mppi::ControlSequence nominal(25, {0.5, 0, 0});
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(mppi::mppi_step(w.state, nominal, wps, c, w.model, ++seed));
}
BENCHMARK(BM_MppiStep)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace
