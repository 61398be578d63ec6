#include "namo/mppi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace namo::mppi {

void validate(const MppiConfig& c) {
  auto fail = [](const char* what) { throw std::invalid_argument(std::string("mppi config: ") + what); };
  if (c.K < 2) fail("K must be >= 2");
  if (c.T < 1) fail("T must be >= 1");
  if (!(c.dt > 0.0)) fail("dt must be > 0");
  if (!(c.beta > 0.0)) fail("beta must be > 0");
  if (!(c.alpha > 0.0)) fail("alpha must be > 0");
  if (c.sigma.vx < 0 || c.sigma.vy < 0 || c.sigma.omega < 0) fail("sigma must be >= 0");
  const auto& w = c.weights;
  if (w.ctrl[0] < 0 || w.ctrl[1] < 0 || w.ctrl[2] < 0 || w.dist < 0 || w.prog < 0 || w.rot < 0 || w.force < 0)
    fail("weights must be >= 0");
  if (!(c.eps_force > 0.0)) fail("eps_force must be > 0");
}

std::vector<ControlSequence> sample_controls(const ControlSequence& nominal, const MppiConfig& config,
                                             const Velocity& u_max, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  std::vector<ControlSequence> out(static_cast<std::size_t>(config.K), nominal);
  for (std::size_t k = 1; k < out.size(); ++k) {
    for (auto& u : out[k]) {
      const double nx = unit(rng), ny = unit(rng), nw = unit(rng);
      u = physics::clamp_control(
          {u.vx + config.sigma.vx * nx, u.vy + config.sigma.vy * ny, u.omega + config.sigma.omega * nw}, u_max);
    }
  }
  return out;
}

double control_cost(const Velocity& xdot, const Velocity& v, const Velocity& u_max,
                    const std::array<double, 3>& w) {
  const double ex = std::abs(xdot.vx - v.vx) / u_max.vx;
  const double ey = std::abs(xdot.vy - v.vy) / u_max.vy;
  const double ew = std::abs(xdot.omega - v.omega) / u_max.omega;
  return w[0] * ex * ex + w[1] * ey * ey + w[2] * ew * ew;
}

std::size_t closest_waypoint(Point2 x, std::span<const Point2> waypoints) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < waypoints.size(); ++i) {
    const Point2 d = waypoints[i] - x;
    const double d2 = geom::dot(d, d);
    if (d2 < best_d) {
      best_d = d2;
      best = i;
    }
  }
  return best;
}

std::size_t target_waypoint(Point2 x, std::span<const Point2> waypoints) {
  const std::size_t i = closest_waypoint(x, waypoints);
  return std::min(i + 1, waypoints.size() - 1);
}

double distance_cost(Point2 x, std::span<const Point2> waypoints, double alpha) {
  return geom::distance(x, waypoints[target_waypoint(x, waypoints)]) / alpha;
}

std::vector<double> progress_cost(std::span<const std::size_t> idx) {
  std::vector<double> out(idx.size(), 0.0);
  if (idx.empty()) return out;
  const auto [lo, hi] = std::minmax_element(idx.begin(), idx.end());
  if (*hi == *lo) return out;
  const double span = static_cast<double>(*hi - *lo);
  for (std::size_t k = 0; k < idx.size(); ++k) out[k] = 1.0 - static_cast<double>(idx[k] - *lo) / span;
  return out;
}

double rotation_cost(double theta, Point2 x, Point2 target) {
  const Point2 d = target - x;
  if (geom::norm(d) <= geom::kEps) return 0.0;
  const double want = std::atan2(d.y, d.x);
  return std::abs(geom::wrap_angle(want - theta)) / std::numbers::pi;
}

std::vector<double> force_cost(std::span<const double> sums, double eps) {
  std::vector<double> out(sums.size(), 0.0);
  if (sums.empty()) return out;
  const double mx = *std::max_element(sums.begin(), sums.end());
  for (std::size_t k = 0; k < sums.size(); ++k) out[k] = sums[k] / (mx + eps);
  return out;
}

std::vector<RolloutCost> evaluate_batch(const physics::WorldState& world, std::span<const ControlSequence> sequences,
                                        std::span<const Point2> waypoints, const MppiConfig& config,
                                        const physics::PhysicsModel& model) {
  if (waypoints.empty()) throw std::invalid_argument("evaluate_batch: no waypoints");
  const auto traces = physics::batch_robot_traces(world, sequences, config.dt, model, config.threads);
  const auto& w = config.weights;
  const auto& u_max = model.robot().u_max;
  const auto& room = model.room();

  std::vector<RolloutCost> costs(sequences.size());
  std::vector<std::size_t> feasible_idx;
  feasible_idx.reserve(sequences.size());
  for (std::size_t k = 0; k < sequences.size(); ++k) {
    RolloutCost& c = costs[k];
    const auto& tr = traces[k];
    for (std::size_t t = 0; t < tr.poses.size(); ++t) {
      c.breakdown.ctrl += control_cost(tr.velocities[t], sequences[k][t], u_max, w.ctrl);
      c.force_sum += tr.forces[t];
      if (!room.contains(tr.poses[t].position())) c.feasible = false;
    }
    if (tr.poses.empty()) {
      c.feasible = false;
      continue;
    }
    const auto& end = tr.poses.back();
    const Point2 x = end.position();
    c.closest_index = closest_waypoint(x, waypoints);
    c.breakdown.dist = w.dist * distance_cost(x, waypoints, config.alpha);
    c.breakdown.rot = w.rot * rotation_cost(end.theta, x, waypoints[target_waypoint(x, waypoints)]);
    if (c.feasible) feasible_idx.push_back(k);
  }

  // Progress and force are normalised over the rollouts that count.
  std::vector<std::size_t> idx;
  std::vector<double> sums;
  for (std::size_t k : feasible_idx) {
    idx.push_back(costs[k].closest_index);
    sums.push_back(costs[k].force_sum);
  }
  const auto prog = progress_cost(idx);
  const auto force = force_cost(sums, config.eps_force);
  for (std::size_t j = 0; j < feasible_idx.size(); ++j) {
    RolloutCost& c = costs[feasible_idx[j]];
    c.breakdown.prog = w.prog * prog[j];
    c.breakdown.force = w.force * force[j];
  }
  for (auto& c : costs) {
    const auto& b = c.breakdown;
    c.total = c.feasible ? b.ctrl + b.dist + b.prog + b.rot + b.force : std::numeric_limits<double>::infinity();
  }
  return costs;
}

std::vector<double> softmax_weights(std::span<const RolloutCost> costs, double beta) {
  double cmin = std::numeric_limits<double>::infinity();
  for (const auto& c : costs) {
    if (c.feasible) cmin = std::min(cmin, c.total);
  }
  std::vector<double> w(costs.size(), 0.0);
  if (!std::isfinite(cmin)) return w;
  double sum = 0.0;
  for (std::size_t k = 0; k < costs.size(); ++k) {
    if (!costs[k].feasible) continue;
    w[k] = std::exp(-(costs[k].total - cmin) / beta);
    sum += w[k];
  }
  for (auto& x : w) x /= sum;
  return w;
}

MppiResult mppi_step(const physics::WorldState& world, const ControlSequence& nominal,
                     std::span<const Point2> waypoints, const MppiConfig& config,
                     const physics::PhysicsModel& model, std::uint64_t seed) {
  if (nominal.size() != static_cast<std::size_t>(config.T))
    throw std::invalid_argument("mppi_step: nominal length differs from T");
  const auto samples = sample_controls(nominal, config, model.robot().u_max, seed);
  MppiResult r;
  r.costs = evaluate_batch(world, samples, waypoints, config, model);
  if (std::none_of(r.costs.begin(), r.costs.end(), [](const RolloutCost& c) { return c.feasible; }))
    throw AllRolloutsInfeasible("every sampled rollout left the room");
  r.weights = softmax_weights(r.costs, config.beta);
  r.blended.assign(nominal.size(), Velocity{});
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const double wk = r.weights[k];
    if (wk == 0.0) continue;
    for (std::size_t t = 0; t < nominal.size(); ++t) {
      r.blended[t].vx += wk * samples[k][t].vx;
      r.blended[t].vy += wk * samples[k][t].vy;
      r.blended[t].omega += wk * samples[k][t].omega;
    }
  }
  r.control = r.blended.front();
  r.next_nominal.assign(r.blended.begin() + 1, r.blended.end());
  r.next_nominal.push_back(r.blended.back());
  return r;
}

MonitorConditions evaluate_conditions(const MonitorState& mon, const Velocity& commanded, const Velocity& actual,
                                      Point2 position, double now) {
  const auto& th = mon.thresholds;
  const double cmd = commanded.linear_speed();
  const double act = actual.linear_speed();
  MonitorConditions c;
  c.stalled = act < th.eps && cmd > th.eps;
  c.deviating = std::hypot(actual.vx - commanded.vx, actual.vy - commanded.vy) > th.lambda * cmd;
  // Slip needs a full window of history to judge "stationary".
  const MonitorState::Sample* anchor = nullptr;
  for (const auto& s : mon.history) {
    if (s.time <= now - th.window + 1e-9) anchor = &s;
  }
  if (anchor && act > th.mu) c.slipping = geom::distance(anchor->position, position) < th.still;
  return c;
}

std::optional<ReplanSignal> monitor_update(MonitorState& mon, const Velocity& commanded, const Velocity& actual,
                                           Point2 position, double now, std::optional<ObstacleId> culprit) {
  mon.last = evaluate_conditions(mon, commanded, actual, position, now);
  mon.history.push_back({now, position});
  // Keep one sample at or before the window start.
  while (mon.history.size() > 2 && mon.history[1].time <= now - mon.thresholds.window + 1e-9) mon.history.pop_front();

  if (!mon.last.any()) {
    mon.timer_started.reset();
    return std::nullopt;
  }
  if (!mon.timer_started) mon.timer_started = now;
  if (now - *mon.timer_started > mon.thresholds.tau) {
    mon.timer_started.reset();
    return ReplanSignal{culprit};
  }
  return std::nullopt;
}

void update_movability(std::span<geom::Obstacle> obstacles, ObstacleId id, double max_mass) {
  for (auto& o : obstacles) {
    if (o.id != id) continue;
    if (o.mass <= max_mass) o.mass = max_mass + kMassBump;
    return;
  }
  throw UnknownObstacle("no obstacle with id " + std::to_string(id.value));
}

}  // namespace namo::mppi
