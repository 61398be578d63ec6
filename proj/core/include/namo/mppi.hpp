#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "namo/geometry.hpp"
#include "namo/physics.hpp"

namespace namo::mppi {

using geom::ObstacleId;
using geom::Point2;
using physics::Velocity;

using ControlSequence = std::vector<Velocity>;

struct CostWeights {
  std::array<double, 3> ctrl{1.0, 1.0, 0.3};  // diagonal of W_ctrl
  double dist = 2.0;
  double prog = 2.0;
  double rot = 0.5;
  double force = 1.0;
};

struct MppiConfig {
  int K = 256;
  int T = 25;
  double dt = 0.08;
  Velocity sigma{0.3, 0.3, 0.5};
  double beta = 0.5;
  CostWeights weights;
  double alpha = 0.5;  // distance normaliser, the waypoint spacing
  double eps_force = 1e-6;
  unsigned threads = 0;  // rollout workers, 0 = hardware concurrency
};

// Throws std::invalid_argument on K < 2, T < 1, negative weights, beta <= 0
// or alpha <= 0.
void validate(const MppiConfig& config);

struct CostBreakdown {
  double ctrl = 0.0;
  double dist = 0.0;
  double prog = 0.0;
  double rot = 0.0;
  double force = 0.0;
};

struct RolloutCost {
  double total = 0.0;  // +inf for a disregarded rollout
  CostBreakdown breakdown;
  std::size_t closest_index = 0;  // closest waypoint at the final step
  double force_sum = 0.0;         // raw sum of per-step contact force
  bool feasible = true;
};

class AllRolloutsInfeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Sequence 0 is the nominal itself; the rest add N(0, sigma) noise per axis
// and step and are clamped to u_max.
std::vector<ControlSequence> sample_controls(const ControlSequence& nominal, const MppiConfig& config,
                                             const Velocity& u_max, std::uint64_t seed);

// (|xdot - v| / u_max)^T W (|xdot - v| / u_max)
double control_cost(const Velocity& xdot, const Velocity& v, const Velocity& u_max,
                    const std::array<double, 3>& w_ctrl);

// Lowest index among the nearest waypoints.
std::size_t closest_waypoint(Point2 x, std::span<const Point2> waypoints);
// Index the robot should head for: one past the closest, saturating at the end.
std::size_t target_waypoint(Point2 x, std::span<const Point2> waypoints);

double distance_cost(Point2 x, std::span<const Point2> waypoints, double alpha);

// 1 - (i_k - min I) / (max I - min I); all zero when max I == min I.
std::vector<double> progress_cost(std::span<const std::size_t> closest_indices);

// |wrap(atan2(target - x) - theta)| / pi, zero when x sits on the target.
double rotation_cost(double theta, Point2 x, Point2 target);

// f_k / (max f + eps)
std::vector<double> force_cost(std::span<const double> force_sums, double eps_force);

std::vector<RolloutCost> evaluate_batch(const physics::WorldState& world, std::span<const ControlSequence> sequences,
                                        std::span<const Point2> waypoints, const MppiConfig& config,
                                        const physics::PhysicsModel& model);

struct MppiResult {
  Velocity control;               // first element of the blended sequence
  ControlSequence blended;        // sum_k w_k V_k
  ControlSequence next_nominal;   // blended shifted left, last step repeated
  std::vector<RolloutCost> costs;
  std::vector<double> weights;    // 0 for disregarded rollouts
};

// Softmax weights exp(-(C_k - min C) / beta) over feasible costs, normalised.
std::vector<double> softmax_weights(std::span<const RolloutCost> costs, double beta);

MppiResult mppi_step(const physics::WorldState& world, const ControlSequence& nominal,
                     std::span<const Point2> waypoints, const MppiConfig& config,
                     const physics::PhysicsModel& model, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Movability monitor

struct MonitorThresholds {
  double eps = 0.1;      // stall speed (m/s)
  double lambda = 0.75;  // relative tracking deviation
  double mu = 0.1;       // slip speed (m/s)
  double tau = 30.0;     // seconds a condition must persist
  double window = 1.0;   // slip window (s)
  double still = 0.02;   // displacement that counts as stationary (m)
};

struct MonitorConditions {
  bool stalled = false;    // commanded > eps, actual < eps
  bool deviating = false;  // |actual - commanded| > lambda |commanded|
  bool slipping = false;   // actual > mu yet displacement over the window < still
  bool any() const { return stalled || deviating || slipping; }
};

struct MonitorState {
  MonitorThresholds thresholds;
  std::optional<double> timer_started;
  MonitorConditions last;
  struct Sample {
    double time;
    Point2 position;
  };
  std::deque<Sample> history;
};

struct ReplanSignal {
  std::optional<ObstacleId> obstacle;  // largest-force contact when the timer fired
};

MonitorConditions evaluate_conditions(const MonitorState& mon, const Velocity& commanded, const Velocity& actual,
                                      Point2 position, double now);

// Advances the monitor by one control cycle. `culprit` is the obstacle with the
// largest contact force this cycle, if any. The timer restarts after firing.
std::optional<ReplanSignal> monitor_update(MonitorState& mon, const Velocity& commanded, const Velocity& actual,
                                           Point2 position, double now, std::optional<ObstacleId> culprit);

class UnknownObstacle : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raises the believed mass just above max_mass; idempotent for obstacles
// already believed non-movable.
inline constexpr double kMassBump = 0.01;
void update_movability(std::span<geom::Obstacle> obstacles, ObstacleId id, double max_mass);

}  // namespace namo::mppi
