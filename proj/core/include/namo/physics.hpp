#pragma once

#include <optional>
#include <span>
#include <vector>

#include "namo/geometry.hpp"

namespace namo::physics {

using geom::ObstacleId;
using geom::Point2;
using geom::Polygon;
using geom::Pose2;

// World-frame holonomic velocity command or measurement.
struct Velocity {
  double vx = 0.0;
  double vy = 0.0;
  double omega = 0.0;

  double linear_speed() const { return std::hypot(vx, vy); }
  friend bool operator==(const Velocity&, const Velocity&) = default;
};

Velocity clamp_control(const Velocity& v, const Velocity& u_max);

struct RobotModel {
  double length = 0.7;   // along body x
  double width = 0.517;  // along body y
  Velocity u_max{1.0, 1.0, 1.5};

  Polygon footprint() const { return Polygon::rectangle(length, width); }
  double bounding_radius() const { return 0.5 * std::hypot(length, width); }
};

struct PhysicsParams {
  double mu_g = 0.4;       // ground friction coefficient
  double gravity = 9.81;
  double f_max = 0.4 * 9.81 * 30.0;  // strongest push the robot can deliver (N)
  double stiffness = 1e4;  // penalty on residual overlap (N/m)
  double max_substep = 0.05;
  int max_chain = 3;       // longest push chain, robot excluded
  bool obstacle_rotation = true;
  double max_rotation_per_substep = 0.1;

  double push_force(double mass) const { return mu_g * gravity * mass; }
};

// One rigid body of the simulated room, in its own frame.
struct Body {
  ObstacleId id;
  Polygon shape;
  double mass = 1.0;
  double radius = 0.0;  // max vertex distance from the body origin
  double lever = 0.0;   // mean vertex distance from the centroid
  Point2 centroid;      // body frame
};

// Immutable description shared by every rollout: bodies with the masses the
// model believes, walls, robot and contact constants.
class PhysicsModel {
 public:
  PhysicsModel(RobotModel robot, PhysicsParams params, std::span<const geom::Obstacle> obstacles,
               std::span<const double> masses, const geom::Aabb& room);

  const RobotModel& robot() const { return robot_; }
  const PhysicsParams& params() const { return params_; }
  const std::vector<Body>& bodies() const { return bodies_; }
  const std::vector<Polygon>& walls() const { return walls_; }
  const std::vector<ObstacleId>& wall_ids() const { return wall_ids_; }
  const geom::Aabb& room() const { return room_; }
  const Polygon& footprint() const { return footprint_; }

  // A body is fixed when the robot alone cannot move it.
  bool fixed(std::size_t body) const { return params_.push_force(bodies_[body].mass) > params_.f_max; }

 private:
  RobotModel robot_;
  PhysicsParams params_;
  std::vector<Body> bodies_;
  std::vector<Polygon> walls_;
  std::vector<ObstacleId> wall_ids_;
  geom::Aabb room_;
  Polygon footprint_;
};

struct WorldState {
  Pose2 robot_pose;
  Velocity robot_vel;
  std::vector<Pose2> obstacle_poses;  // indexed like PhysicsModel::bodies()
  double time = 0.0;

  friend bool operator==(const WorldState&, const WorldState&) = default;
};

WorldState initial_state(std::span<const geom::Obstacle> obstacles, const Pose2& robot_pose);

struct Contact {
  ObstacleId obstacle;
  double force = 0.0;
  Point2 point;
};

struct ContactReport {
  double total_force = 0.0;
  std::vector<Contact> contacts;  // sorted by obstacle id
};

struct StepResult {
  WorldState state;
  ContactReport report;
};

StepResult step(const WorldState& world, const Velocity& control, double dt, const PhysicsModel& model);

// Minimum translation between two convex polygons. `normal` points from a to
// b; empty when they do not overlap by more than kEps.
struct Penetration {
  Point2 normal;
  double depth = 0.0;
};
std::optional<Penetration> penetration(const Polygon& a, const Polygon& b);

struct Rollout {
  std::vector<WorldState> trajectory;  // state after each step
  std::vector<double> forces;          // total contact force per step
};

Rollout rollout(const WorldState& world, std::span<const Velocity> controls, double dt, const PhysicsModel& model);

// `threads` = 0 uses the hardware concurrency. Results equal serial rollout()
// calls whatever the thread count.
std::vector<Rollout> batch_rollout(const WorldState& world, std::span<const std::vector<Velocity>> batch, double dt,
                                   const PhysicsModel& model, unsigned threads = 0);

// Lighter rollout keeping only what the controller scores.
struct RobotTrace {
  std::vector<Pose2> poses;
  std::vector<Velocity> velocities;
  std::vector<double> forces;
};

std::vector<RobotTrace> batch_robot_traces(const WorldState& world, std::span<const std::vector<Velocity>> batch,
                                           double dt, const PhysicsModel& model, unsigned threads = 0);

// Runs fn(k) for k in [0, n) on up to `threads` workers, splitting the range
// into contiguous blocks.
template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn);

}  // namespace namo::physics

#include "namo/detail/parallel_for.hpp"
