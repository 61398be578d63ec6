#include "namo/physics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace namo::physics {

using geom::kEps;

Velocity clamp_control(const Velocity& v, const Velocity& u_max) {
  auto c = [](double x, double m) { return std::isfinite(x) ? std::clamp(x, -m, m) : 0.0; };
  return {c(v.vx, u_max.vx), c(v.vy, u_max.vy), c(v.omega, u_max.omega)};
}

PhysicsModel::PhysicsModel(RobotModel robot, PhysicsParams params, std::span<const geom::Obstacle> obstacles,
                           std::span<const double> masses, const geom::Aabb& room)
    : robot_(robot), params_(params), room_(room), footprint_(robot.footprint()) {
  if (masses.size() != obstacles.size()) throw std::invalid_argument("PhysicsModel: one mass per obstacle");
  bodies_.reserve(obstacles.size());
  for (std::size_t k = 0; k < obstacles.size(); ++k) {
    Body b{obstacles[k].id, geom::convex_hull(obstacles[k].shape.vertices()), masses[k], 0.0, 0.0, {}};
    b.centroid = b.shape.centroid();
    for (const auto& v : b.shape.vertices()) {
      b.radius = std::max(b.radius, geom::norm(v));
      b.lever += geom::distance(v, b.centroid);
    }
    b.lever /= static_cast<double>(b.shape.size());
    bodies_.push_back(std::move(b));
  }
  for (const auto& w : geom::make_room_walls(room, std::numeric_limits<double>::infinity())) {
    walls_.push_back(w.world_shape());
    wall_ids_.push_back(w.id);
  }
}

WorldState initial_state(std::span<const geom::Obstacle> obstacles, const Pose2& robot_pose) {
  WorldState s;
  s.robot_pose = robot_pose;
  s.obstacle_poses.reserve(obstacles.size());
  for (const auto& o : obstacles) s.obstacle_poses.push_back(o.pose);
  return s;
}

namespace {

using Verts = std::vector<Point2>;

void transform_into(const Polygon& shape, const Pose2& pose, Verts& out) {
  out.resize(shape.size());
  for (std::size_t i = 0; i < shape.size(); ++i) out[i] = pose.apply(shape[i]);
}

bool convex_contains(std::span<const Point2> poly, Point2 p) {
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (geom::orient(poly[i], poly[(i + 1) % n], p) < -kEps) return false;
  }
  return true;
}

// SAT over the edge normals of both convex polygons.
std::optional<Penetration> sat(std::span<const Point2> a, std::span<const Point2> b) {
  double best = std::numeric_limits<double>::infinity();
  Point2 best_n;
  auto axes_of = [&](std::span<const Point2> poly) {
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Point2 e = poly[(i + 1) % n] - poly[i];
      const double len = geom::norm(e);
      if (len < 1e-12) continue;
      const Point2 ax{e.y / len, -e.x / len};
      double amin = std::numeric_limits<double>::infinity(), amax = -amin, bmin = amin, bmax = -amin;
      for (const auto& p : a) {
        const double d = geom::dot(p, ax);
        amin = std::min(amin, d);
        amax = std::max(amax, d);
      }
      for (const auto& p : b) {
        const double d = geom::dot(p, ax);
        bmin = std::min(bmin, d);
        bmax = std::max(bmax, d);
      }
      const double o1 = amax - bmin, o2 = bmax - amin;
      if (o1 <= kEps || o2 <= kEps) return false;
      if (o1 < best) {
        best = o1;
        best_n = ax;
      }
      if (o2 < best) {
        best = o2;
        best_n = -ax;
      }
    }
    return true;
  };
  if (!axes_of(a) || !axes_of(b)) return std::nullopt;
  return Penetration{best_n, best};
}

// Mean of the vertices of each polygon lying inside the other.
Point2 contact_point(std::span<const Point2> a, std::span<const Point2> b, const Penetration& pen) {
  Point2 sum;
  int count = 0;
  for (const auto& p : a) {
    if (convex_contains(b, p)) { sum += p; ++count; }
  }
  for (const auto& p : b) {
    if (convex_contains(a, p)) { sum += p; ++count; }
  }
  if (count > 0) return sum / static_cast<double>(count);
  // Edge-edge crossing without contained vertices: deepest point of a.
  double best = -std::numeric_limits<double>::infinity();
  Point2 deepest = a[0];
  for (const auto& p : a) {
    if (geom::dot(p, pen.normal) > best) {
      best = geom::dot(p, pen.normal);
      deepest = p;
    }
  }
  return deepest - pen.normal * (0.5 * pen.depth);
}

Point2 rotate(Point2 p, double a) {
  const double c = std::cos(a), s = std::sin(a);
  return {c * p.x - s * p.y, s * p.x + c * p.y};
}

// Per-step force bookkeeping: maximum over substeps for each contact.
struct StepForces {
  std::vector<double> body;
  std::vector<Point2> body_point;
  std::vector<double> wall;
  std::vector<Point2> wall_point;

  void reset(std::size_t nb, std::size_t nw) {
    body.assign(nb, 0.0);
    body_point.assign(nb, {});
    wall.assign(nw, 0.0);
    wall_point.assign(nw, {});
  }
  double total() const {
    double t = 0.0;
    for (double f : body) t += f;
    for (double f : wall) t += f;
    return t;
  }
};

void record(double& slot, Point2& slot_point, double force, Point2 point) {
  if (force > slot) {
    slot = force;
    slot_point = point;
  }
}

class Stepper {
 public:
  explicit Stepper(const PhysicsModel& m)
      : m_(m), p_(m.params()), cache_(m.bodies().size()), valid_(m.bodies().size(), 0) {
    for (const auto& w : m.walls()) wall_box_.push_back(w.bounds());
    robot_radius_ = m.robot().bounding_radius();
  }

  void bind(WorldState& s) {
    s_ = &s;
    std::fill(valid_.begin(), valid_.end(), 0);
  }

  const StepForces& forces() const { return forces_; }

  void advance(const Velocity& control, double dt) {
    const Velocity u = clamp_control(control, m_.robot().u_max);
    const Pose2 start = s_->robot_pose;
    forces_.reset(m_.bodies().size(), m_.walls().size());
    const double lin = std::hypot(u.vx, u.vy) * dt;
    const double ang = std::abs(u.omega) * dt * robot_radius_;
    const int n = std::max(1, static_cast<int>(std::ceil(std::max(lin, ang) / p_.max_substep - 1e-12)));
    const Point2 d{u.vx * dt / n, u.vy * dt / n};
    const double dth = u.omega * dt / n;
    for (int i = 0; i < n; ++i) substep(d, dth);
    const Pose2 end = s_->robot_pose;
    s_->robot_vel = {(end.x - start.x) / dt, (end.y - start.y) / dt, geom::wrap_angle(end.theta - start.theta) / dt};
    s_->time += dt;
  }

 private:
  const Verts& body_poly(std::size_t k) {
    if (!valid_[k]) {
      transform_into(m_.bodies()[k].shape, s_->obstacle_poses[k], cache_[k]);
      valid_[k] = 1;
    }
    return cache_[k];
  }

  void set_pose(std::size_t k, const Pose2& p) {
    s_->obstacle_poses[k] = p;
    valid_[k] = 0;
  }

  void refresh_robot() { transform_into(m_.footprint(), s_->robot_pose, robot_); }

  bool near_robot(std::size_t k) const {
    const auto& pose = s_->obstacle_poses[k];
    const double reach = robot_radius_ + m_.bodies()[k].radius + 1e-6;
    const double dx = pose.x - s_->robot_pose.x, dy = pose.y - s_->robot_pose.y;
    return dx * dx + dy * dy <= reach * reach;
  }

  bool near_bodies(std::size_t i, std::size_t j) const {
    const auto& a = s_->obstacle_poses[i];
    const auto& b = s_->obstacle_poses[j];
    const double reach = m_.bodies()[i].radius + m_.bodies()[j].radius + 1e-6;
    const double dx = a.x - b.x, dy = a.y - b.y;
    return dx * dx + dy * dy <= reach * reach;
  }

  static geom::Aabb box_of(const Verts& v) {
    geom::Aabb b{v[0], v[0]};
    for (const auto& p : v) {
      b.lo.x = std::min(b.lo.x, p.x);
      b.lo.y = std::min(b.lo.y, p.y);
      b.hi.x = std::max(b.hi.x, p.x);
      b.hi.y = std::max(b.hi.y, p.y);
    }
    return b;
  }

  bool hits_wall(const Verts& poly) const {
    const auto box = box_of(poly);
    for (std::size_t w = 0; w < m_.walls().size(); ++w) {
      if (!box.overlaps(wall_box_[w])) continue;
      if (sat(poly, m_.walls()[w].vertices())) return true;
    }
    return false;
  }

  // Moves body k by `disp` and resolves the bodies it runs into. Fails when
  // the chain meets a wall, a cycle, the depth cap or a link heavier than
  // f_max. The robot feels the sum of the link forces.
  bool push_chain(std::size_t k, Point2 disp, int depth, double& chain_force) {
    undo_.push_back({k, s_->obstacle_poses[k]});
    Pose2 p = s_->obstacle_poses[k];
    p.x += disp.x;
    p.y += disp.y;
    set_pose(k, p);
    const Verts& poly = body_poly(k);
    if (hits_wall(poly)) return false;
    for (std::size_t q = 0; q < m_.bodies().size(); ++q) {
      if (q == k || !near_bodies(k, q)) continue;
      const auto pen = sat(body_poly(k), body_poly(q));
      if (!pen) continue;
      const bool in_chain = std::any_of(undo_.begin(), undo_.end(), [&](const auto& u) { return u.first == q; });
      if (in_chain || depth >= p_.max_chain) return false;
      const double fq = p_.push_force(m_.bodies()[q].mass);
      if (fq > p_.f_max) return false;
      chain_force += fq;
      if (!push_chain(q, pen->normal * pen->depth, depth + 1, chain_force)) return false;
    }
    return true;
  }

  void rollback() {
    for (auto it = undo_.rbegin(); it != undo_.rend(); ++it) set_pose(it->first, it->second);
    undo_.clear();
  }

  bool overlaps_anything(std::size_t k) {
    const Verts& poly = body_poly(k);
    if (hits_wall(poly)) return true;
    if (auto pen = sat(robot_, poly); pen && pen->depth > 1e-6) return true;
    for (std::size_t q = 0; q < m_.bodies().size(); ++q) {
      if (q == k || !near_bodies(k, q)) continue;
      if (sat(body_poly(k), body_poly(q))) return true;
    }
    return false;
  }

  // Quasi-static torque response of a pushed body: angle = lever arm x push
  // direction, scaled by depth / lever^2.
  void maybe_rotate(std::size_t k, Point2 contact, Point2 normal, double depth) {
    const Body& b = m_.bodies()[k];
    if (!p_.obstacle_rotation || b.lever <= 1e-9) return;
    const Pose2 before = s_->obstacle_poses[k];
    const Point2 g = before.apply(b.centroid);
    double dth = geom::cross(contact - g, normal) * depth / (b.lever * b.lever);
    dth = std::clamp(dth, -p_.max_rotation_per_substep, p_.max_rotation_per_substep);
    if (std::abs(dth) < 1e-12) return;
    const Point2 pos = g + rotate(before.position() - g, dth);
    set_pose(k, {pos.x, pos.y, geom::wrap_angle(before.theta + dth)});
    if (overlaps_anything(k)) set_pose(k, before);
  }

  void substep(Point2 d, double dth) {
    const Pose2 prev = s_->robot_pose;
    s_->robot_pose.x += d.x;
    s_->robot_pose.y += d.y;
    s_->robot_pose.theta = geom::wrap_angle(s_->robot_pose.theta + dth);
    refresh_robot();

    for (int pass = 0; pass < 4; ++pass) {
      bool any = false;
      for (std::size_t k = 0; k < m_.bodies().size(); ++k) {
        if (!near_robot(k)) continue;
        const auto pen = sat(robot_, body_poly(k));
        if (!pen) continue;
        any = true;
        const Point2 cp = contact_point(robot_, body_poly(k), *pen);
        const double fk = p_.push_force(m_.bodies()[k].mass);
        double chain = 0.0;
        undo_.clear();
        if (fk <= p_.f_max && push_chain(k, pen->normal * pen->depth, 1, chain)) {
          undo_.clear();
          record(forces_.body[k], forces_.body_point[k], fk + chain, cp);
          maybe_rotate(k, cp, pen->normal, pen->depth);
        } else {
          rollback();
          s_->robot_pose.x -= pen->normal.x * pen->depth;
          s_->robot_pose.y -= pen->normal.y * pen->depth;
          refresh_robot();
          record(forces_.body[k], forces_.body_point[k], p_.f_max, cp);
        }
      }
      const auto box = box_of(robot_);
      for (std::size_t w = 0; w < m_.walls().size(); ++w) {
        if (!box.overlaps(wall_box_[w])) continue;
        const auto pen = sat(robot_, m_.walls()[w].vertices());
        if (!pen) continue;
        any = true;
        const Point2 cp = contact_point(robot_, m_.walls()[w].vertices(), *pen);
        s_->robot_pose.x -= pen->normal.x * pen->depth;
        s_->robot_pose.y -= pen->normal.y * pen->depth;
        refresh_robot();
        record(forces_.wall[w], forces_.wall_point[w], p_.f_max, cp);
      }
      if (!any) break;
    }

    // Hard constraint: no residual overlap with anything that cannot move.
    bool stuck = hits_wall(robot_);
    for (std::size_t k = 0; k < m_.bodies().size() && !stuck; ++k) {
      if (!m_.fixed(k) || !near_robot(k)) continue;
      if (auto pen = sat(robot_, body_poly(k)); pen && pen->depth > 1e-6) stuck = true;
    }
    if (stuck) {
      s_->robot_pose = prev;
      refresh_robot();
    }
    // Penalty on what is left pressed into movable bodies.
    for (std::size_t k = 0; k < m_.bodies().size(); ++k) {
      if (m_.fixed(k) || !near_robot(k)) continue;
      const auto pen = sat(robot_, body_poly(k));
      if (!pen) continue;
      const double f = p_.push_force(m_.bodies()[k].mass) + p_.stiffness * pen->depth;
      record(forces_.body[k], forces_.body_point[k], f, contact_point(robot_, body_poly(k), *pen));
    }
  }

  const PhysicsModel& m_;
  const PhysicsParams& p_;
  WorldState* s_ = nullptr;
  std::vector<Verts> cache_;
  std::vector<char> valid_;
  std::vector<geom::Aabb> wall_box_;
  Verts robot_;
  double robot_radius_ = 0.0;
  std::vector<std::pair<std::size_t, Pose2>> undo_;
  StepForces forces_;
};

ContactReport make_report(const StepForces& f, const PhysicsModel& m) {
  ContactReport r;
  for (std::size_t k = 0; k < f.body.size(); ++k) {
    if (f.body[k] > 0.0) r.contacts.push_back({m.bodies()[k].id, f.body[k], f.body_point[k]});
  }
  for (std::size_t w = 0; w < f.wall.size(); ++w) {
    if (f.wall[w] > 0.0) r.contacts.push_back({m.wall_ids()[w], f.wall[w], f.wall_point[w]});
  }
  std::sort(r.contacts.begin(), r.contacts.end(),
            [](const Contact& a, const Contact& b) { return a.obstacle < b.obstacle; });
  for (const auto& c : r.contacts) r.total_force += c.force;
  return r;
}

void check_state(const WorldState& world, const PhysicsModel& model) {
  if (world.obstacle_poses.size() != model.bodies().size())
    throw std::invalid_argument("WorldState does not match the physics model");
}

}  // namespace

std::optional<Penetration> penetration(const Polygon& a, const Polygon& b) {
  return sat(geom::convex_hull(a.vertices()).vertices(), geom::convex_hull(b.vertices()).vertices());
}

StepResult step(const WorldState& world, const Velocity& control, double dt, const PhysicsModel& model) {
  check_state(world, model);
  StepResult out{world, {}};
  Stepper st(model);
  st.bind(out.state);
  st.advance(control, dt);
  out.report = make_report(st.forces(), model);
  return out;
}

Rollout rollout(const WorldState& world, std::span<const Velocity> controls, double dt, const PhysicsModel& model) {
  check_state(world, model);
  Rollout r;
  r.trajectory.reserve(controls.size());
  r.forces.reserve(controls.size());
  WorldState s = world;
  Stepper st(model);
  st.bind(s);
  for (const auto& u : controls) {
    st.advance(u, dt);
    r.trajectory.push_back(s);
    r.forces.push_back(st.forces().total());
  }
  return r;
}

std::vector<Rollout> batch_rollout(const WorldState& world, std::span<const std::vector<Velocity>> batch, double dt,
                                   const PhysicsModel& model, unsigned threads) {
  std::vector<Rollout> out(batch.size());
  parallel_for(batch.size(), threads, [&](std::size_t k) { out[k] = rollout(world, batch[k], dt, model); });
  return out;
}

std::vector<RobotTrace> batch_robot_traces(const WorldState& world, std::span<const std::vector<Velocity>> batch,
                                           double dt, const PhysicsModel& model, unsigned threads) {
  check_state(world, model);
  std::vector<RobotTrace> out(batch.size());
  parallel_for(batch.size(), threads, [&](std::size_t k) {
    WorldState s = world;
    Stepper st(model);
    st.bind(s);
    RobotTrace& t = out[k];
    const auto& seq = batch[k];
    t.poses.reserve(seq.size());
    t.velocities.reserve(seq.size());
    t.forces.reserve(seq.size());
    for (const auto& u : seq) {
      st.advance(u, dt);
      t.poses.push_back(s.robot_pose);
      t.velocities.push_back(s.robot_vel);
      t.forces.push_back(st.forces().total());
    }
  });
  return out;
}

}  // namespace namo::physics
