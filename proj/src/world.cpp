#include "swarmtree/world.hpp"

#include <algorithm>
#include <cmath>

namespace swarmtree {

RobotPhysState step_dynamics(const RobotPhysState& state, Vec2 u, const Params& params) {
  if (!u.finite() || !state.p.finite() || !state.v.finite() || !std::isfinite(state.theta)) {
    throw SimulationFault("step_dynamics: non-finite state or control");
  }
  u = u.clamped(params.u_max);
  RobotPhysState next = state;
  next.v = (state.v + u * params.dt).clamped(params.v_max);
  next.p = state.p + next.v * params.dt;
  if (next.v.norm() > 0.01) next.theta = std::atan2(next.v.y, next.v.x);
  return next;
}

bool AdjacencyMatrix::symmetric() const {
  for (std::size_t i = 0; i < n_; ++i) {
    if ((*this)(i, i)) return false;
    for (std::size_t j = i + 1; j < n_; ++j) {
      if ((*this)(i, j) != (*this)(j, i)) return false;
    }
  }
  return true;
}

std::size_t AdjacencyMatrix::edge_count() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i + 1; j < n_; ++j) n += (*this)(i, j) ? 1 : 0;
  }
  return n;
}

World::World(std::vector<RobotPhysState> robots, std::vector<Vec2> targets, Params params,
             bool los_enabled)
    : robots_(std::move(robots)),
      targets_(std::move(targets)),
      params_(params),
      los_enabled_(los_enabled) {
  params_.validate();
}

bool World::in_range(RobotId i, RobotId j) const {
  return (robots_.at(i).p - robots_.at(j).p).norm() <= params_.C;
}

double point_segment_distance(Vec2 q, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = ab.dot(ab);
  if (len2 == 0.0) return (q - a).norm();
  const double t = std::clamp((q - a).dot(ab) / len2, 0.0, 1.0);
  return (q - (a + ab * t)).norm();
}

bool World::line_of_sight(RobotId i, RobotId j) const {
  if (!los_enabled_) return true;
  const Vec2 a = robots_.at(i).p;
  const Vec2 b = robots_.at(j).p;
  const double r = params_.body_radius;
  const double lo_x = std::min(a.x, b.x) - r, hi_x = std::max(a.x, b.x) + r;
  const double lo_y = std::min(a.y, b.y) - r, hi_y = std::max(a.y, b.y) + r;
  for (RobotId k = 0; k < robots_.size(); ++k) {
    if (k == i || k == j) continue;
    const Vec2 q = robots_[k].p;
    if (q.x < lo_x || q.x > hi_x || q.y < lo_y || q.y > hi_y) continue;
    if (point_segment_distance(q, a, b) <= r) return false;
  }
  return true;
}

AdjacencyMatrix World::comm_graph() const {
  const std::size_t n = robots_.size();
  AdjacencyMatrix adj(n);
  for (RobotId i = 0; i < n; ++i) {
    for (RobotId j = i + 1; j < n; ++j) {
      if (in_range(i, j) && line_of_sight(i, j)) adj.set_edge(i, j);
    }
  }
  return adj;
}

void World::step(std::span<const Vec2> controls) {
  if (controls.size() != robots_.size()) {
    throw SimulationFault("World::step: control count does not match robot count");
  }
  for (std::size_t i = 0; i < robots_.size(); ++i) {
    robots_[i] = step_dynamics(robots_[i], controls[i], params_);
  }
  ++tick_;
}

}  // namespace swarmtree
