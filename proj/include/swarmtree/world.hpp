#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "swarmtree/core.hpp"

namespace swarmtree {

struct RobotPhysState {
  Vec2 p;
  Vec2 v;
  double theta = 0.0;  // heading of the robot's local frame, radians
};

/// One double-integrator step: u is clamped to u_max, velocity to v_max.
/// Throws SimulationFault on non-finite input.
RobotPhysState step_dynamics(const RobotPhysState& state, Vec2 u, const Params& params);

/// Symmetric 0/1 matrix with zero diagonal.
class AdjacencyMatrix {
 public:
  explicit AdjacencyMatrix(std::size_t n = 0) : n_(n), bits_(n * n, 0) {}

  std::size_t size() const { return n_; }
  bool operator()(std::size_t i, std::size_t j) const { return bits_[i * n_ + j] != 0; }
  void set_edge(std::size_t i, std::size_t j, bool on = true) {
    bits_[i * n_ + j] = on;
    bits_[j * n_ + i] = on;
  }
  void set(std::size_t i, std::size_t j, bool on) { bits_[i * n_ + j] = on; }
  bool symmetric() const;
  std::size_t edge_count() const;

 private:
  std::size_t n_;
  std::vector<std::uint8_t> bits_;
};

class World {
 public:
  World(std::vector<RobotPhysState> robots, std::vector<Vec2> targets, Params params,
        bool los_enabled);

  std::size_t size() const { return robots_.size(); }
  const RobotPhysState& robot(RobotId i) const { return robots_.at(i); }
  RobotPhysState& robot_mut(RobotId i) { return robots_.at(i); }
  std::span<const RobotPhysState> robots() const { return robots_; }
  std::span<const Vec2> targets() const { return targets_; }
  const Params& params() const { return params_; }
  std::uint64_t tick() const { return tick_; }
  bool los_enabled() const { return los_enabled_; }

  bool in_range(RobotId i, RobotId j) const;
  bool line_of_sight(RobotId i, RobotId j) const;
  AdjacencyMatrix comm_graph() const;

  /// Integrates every robot with its control (all computed from the same tick)
  /// and advances the tick counter.
  void step(std::span<const Vec2> controls);

 private:
  std::vector<RobotPhysState> robots_;
  std::vector<Vec2> targets_;
  Params params_;
  bool los_enabled_;
  std::uint64_t tick_ = 0;
};

/// Distance from point q to the segment a-b.
double point_segment_distance(Vec2 q, Vec2 a, Vec2 b);

}  // namespace swarmtree
