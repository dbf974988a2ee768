#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include <Eigen/Dense>

#include "swarmtree/world.hpp"

namespace swarmtree {

struct MetricsSample {
  std::uint64_t tick = 0;
  double fiedler = 0.0;  // clamped to >= 0
  bool sampled_fiedler = true;
  bool tree_edge_broken = false;
  std::uint32_t workers_arrived = 0;
  bool done = false;
};

struct RunSummary {
  bool completed = false;
  std::optional<double> normalized_time;  // empty = DNF
  double disconnected_time_ratio = 0.0;
  double fiedler_low_ratio = 0.0;
  std::uint64_t ticks = 0;
};

inline constexpr double kFiedlerLow = 1e-3;

/// L = D - A. Throws SimulationFault on an asymmetric matrix or a self loop.
Eigen::MatrixXd laplacian(const AdjacencyMatrix& adj);

/// Second smallest eigenvalue of a symmetric Laplacian (0 for n < 2).
double fiedler_value(const Eigen::MatrixXd& L);

/// Union-find connectivity of the graph.
bool connected(const AdjacencyMatrix& adj);

/// One observer sample. `parent_of[i]` is robot i's committed parent, if any;
/// `worker_targets[i]` is the target position of worker i.
MetricsSample sample(const World& world, const AdjacencyMatrix& adj,
                     std::span<const std::optional<RobotId>> parent_of,
                     std::span<const std::optional<Vec2>> worker_targets, bool with_fiedler = true);

/// T_max = 10 * target_radius / v_max.
double max_mission_time(double target_radius, const Params& params);

/// Ratios over the sampled ticks. Throws ConfigError on an empty list.
RunSummary summarize(std::span<const MetricsSample> samples, double target_radius,
                     const Params& params);

}  // namespace swarmtree
