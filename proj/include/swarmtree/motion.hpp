#pragma once

#include <span>
#include <vector>

#include "swarmtree/comms.hpp"
#include "swarmtree/core.hpp"

namespace swarmtree {

/// Components of one robot's control, all in the robot's own frame.
struct ForceBreakdown {
  Vec2 u_tree_old;
  Vec2 u_tree_new;
  Vec2 u_target;
  Vec2 u_avoid;
  Vec2 u_spare;  // spare navigation (edge midpoint or reference robot)
  int gate = 1;
  bool emergency = false;
  Vec2 u_total;
};

/// Signed parent-child interaction magnitude at distance d; positive attracts.
/// d is clamped to 1e-6 from below.
double tree_force(double d, double delta, double epsilon);
/// The law with delta = params.delta.
double tree_force(double d, const Params& params);

/// The law along the unit vector toward the partner, rest length
/// params.effective_link_rest().
Vec2 tree_force_vec(Vec2 to_partner, const Params& params);

/// tau-scaled unit vector toward the target; zero once within target_reach.
Vec2 target_force(Vec2 to_target, const Params& params);

/// Linear repulsion ramp from every neighbor inside A_avoid that is not in `kin`.
Vec2 avoid_force(const NeighborTable& nbrs, std::span<const RobotId> kin, const Params& params);
Vec2 avoid_force(std::span<const Vec2> others, const Params& params);

struct Segment {
  Vec2 a, b;
};
/// Extra push across every segment passing closer than edge_clearance, in the
/// side `heading` already points to, so a crossing body clears the link quickly.
/// Only the segment interior counts.
Vec2 edge_crossing_force(std::span<const Segment> segments, Vec2 heading, const Params& params);

struct MotionInputs {
  std::vector<Vec2> parents;  // vectors to the robot's parent(s), own frame
  Vec2 u_tree_old;
  Vec2 u_tree_new;
  Vec2 u_target;
  Vec2 u_avoid;
  Vec2 u_spare;
};

/// Piecewise composition: tree + gate * (target + avoid) while every parent is
/// within E, otherwise the emergency manoeuvre toward the parent at u_max.
ForceBreakdown compose(const MotionInputs& in, const Params& params);

/// Acceleration command handed to the integrator: first-order tracking of u as a velocity.
Vec2 acceleration_command(Vec2 u_total_world, Vec2 velocity_world, const Params& params);

}  // namespace swarmtree
