#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>

#include "swarmtree/comms.hpp"
#include "swarmtree/core.hpp"

namespace swarmtree {

/// Tree-based robot count. `depth` is 1 at the root.
struct CountState {
  std::uint32_t depth = 1;
  std::map<RobotId, std::int64_t> child_reports;
};

/// Count estimate of this node: its depth plus the number of its descendants
/// (the full tree size at the root).
std::int64_t count_step(const CountState& self);

struct ChildCentroid {
  Vec2 q;                        // child's contribution, child's frame
  double rel_orientation = 0.0;  // child heading minus own heading
};

struct CentroidState {
  std::optional<Vec2> p_parent;  // vector to the parent, own frame; empty at the root
  std::map<RobotId, ChildCentroid> child_q;
};

/// Accumulated child contributions in the own frame.
Vec2 centroid_accumulator(const CentroidState& self);

/// Non-root: the contribution q sent upstream, a - (c - d + 1) * p_parent.
/// Root: the centroid of the tree in the root frame, a / c.
Vec2 centroid_step(const CentroidState& self, const CountState& count);

struct HandoffCandidate {
  RobotId id = 0;
  Vec2 position;  // in the current root's frame
};

/// Neighbor strictly closer to `centroid` than the root (origin) by more than
/// `hysteresis`; the closest one wins, ties by lowest id.
std::optional<RobotId> choose_handoff(Vec2 centroid, std::span<const HandoffCandidate> candidates,
                                      double hysteresis);

/// Centroid given in the sender's frame, re-expressed at the receiving robot.
Vec2 reexpress_centroid(Vec2 centroid_sender_frame, const SituatedReception& rec);

}  // namespace swarmtree
