#pragma once

#include <cstdint>
#include <string_view>

namespace swarmtree {

/// High-level per-robot states, in cycle order.
enum class FsmState : std::uint8_t {
  Init,
  StartTree,
  SelectParent,
  WaitParentBarrier,
  GrowTree,
  WaitGrowthBarrier,
  SelectRoot,
  WaitRootBarrier,
};

enum class Barrier : std::uint8_t { Parent, Growth, Root };

/// Non-spare side of spare management.
enum class NeedState : std::uint8_t { NoNeed, Need, Await };
/// Spare side of spare management.
enum class SpareState : std::uint8_t { Wait, ExtendEdge, AdjustPosition };

/// Position of a state in the loop: 0 Init, 1 parent selection, 2 growth,
/// 3 root selection, 4 waiting for the next tree.
int phase_of(FsmState s);

std::string_view to_string(FsmState s);
std::string_view to_string(Barrier b);
std::string_view to_string(NeedState s);
std::string_view to_string(SpareState s);

}  // namespace swarmtree
