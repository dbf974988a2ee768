#include "swarmtree/fsm.hpp"

namespace swarmtree {

int phase_of(FsmState s) {
  switch (s) {
    case FsmState::Init: return 0;
    case FsmState::SelectParent:
    case FsmState::WaitParentBarrier: return 1;
    case FsmState::GrowTree:
    case FsmState::WaitGrowthBarrier: return 2;
    case FsmState::SelectRoot:
    case FsmState::WaitRootBarrier: return 3;
    case FsmState::StartTree: return 4;
  }
  return 0;
}

std::string_view to_string(FsmState s) {
  switch (s) {
    case FsmState::Init: return "init";
    case FsmState::StartTree: return "start_tree";
    case FsmState::SelectParent: return "select_parent";
    case FsmState::WaitParentBarrier: return "wait_parent_barrier";
    case FsmState::GrowTree: return "grow_tree";
    case FsmState::WaitGrowthBarrier: return "wait_growth_barrier";
    case FsmState::SelectRoot: return "select_root";
    case FsmState::WaitRootBarrier: return "wait_root_barrier";
  }
  return "?";
}

std::string_view to_string(Barrier b) {
  switch (b) {
    case Barrier::Parent: return "parent";
    case Barrier::Growth: return "growth";
    case Barrier::Root: return "root";
  }
  return "?";
}

std::string_view to_string(NeedState s) {
  switch (s) {
    case NeedState::NoNeed: return "no_need";
    case NeedState::Need: return "need";
    case NeedState::Await: return "await";
  }
  return "?";
}

std::string_view to_string(SpareState s) {
  switch (s) {
    case SpareState::Wait: return "wait";
    case SpareState::ExtendEdge: return "extend_edge";
    case SpareState::AdjustPosition: return "adjust_position";
  }
  return "?";
}

}  // namespace swarmtree
