#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "swarmtree/core.hpp"
#include "swarmtree/fsm.hpp"
#include "swarmtree/world.hpp"

namespace swarmtree {

// Message payloads. Vectors are expressed in the sender's frame unless noted.

struct StartTreeMsg {
  double dist_to_root = 0.0;
  Vec2 root_vec;  // sender to root
};
struct ParentClaimMsg {
  RobotId parent = 0;
};
/// Sent by a spare that just split the edge (child, old_parent): "I am your parent now".
struct ChildAckMsg {
  RobotId child = 0;
  RobotId old_parent = 0;
};
/// Workers in the sender's subtree, and how many of them sit on their target.
struct WorkerFlagMsg {
  std::uint32_t workers = 0;
  std::uint32_t arrived = 0;
};
struct CountReportMsg {
  std::int64_t count = 0;
  bool complete = false;
};
struct CentroidReportMsg {
  Vec2 q;
  bool complete = false;
};
struct BarrierDoneMsg {
  Barrier barrier = Barrier::Parent;
};
struct GoMsg {
  Barrier barrier = Barrier::Parent;
};
struct RootHandoffMsg {
  RobotId new_root = 0;
  Vec2 centroid;
};
struct HandoffAckMsg {
  RobotId old_root = 0;
};
/// Advertises the stretched edge (sender, parent); parent_vec points from sender to parent.
struct NeedEdgeMsg {
  RobotId parent = 0;
  Vec2 parent_vec;
};
struct SpareClaimMsg {
  RobotId child = 0;
  RobotId parent = 0;
};
struct TargetForceMsg {
  Vec2 force;
};
struct HeartbeatMsg {
  Role role = Role::Spare;
  FsmState fsm = FsmState::Init;
  std::optional<RobotId> parent;
  std::optional<RobotId> old_parent;
  std::uint32_t depth = 0;  // 0 = unknown
  bool committed = false;
  NeedState need = NeedState::NoNeed;
  SpareState spare = SpareState::Wait;
  double dist_to_root = -1.0;  // < 0 = not heard this round
  bool arrived = false;
};

enum class MsgKind : std::uint8_t {
  StartTree,
  ParentClaim,
  ChildAck,
  WorkerFlag,
  CountReport,
  CentroidReport,
  BarrierDone,
  Go,
  RootHandoff,
  HandoffAck,
  NeedEdge,
  SpareClaim,
  TargetForce,
  Heartbeat,
};

// Alternative order matches MsgKind.
using Payload = std::variant<StartTreeMsg, ParentClaimMsg, ChildAckMsg, WorkerFlagMsg,
                             CountReportMsg, CentroidReportMsg, BarrierDoneMsg, GoMsg,
                             RootHandoffMsg, HandoffAckMsg, NeedEdgeMsg, SpareClaimMsg,
                             TargetForceMsg, HeartbeatMsg>;

struct Message {
  RobotId sender = 0;
  std::uint32_t round = 0;
  Payload payload;

  MsgKind kind() const { return static_cast<MsgKind>(payload.index()); }
  template <typename T>
  const T* as() const {
    return std::get_if<T>(&payload);
  }
};

std::string_view to_string(MsgKind k);

struct SituatedReception {
  Message msg;
  double range = 0.0;            // m
  double bearing = 0.0;          // sender direction in the receiver frame, (-pi, pi]
  double rel_orientation = 0.0;  // sender heading at send time minus receiver heading, (-pi, pi]
  std::uint64_t received_at = 0;
};

/// Sender position in the receiver's frame.
Vec2 to_local_frame(const SituatedReception& rec);
/// Re-expresses a vector given in the sender's frame in the receiver's frame.
Vec2 sender_to_receiver(Vec2 v_sender, const SituatedReception& rec);
/// Inverse of sender_to_receiver.
Vec2 receiver_to_sender(Vec2 v_receiver, const SituatedReception& rec);

/// Everything heard from one neighbor during the last tick it was heard.
struct NeighborEntry {
  SituatedReception latest;
  std::vector<Message> messages;

  RobotId id() const { return latest.msg.sender; }
  Vec2 position() const { return to_local_frame(latest); }
  double range() const { return latest.range; }
  std::uint64_t received_at() const { return latest.received_at; }
  std::uint32_t round() const { return latest.msg.round; }

  template <typename T>
  const T* find() const {
    for (const auto& m : messages) {
      if (const T* p = m.as<T>()) return p;
    }
    return nullptr;
  }
  const HeartbeatMsg* heartbeat() const { return find<HeartbeatMsg>(); }
};

class NeighborTable {
 public:
  using Map = std::map<RobotId, NeighborEntry>;

  /// Replaces the entry of every sender present in `inbox`.
  void ingest(std::span<const SituatedReception> inbox);
  /// Drops entries older than the liveness period.
  void expire(std::uint64_t now, const Params& params);

  const NeighborEntry* find(RobotId id) const;
  bool contains(RobotId id) const { return entries_.contains(id); }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  Map::const_iterator begin() const { return entries_.begin(); }
  Map::const_iterator end() const { return entries_.end(); }

 private:
  Map entries_;
};

NeighborTable expire(NeighborTable table, std::uint64_t now, const Params& params);

/// Optional lossy channel for robustness experiments.
struct ChannelModel {
  double drop_probability = 0.0;
  RngStream* rng = nullptr;
};

/// Receptions for every robot: message m from i reaches j iff (i, j) is an edge of
/// `graph`. Range and bearing come from the world at delivery time; the relative
/// orientation uses `send_headings[i]` (the frame the payload was written in) when
/// given, the sender's current heading otherwise. Receivers never hear themselves.
std::vector<std::vector<SituatedReception>> deliver(
    const World& world, const AdjacencyMatrix& graph,
    std::span<const std::vector<Message>> outboxes, std::span<const double> send_headings = {},
    const ChannelModel& channel = {});

/// Convenience overload computing the communication graph itself.
std::vector<std::vector<SituatedReception>> deliver(
    const World& world, std::span<const std::vector<Message>> outboxes);

/// Ground-truth situated annotation of a message from `sender` at `receiver`.
SituatedReception annotate(const Message& msg, const RobotPhysState& sender,
                           const RobotPhysState& receiver, std::uint64_t tick);
SituatedReception annotate(const Message& msg, const RobotPhysState& sender,
                           double sender_heading_at_send, const RobotPhysState& receiver,
                           std::uint64_t tick);

}  // namespace swarmtree
