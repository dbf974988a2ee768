#include "swarmtree/comms.hpp"

#include <cmath>

namespace swarmtree {

std::string_view to_string(MsgKind k) {
  switch (k) {
    case MsgKind::StartTree: return "StartTree";
    case MsgKind::ParentClaim: return "ParentClaim";
    case MsgKind::ChildAck: return "ChildAck";
    case MsgKind::WorkerFlag: return "WorkerFlag";
    case MsgKind::CountReport: return "CountReport";
    case MsgKind::CentroidReport: return "CentroidReport";
    case MsgKind::BarrierDone: return "BarrierDone";
    case MsgKind::Go: return "Go";
    case MsgKind::RootHandoff: return "RootHandoff";
    case MsgKind::HandoffAck: return "HandoffAck";
    case MsgKind::NeedEdge: return "NeedEdge";
    case MsgKind::SpareClaim: return "SpareClaim";
    case MsgKind::TargetForce: return "TargetForce";
    case MsgKind::Heartbeat: return "Heartbeat";
  }
  return "?";
}

Vec2 to_local_frame(const SituatedReception& rec) {
  return {rec.range * std::cos(rec.bearing), rec.range * std::sin(rec.bearing)};
}

Vec2 sender_to_receiver(Vec2 v_sender, const SituatedReception& rec) {
  return v_sender.rotated(rec.rel_orientation);
}

Vec2 receiver_to_sender(Vec2 v_receiver, const SituatedReception& rec) {
  return v_receiver.rotated(-rec.rel_orientation);
}

SituatedReception annotate(const Message& msg, const RobotPhysState& sender,
                           const RobotPhysState& receiver, std::uint64_t tick) {
  return annotate(msg, sender, sender.theta, receiver, tick);
}

SituatedReception annotate(const Message& msg, const RobotPhysState& sender,
                           double sender_heading_at_send, const RobotPhysState& receiver,
                           std::uint64_t tick) {
  const Vec2 d = sender.p - receiver.p;
  SituatedReception rec;
  rec.msg = msg;
  rec.range = d.norm();
  rec.bearing = rec.range > 0.0 ? wrap_angle(std::atan2(d.y, d.x) - receiver.theta) : 0.0;
  rec.rel_orientation = wrap_angle(sender_heading_at_send - receiver.theta);
  rec.received_at = tick;
  return rec;
}

std::vector<std::vector<SituatedReception>> deliver(
    const World& world, const AdjacencyMatrix& graph,
    std::span<const std::vector<Message>> outboxes, std::span<const double> send_headings,
    const ChannelModel& channel) {
  const std::size_t n = world.size();
  std::vector<std::vector<SituatedReception>> inboxes(n);
  for (RobotId s = 0; s < outboxes.size() && s < n; ++s) {
    if (outboxes[s].empty()) continue;
    const double heading = s < send_headings.size() ? send_headings[s] : world.robot(s).theta;
    for (RobotId r = 0; r < n; ++r) {
      if (r == s || !graph(s, r)) continue;
      for (const Message& m : outboxes[s]) {
        if (channel.drop_probability > 0.0 && channel.rng != nullptr &&
            channel.rng->uniform() < channel.drop_probability) {
          continue;
        }
        inboxes[r].push_back(annotate(m, world.robot(s), heading, world.robot(r), world.tick()));
      }
    }
  }
  return inboxes;
}

std::vector<std::vector<SituatedReception>> deliver(
    const World& world, std::span<const std::vector<Message>> outboxes) {
  return deliver(world, world.comm_graph(), outboxes);
}

void NeighborTable::ingest(std::span<const SituatedReception> inbox) {
  std::map<RobotId, NeighborEntry> fresh;
  for (const auto& rec : inbox) {
    auto& e = fresh[rec.msg.sender];
    e.latest = rec;
    e.messages.push_back(rec.msg);
  }
  for (auto& [id, e] : fresh) entries_[id] = std::move(e);
}

void NeighborTable::expire(std::uint64_t now, const Params& params) {
  const std::int64_t max_age = params.liveness_ticks();
  std::erase_if(entries_, [&](const auto& kv) {
    return static_cast<std::int64_t>(now - kv.second.received_at()) > max_age;
  });
}

const NeighborEntry* NeighborTable::find(RobotId id) const {
  auto it = entries_.find(id);
  return it == entries_.end() ? nullptr : &it->second;
}

NeighborTable expire(NeighborTable table, std::uint64_t now, const Params& params) {
  table.expire(now, params);
  return table;
}

}  // namespace swarmtree
