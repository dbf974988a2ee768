#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "swarmtree/collective.hpp"
#include "swarmtree/comms.hpp"
#include "swarmtree/core.hpp"
#include "swarmtree/fsm.hpp"
#include "swarmtree/motion.hpp"
#include "swarmtree/world.hpp"

namespace swarmtree {

struct TreeLinks {
  std::optional<RobotId> old_parent;
  std::optional<RobotId> new_parent;
  std::set<RobotId> old_children;
  std::set<RobotId> children;
  std::uint32_t depth = 0;  // 1 at the root, 0 while unknown
  bool useful = false;      // subtree holds at least one worker
  std::uint32_t round = 0;
};

struct Edge {
  RobotId child = 0;
  RobotId parent = 0;
  bool operator==(const Edge&) const = default;
};

struct SpareFsm {
  NeedState nonspare_state = NeedState::NoNeed;
  SpareState spare_state = SpareState::Wait;
  std::optional<Edge> claimed_edge;
};

/// Worker role to the robot nearest each target (ties by id), root to the robot
/// nearest the cluster centroid among the rest, spare to everyone else.
/// `worker_target[i]` is the target index of worker i.
struct RoleAssignment {
  std::vector<Role> roles;
  std::vector<std::optional<std::size_t>> worker_target;
  RobotId root = 0;
};
RoleAssignment init_roles(std::span<const Vec2> positions, std::span<const Vec2> targets);

// ---------------------------------------------------------------------------
// Parent selection over a neighbor table.

struct SelectionFilter {
  std::uint32_t round = 0;
  std::set<RobotId> exclude;                     // own children, for instance
  std::optional<std::uint32_t> below_depth;      // candidate depth must be strictly smaller
  bool require_committed = false;
  std::optional<double> below_dist_to_root;      // candidate estimate must be strictly smaller
  double max_range = 0.0;                        // C
};

/// Nearest committed non-worker neighbor of the current round with known depth.
std::optional<RobotId> select_parent_outwards(const NeighborTable& nbrs,
                                              const SelectionFilter& filter);

/// Non-worker neighbor with the smallest distance-to-root estimate, ties by
/// lowest id. Uncommitted robots qualify unless the filter requires otherwise.
std::optional<RobotId> select_parent_inwards(const NeighborTable& nbrs,
                                             const SelectionFilter& filter);

// ---------------------------------------------------------------------------
// Spare management.

struct NonSpareInputs {
  std::optional<double> d_parent;  // empty for the root
  bool child_in_need = false;
  bool own_edge_claimed = false;   // a spare claims one of this robot's tree edges
  bool parent_awaiting = false;
  bool pulled_outward = true;      // applied target force points away from the parent
};

NeedState nonspare_spare_fsm(NeedState current, const NonSpareInputs& in, const Params& params);

struct SpareDecision {
  SpareFsm fsm;
  std::optional<Vec2> goal;          // edge midpoint (ExtendEdge), own frame
  std::optional<RobotId> reference;  // robot to orbit or approach (AdjustPosition)
  bool insert = false;               // within J of the midpoint: become a connector
  bool claim_lost = false;
};

/// One tick of the spare side. `former_parent` is the preferred reference robot.
SpareDecision spare_step(const SpareFsm& current, RobotId self, const NeighborTable& nbrs,
                         std::uint32_t round, std::optional<RobotId> former_parent,
                         const Params& params);

/// Motion of a spare for a decision, own frame.
Vec2 spare_control(const SpareDecision& d, const NeighborTable& nbrs, const Params& params);

// ---------------------------------------------------------------------------
// Barrier aggregation.

/// A node reports done when its own condition holds and every child has reported
/// done for the same round and barrier.
bool barrier_done(bool own_condition, const std::vector<bool>& children_done);

// ---------------------------------------------------------------------------

struct RobotSensing {
  std::optional<Vec2> target;  // assigned target, own frame (workers only)
  Vec2 odometry;               // position estimate used for dead reckoning
  double heading = 0.0;
};

struct StepEvents {
  std::optional<Barrier> go_emitted;  // root only
  std::optional<Edge> inserted;       // this spare split `inserted`
  bool pruned = false;
  std::optional<RobotId> handoff_to;
  bool became_root = false;
};

struct StepOutput {
  std::vector<Message> outbox;
  ForceBreakdown forces;  // own frame
  StepEvents events;
};

/// One robot: role, FSM, tree links, neighbor table and the collective state.
class Agent {
 public:
  Agent(RobotId id, Role role, AlgorithmVariant variant, Params params, std::uint32_t n_workers);

  StepOutput step(std::uint64_t tick, std::span<const SituatedReception> inbox,
                  const RobotSensing& sensing);

  RobotId id() const { return id_; }
  Role role() const { return role_; }
  FsmState fsm() const { return fsm_; }
  std::uint32_t round() const { return links_.round; }
  const TreeLinks& links() const { return links_; }
  const SpareFsm& spare_fsm() const { return spare_; }
  bool committed() const { return committed_; }
  double dist_to_root() const { return dist_to_root_; }
  const NeighborTable& neighbors() const { return table_; }
  std::optional<Vec2> centroid() const { return centroid_; }
  std::int64_t count_estimate() const { return count_; }
  std::optional<RobotId> awaiting_handoff_ack() const { return awaiting_ack_; }
  std::uint32_t subtree_workers() const { return subtree_workers_; }

 private:
  struct Tick;

  void begin_round(std::uint32_t round, std::uint64_t tick);
  void enter_growth();
  void enter_select_root();
  void apply_go(Barrier b, Tick& t);
  void handle_start_tree(Tick& t);
  void handle_go(Tick& t);
  void handle_handoff(Tick& t);
  void maintain_links(Tick& t);
  void try_attach(Tick& t);
  void commit_to(RobotId parent, std::uint32_t parent_depth, Tick& t);
  void prune(Tick& t);
  void manage_spares(Tick& t);
  void aggregate(Tick& t);
  void barriers(Tick& t);
  void select_root(Tick& t);
  void detach(Tick& t);
  ForceBreakdown motion(Tick& t);

  bool anchored() const;
  bool phase_is(int p) const { return phase_of(fsm_) == p; }
  const HeartbeatMsg* heartbeat_of(RobotId id) const;
  template <typename T>
  const T* report_of(RobotId id) const;

  RobotId id_;
  Role role_;
  AlgorithmVariant variant_;
  Params params_;
  std::uint32_t n_workers_;

  FsmState fsm_ = FsmState::Init;
  TreeLinks links_;
  SpareFsm spare_;
  NeighborTable table_;
  bool committed_ = false;
  bool recruited_ = false;
  double dist_to_root_ = -1.0;
  std::uint64_t round_start_ = 0;
  std::uint32_t last_depth_ = 0;
  std::map<RobotId, std::uint64_t> child_since_;
  std::optional<Vec2> lost_parent_at_;  // odometry coordinates
  std::optional<Vec2> root_at_;         // odometry coordinates, from the last StartTree flood
  std::optional<RobotId> former_parent_;
  std::set<std::pair<std::uint32_t, Barrier>> go_seen_;

  // Collective state.
  std::int64_t count_ = 0;
  bool count_complete_ = false;
  Vec2 q_;
  std::optional<Vec2> centroid_;
  std::uint32_t subtree_workers_ = 0;
  std::uint32_t subtree_arrived_ = 0;
  Vec2 applied_target_force_;
  Vec2 forwarded_target_force_;
  bool arrived_ = false;

  // Root handoff.
  std::optional<RobotId> awaiting_ack_;
  std::optional<RobotId> predecessor_;  // previous root, until heard stepping down
  std::uint64_t handoff_sent_at_ = 0;
  int handoff_attempts_ = 0;
  bool start_pending_ = false;

  // Spare insertion target and control for this tick.
  SpareDecision spare_decision_;
};

}  // namespace swarmtree
