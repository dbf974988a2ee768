#include "swarmtree/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace swarmtree {

RoleAssignment init_roles(std::span<const Vec2> positions, std::span<const Vec2> targets) {
  const std::size_t n = positions.size();
  if (n < targets.size() + 1) {
    throw ConfigError("init_roles: need at least one robot per target plus a root");
  }
  RoleAssignment out;
  out.roles.assign(n, Role::Spare);
  out.worker_target.assign(n, std::nullopt);
  std::vector<bool> taken(n, false);

  auto nearest_free = [&](Vec2 to) {
    std::size_t best = n;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      if (taken[i]) continue;
      const double d = (positions[i] - to).norm();
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    return best;
  };

  for (std::size_t k = 0; k < targets.size(); ++k) {
    const std::size_t w = nearest_free(targets[k]);
    taken[w] = true;
    out.roles[w] = Role::Worker;
    out.worker_target[w] = k;
  }
  Vec2 centroid;
  for (Vec2 p : positions) centroid += p;
  centroid = centroid / static_cast<double>(n);
  const std::size_t r = nearest_free(centroid);
  taken[r] = true;
  out.roles[r] = Role::Root;
  out.root = static_cast<RobotId>(r);
  return out;
}

namespace {

bool passes_common(const NeighborEntry& e, const HeartbeatMsg& hb, const SelectionFilter& f) {
  if (e.round() != f.round) return false;
  if (hb.role == Role::Worker) return false;
  if (e.range() > f.max_range) return false;
  if (f.exclude.contains(e.id())) return false;
  if (f.require_committed && (!hb.committed || hb.depth == 0)) return false;
  if (f.below_depth && (hb.depth == 0 || hb.depth >= *f.below_depth)) return false;
  return true;
}

}  // namespace

std::optional<RobotId> select_parent_outwards(const NeighborTable& nbrs,
                                              const SelectionFilter& filter) {
  std::optional<RobotId> best;
  double best_range = std::numeric_limits<double>::infinity();
  for (const auto& [id, e] : nbrs) {
    const HeartbeatMsg* hb = e.heartbeat();
    if (hb == nullptr || !hb->committed || hb->depth == 0) continue;
    if (!passes_common(e, *hb, filter)) continue;
    if (e.range() < best_range) {
      best_range = e.range();
      best = id;
    }
  }
  return best;
}

std::optional<RobotId> select_parent_inwards(const NeighborTable& nbrs,
                                             const SelectionFilter& filter) {
  std::optional<RobotId> best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (const auto& [id, e] : nbrs) {
    const HeartbeatMsg* hb = e.heartbeat();
    if (hb == nullptr || hb->dist_to_root < 0.0) continue;
    if (!passes_common(e, *hb, filter)) continue;
    if (filter.below_dist_to_root && !(hb->dist_to_root < *filter.below_dist_to_root - 1e-9)) {
      continue;
    }
    // ascending ids: the first of equal estimates wins
    if (hb->dist_to_root < best_dist) {
      best_dist = hb->dist_to_root;
      best = id;
    }
  }
  return best;
}

NeedState nonspare_spare_fsm(NeedState current, const NonSpareInputs& in, const Params& params) {
  switch (current) {
    case NeedState::NoNeed:
      if ((in.d_parent && *in.d_parent > params.E && in.pulled_outward) || in.child_in_need) {
        return NeedState::Need;
      }
      return NeedState::NoNeed;
    case NeedState::Need:
      if (in.own_edge_claimed || in.parent_awaiting) return NeedState::Await;
      return NeedState::Need;
    case NeedState::Await:
      if (!in.own_edge_claimed && !in.parent_awaiting) return NeedState::NoNeed;
      return NeedState::Await;
  }
  return current;
}

namespace {

// Midpoint of (child, parent) in the own frame, if both ends are visible and the
// child still reports that parent, and a need, in this round.
std::optional<Vec2> edge_midpoint(const NeighborTable& nbrs, Edge e, std::uint32_t round) {
  const NeighborEntry* c = nbrs.find(e.child);
  const NeighborEntry* p = nbrs.find(e.parent);
  if (c == nullptr || p == nullptr || c->round() != round) return std::nullopt;
  const HeartbeatMsg* hb = c->heartbeat();
  if (hb == nullptr || hb->parent != e.parent || hb->need == NeedState::NoNeed) return std::nullopt;
  return (c->position() + p->position()) * 0.5;
}

// Steers toward the midpoint from the side, so the body does not sit on the
// edge it is about to split. The offset vanishes at the midpoint.
Vec2 lateral_approach(Vec2 mid, Vec2 child, Vec2 parent, const Params& params) {
  const Vec2 axis = parent - child;
  const double len = axis.norm();
  if (len < 1e-9) return mid;
  const Vec2 along_dir = axis * (1.0 / len);
  Vec2 side{-along_dir.y, along_dir.x};
  const Vec2 self_rel = mid * -1.0;
  if (self_rel.dot(side) < 0.0) side = side * -1.0;
  const double along = std::abs(self_rel.dot(along_dir));
  return mid + side * std::min(along, 4.0 * params.body_radius);
}

bool claimed_by_other(const NeighborTable& nbrs, RobotId self, Edge e, std::uint32_t round,
                      bool lower_id_only) {
  for (const auto& [id, entry] : nbrs) {
    if (id == self || entry.round() != round) continue;
    if (lower_id_only && id > self) continue;
    const SpareClaimMsg* sc = entry.find<SpareClaimMsg>();
    if (sc != nullptr && sc->child == e.child && sc->parent == e.parent) return true;
  }
  return false;
}

std::optional<RobotId> spare_reference(const NeighborTable& nbrs, std::uint32_t round,
                                       std::optional<RobotId> former_parent) {
  auto committed = [&](const NeighborEntry& e) {
    const HeartbeatMsg* hb = e.heartbeat();
    return hb != nullptr && hb->committed && e.round() == round && hb->role != Role::Spare;
  };
  if (former_parent) {
    if (const NeighborEntry* e = nbrs.find(*former_parent); e != nullptr && committed(*e)) {
      return former_parent;
    }
  }
  std::optional<RobotId> best;
  double best_range = std::numeric_limits<double>::infinity();
  for (const auto& [id, e] : nbrs) {
    if (committed(e) && e.range() < best_range) {
      best_range = e.range();
      best = id;
    }
  }
  return best;
}

}  // namespace

SpareDecision spare_step(const SpareFsm& current, RobotId self, const NeighborTable& nbrs,
                         std::uint32_t round, std::optional<RobotId> former_parent,
                         const Params& params) {
  SpareDecision d;
  d.fsm = current;
  // rewiring needs both ends heard in the latest tick
  std::uint64_t latest = 0;
  for (const auto& [id, entry] : nbrs) latest = std::max(latest, entry.received_at());
  auto fresh = [&](Edge e) {
    return nbrs.find(e.child)->received_at() == latest &&
           nbrs.find(e.parent)->received_at() == latest;
  };
  if (current.spare_state == SpareState::ExtendEdge && current.claimed_edge) {
    const Edge e = *current.claimed_edge;
    const auto mid = edge_midpoint(nbrs, e, round);
    if (mid && !claimed_by_other(nbrs, self, e, round, true)) {
      d.goal = lateral_approach(*mid, nbrs.find(e.child)->position(),
                                nbrs.find(e.parent)->position(), params);
      d.insert = mid->norm() <= params.J && fresh(e);
      return d;
    }
    d.claim_lost = true;
  }

  std::optional<Edge> best;
  Vec2 best_mid;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& [id, entry] : nbrs) {
    if (entry.round() != round) continue;
    const NeedEdgeMsg* ne = entry.find<NeedEdgeMsg>();
    if (ne == nullptr || ne->parent == self) continue;
    const Edge e{id, ne->parent};
    const auto mid = edge_midpoint(nbrs, e, round);
    if (!mid || claimed_by_other(nbrs, self, e, round, false)) continue;
    // map order: the first of equal distances has the lowest child id
    if (mid->norm() < best_d) {
      best_d = mid->norm();
      best = e;
      best_mid = *mid;
    }
  }
  if (best) {
    d.fsm.spare_state = SpareState::ExtendEdge;
    d.fsm.claimed_edge = best;
    d.goal = best_mid;
    d.insert = best_d <= params.J && fresh(*best);
    return d;
  }
  d.fsm.spare_state = SpareState::AdjustPosition;
  d.fsm.claimed_edge.reset();
  d.reference = spare_reference(nbrs, round, former_parent);
  return d;
}

Vec2 spare_control(const SpareDecision& d, const NeighborTable& nbrs, const Params& params) {
  if (d.goal) return (*d.goal * params.spare_gain).clamped(params.u_max);
  if (!d.reference) return {};
  const NeighborEntry* e = nbrs.find(*d.reference);
  if (e == nullptr) return {};
  const Vec2 rel = e->position();
  const double dist = rel.norm();
  if (dist <= params.S) {
    if (dist < 1e-9) return {};
    return Vec2{-rel.y, rel.x} * (params.tau / dist);
  }
  return (rel * params.spare_gain).clamped(params.u_max);
}

bool barrier_done(bool own_condition, const std::vector<bool>& children_done) {
  return own_condition && std::ranges::all_of(children_done, [](bool b) { return b; });
}

// ---------------------------------------------------------------------------

struct Agent::Tick {
  std::uint64_t now = 0;
  std::span<const SituatedReception> inbox;
  const RobotSensing* sensing = nullptr;
  StepOutput out;
};

Agent::Agent(RobotId id, Role role, AlgorithmVariant variant, Params params,
             std::uint32_t n_workers)
    : id_(id), role_(role), variant_(variant), params_(params), n_workers_(n_workers) {
  params_.validate();
}

// The old tree, or a new parent whose chain reached the root once the parent
// barrier released.
bool Agent::anchored() const {
  if (links_.old_parent) return true;
  return links_.new_parent && links_.depth > 0 && phase_of(fsm_) >= 2;
}

const HeartbeatMsg* Agent::heartbeat_of(RobotId id) const {
  const NeighborEntry* e = table_.find(id);
  return e == nullptr ? nullptr : e->heartbeat();
}

template <typename T>
const T* Agent::report_of(RobotId id) const {
  const NeighborEntry* e = table_.find(id);
  if (e == nullptr || e->round() != links_.round) return nullptr;
  return e->find<T>();
}

namespace {
void emit(std::vector<Message>& out, RobotId id, std::uint32_t round, Payload p) {
  out.push_back(Message{id, round, std::move(p)});
}
}  // namespace

StepOutput Agent::step(std::uint64_t tick, std::span<const SituatedReception> inbox,
                       const RobotSensing& sensing) {
  Tick t;
  t.now = tick;
  t.inbox = inbox;
  t.sensing = &sensing;

  table_.ingest(inbox);
  table_.expire(tick, params_);
  arrived_ = role_ == Role::Worker && sensing.target &&
             sensing.target->norm() <= params_.target_reach;

  if (fsm_ == FsmState::Init && role_ == Role::Root) fsm_ = FsmState::StartTree;
  handle_start_tree(t);
  if (role_ == Role::Root && fsm_ == FsmState::StartTree) {
    begin_round(links_.round + 1, tick);
    committed_ = true;
    links_.depth = 1;
    last_depth_ = 1;
    dist_to_root_ = 0.0;
    fsm_ = FsmState::WaitParentBarrier;
    emit(t.out.outbox, id_, links_.round, StartTreeMsg{0.0, {}});
  }
  handle_go(t);
  handle_handoff(t);
  maintain_links(t);
  try_attach(t);
  prune(t);
  manage_spares(t);
  aggregate(t);
  barriers(t);
  select_root(t);

  HeartbeatMsg hb;
  hb.role = role_;
  hb.fsm = fsm_;
  hb.parent = links_.new_parent;
  hb.old_parent = links_.old_parent;
  hb.depth = links_.depth;
  hb.committed = committed_;
  hb.need = spare_.nonspare_state;
  hb.spare = spare_.spare_state;
  hb.dist_to_root = dist_to_root_;
  hb.arrived = arrived_;
  emit(t.out.outbox, id_, links_.round, hb);

  t.out.forces = motion(t);
  return std::move(t.out);
}

void Agent::begin_round(std::uint32_t round, std::uint64_t tick) {
  links_.round = round;
  round_start_ = tick;
  links_.old_parent = links_.new_parent;
  links_.old_children = links_.children;
  links_.new_parent.reset();
  links_.children.clear();
  links_.depth = 0;
  links_.useful = false;
  child_since_.clear();
  committed_ = false;
  recruited_ = false;
  dist_to_root_ = -1.0;
  last_depth_ = 0;
  lost_parent_at_.reset();
  spare_ = {};
  spare_decision_ = {};
  count_ = 0;
  count_complete_ = false;
  q_ = {};
  centroid_.reset();
  subtree_workers_ = 0;
  subtree_arrived_ = 0;
  awaiting_ack_.reset();
  predecessor_.reset();
  handoff_attempts_ = 0;
  std::erase_if(go_seen_, [&](const auto& k) { return k.first < round; });
  if (role_ != Role::Root) fsm_ = FsmState::SelectParent;
}

void Agent::enter_growth() {
  fsm_ = FsmState::GrowTree;
  links_.old_parent.reset();
  links_.old_children.clear();
  if (!committed_ && role_ == Role::Connector && links_.children.empty()) role_ = Role::Spare;
  spare_ = {};
}

void Agent::enter_select_root() {
  fsm_ = role_ == Role::Root ? FsmState::SelectRoot : FsmState::WaitRootBarrier;
  spare_ = {};
  awaiting_ack_.reset();
  handoff_attempts_ = 0;
}

void Agent::apply_go(Barrier b, Tick& t) {
  if (!go_seen_.insert({links_.round, b}).second) return;
  emit(t.out.outbox, id_, links_.round, GoMsg{b});
  const int target = static_cast<int>(b) + 2;  // phase entered by this Go
  if (phase_of(fsm_) < 2 && target >= 2) enter_growth();
  if (phase_of(fsm_) < 3 && target >= 3) enter_select_root();
  if (phase_of(fsm_) < 4 && target >= 4) fsm_ = FsmState::StartTree;
}

void Agent::handle_start_tree(Tick& t) {
  const RobotSensing& s = *t.sensing;
  bool improved = false;
  auto adopt = [&](const SituatedReception& rec, const StartTreeMsg& st) {
    dist_to_root_ = st.dist_to_root + rec.range;
    const Vec2 local = to_local_frame(rec) + sender_to_receiver(st.root_vec, rec);
    root_at_ = s.odometry + local.rotated(s.heading);
    improved = true;
  };
  for (const auto& rec : t.inbox) {
    const StartTreeMsg* st = rec.msg.as<StartTreeMsg>();
    if (st == nullptr) continue;
    const double est = st->dist_to_root + rec.range;
    if (rec.msg.round > links_.round) {
      if (role_ == Role::Root) role_ = Role::Connector;
      begin_round(rec.msg.round, t.now);
      adopt(rec, *st);
    } else if (rec.msg.round == links_.round && role_ != Role::Root &&
               (dist_to_root_ < 0.0 || est < dist_to_root_ - 1e-9)) {
      adopt(rec, *st);
    }
  }
  if (role_ == Role::Root) root_at_ = s.odometry;
  if (improved && role_ != Role::Worker) {
    const Vec2 root_vec = (*root_at_ - s.odometry).rotated(-s.heading);
    emit(t.out.outbox, id_, links_.round, StartTreeMsg{dist_to_root_, root_vec});
  }
}

void Agent::handle_go(Tick& t) {
  for (const auto& rec : t.inbox) {
    const GoMsg* go = rec.msg.as<GoMsg>();
    if (go != nullptr && rec.msg.round == links_.round && links_.round > 0) apply_go(go->barrier, t);
  }
  // A neighbor already past a barrier of this round implies its Go was missed.
  const int mine = phase_of(fsm_);
  if (mine < 1) return;
  int ahead = mine;
  for (const auto& [id, e] : table_) {
    const HeartbeatMsg* hb = e.heartbeat();
    if (hb != nullptr && e.round() == links_.round && e.received_at() == t.now) {
      ahead = std::max(ahead, phase_of(hb->fsm));
    }
  }
  for (int p = mine + 1; p <= ahead; ++p) apply_go(static_cast<Barrier>(p - 2), t);
}

void Agent::handle_handoff(Tick& t) {
  for (const auto& rec : t.inbox) {
    if (rec.msg.round != links_.round) continue;
    if (const auto* h = rec.msg.as<RootHandoffMsg>(); h != nullptr && h->new_root == id_) {
      centroid_ = reexpress_centroid(h->centroid, rec);
      emit(t.out.outbox, id_, links_.round, HandoffAckMsg{rec.msg.sender});
      role_ = Role::Root;
      links_.new_parent.reset();
      links_.children.insert(rec.msg.sender);
      child_since_[rec.msg.sender] = t.now;
      committed_ = true;
      links_.depth = 1;
      last_depth_ = 1;
      dist_to_root_ = 0.0;
      lost_parent_at_.reset();
      fsm_ = FsmState::SelectRoot;
      spare_ = {};
      awaiting_ack_.reset();
      handoff_attempts_ = 0;
      predecessor_ = rec.msg.sender;
      t.out.events.became_root = true;
    }
    // the successor's own heartbeat as root confirms the handoff when the ack is lost
    const auto* a = rec.msg.as<HandoffAckMsg>();
    const auto* hb = rec.msg.as<HeartbeatMsg>();
    const bool acked = (a != nullptr && a->old_root == id_) || (hb != nullptr && hb->role == Role::Root);
    if (acked && role_ == Role::Root && awaiting_ack_ == rec.msg.sender) {
      role_ = Role::Connector;
      links_.new_parent = rec.msg.sender;
      links_.children.erase(rec.msg.sender);
      child_since_.erase(rec.msg.sender);
      committed_ = true;
      links_.depth = 2;
      fsm_ = FsmState::WaitRootBarrier;
      awaiting_ack_.reset();
      centroid_.reset();
      dist_to_root_ = -1.0;
    }
  }
}

void Agent::detach(Tick& t) {
  (void)t;
  former_parent_ = links_.new_parent;
  links_.new_parent.reset();
  committed_ = false;
  links_.depth = 0;
}

void Agent::maintain_links(Tick& t) {
  const std::uint32_t round = links_.round;
  for (const auto& rec : t.inbox) {
    if (rec.msg.round != round) continue;
    const RobotId s = rec.msg.sender;
    const ParentClaimMsg* pc = rec.msg.as<ParentClaimMsg>();
    const HeartbeatMsg* hb = rec.msg.as<HeartbeatMsg>();
    // a heartbeat naming this robot stands in for a claim lost to occlusion
    const bool claims_me = (pc != nullptr && pc->parent == id_) ||
                           (hb != nullptr && hb->committed && hb->parent == id_ &&
                            role_ != Role::Spare);
    if (claims_me || pc != nullptr) {
      if (claims_me) {
        links_.children.insert(s);
        child_since_.try_emplace(s, t.now);
        if (!committed_ && role_ != Role::Root && role_ != Role::Worker) recruited_ = true;
        if (role_ == Role::Spare) {
          role_ = Role::Connector;
          spare_ = {};
        }
      } else {
        links_.children.erase(s);
        child_since_.erase(s);
      }
    }
    if (const auto* ca = rec.msg.as<ChildAckMsg>();
        ca != nullptr && ca->child == id_ && links_.new_parent == ca->old_parent) {
      links_.new_parent = s;
      emit(t.out.outbox, id_, round, ParentClaimMsg{s});
    }
  }

  const auto grace = [&](RobotId c) {
    auto it = child_since_.find(c);
    return it != child_since_.end() && t.now - it->second <= 2;
  };
  std::erase_if(links_.children, [&](RobotId c) {
    const NeighborEntry* e = table_.find(c);
    bool keep = false;
    if (e != nullptr) {
      const HeartbeatMsg* hb = e->heartbeat();
      keep = (hb != nullptr && e->round() == round && hb->parent == id_) || grace(c);
    }
    if (!keep) child_since_.erase(c);
    return !keep;
  });
  std::erase_if(links_.old_children, [&](RobotId c) {
    const NeighborEntry* e = table_.find(c);
    if (e == nullptr) return true;
    const HeartbeatMsg* hb = e->heartbeat();
    return hb != nullptr && hb->parent != id_ && hb->old_parent != id_;
  });
  if (links_.old_parent && !table_.contains(*links_.old_parent)) links_.old_parent.reset();

  if (role_ == Role::Root) {
    committed_ = true;
    links_.depth = 1;
    return;
  }
  if (links_.new_parent) {
    const NeighborEntry* pe = table_.find(*links_.new_parent);
    const HeartbeatMsg* phb = pe == nullptr ? nullptr : pe->heartbeat();
    const bool parent_gave_up = phb != nullptr && pe->round() == round && !phb->committed &&
                                phb->role == Role::Spare;
    if (pe == nullptr || parent_gave_up) {
      detach(t);
    } else {
      if (pe->received_at() == t.now) {
        lost_parent_at_ = t.sensing->odometry + pe->position().rotated(t.sensing->heading);
      }
      committed_ = true;
      links_.depth = (phb != nullptr && pe->round() == round && phb->depth > 0) ? phb->depth + 1 : 0;
      if (links_.depth > 0) last_depth_ = links_.depth;
      return;
    }
  }
  committed_ = false;
  links_.depth = 0;
}

void Agent::commit_to(RobotId parent, std::uint32_t parent_depth, Tick& t) {
  links_.new_parent = parent;
  committed_ = true;
  links_.depth = parent_depth > 0 ? parent_depth + 1 : 0;
  if (links_.depth > 0) last_depth_ = links_.depth;
  if (role_ == Role::Spare) role_ = Role::Connector;
  if (const NeighborEntry* e = table_.find(parent)) {
    lost_parent_at_ = t.sensing->odometry + e->position().rotated(t.sensing->heading);
  }
  spare_ = {};
  emit(t.out.outbox, id_, links_.round, ParentClaimMsg{parent});
  if (fsm_ == FsmState::SelectParent) fsm_ = FsmState::WaitParentBarrier;
}

void Agent::try_attach(Tick& t) {
  if (role_ == Role::Root || committed_ || links_.round == 0) return;
  const int phase = phase_of(fsm_);
  if (phase == 0) return;
  const bool has_children = !links_.children.empty();
  bool eligible = false;
  if (variant_ == AlgorithmVariant::Outwards) {
    eligible = phase == 1 || role_ == Role::Worker || has_children;
  } else {
    eligible = role_ == Role::Worker || recruited_ || has_children;
  }
  if (!eligible) return;

  SelectionFilter f;
  f.round = links_.round;
  f.exclude = links_.children;
  f.exclude.insert(id_);
  f.max_range = params_.C;
  if (last_depth_ > 0) {
    // workers are never parents, so they cannot close a cycle
    if (role_ != Role::Worker) f.below_depth = last_depth_;
    f.require_committed = true;
  }
  std::optional<RobotId> cand;
  if (variant_ == AlgorithmVariant::Outwards) {
    cand = select_parent_outwards(table_, f);
  } else {
    if (!f.require_committed && role_ != Role::Worker) {
      if (dist_to_root_ < 0.0) return;
      f.below_dist_to_root = dist_to_root_;
    }
    cand = select_parent_inwards(table_, f);
  }
  if (!cand) return;
  const HeartbeatMsg* hb = heartbeat_of(*cand);
  commit_to(*cand, hb != nullptr ? hb->depth : 0, t);
}

void Agent::prune(Tick& t) {
  if (role_ != Role::Connector || !committed_ || !links_.children.empty()) return;
  if (variant_ == AlgorithmVariant::Outwards && phase_of(fsm_) < 2) return;
  // a fresh connector waits for its claimed child to show up
  if (t.now - round_start_ <= 2 && phase_of(fsm_) < 2) return;
  former_parent_ = links_.new_parent;
  role_ = Role::Spare;
  links_.new_parent.reset();
  committed_ = false;
  links_.depth = 0;
  last_depth_ = 0;
  lost_parent_at_.reset();
  spare_ = {};
  t.out.events.pruned = true;
}

void Agent::manage_spares(Tick& t) {
  const std::uint32_t round = links_.round;
  if (!phase_is(2)) {
    spare_.nonspare_state = NeedState::NoNeed;
    if (role_ == Role::Spare) {
      spare_decision_ = {};
      spare_decision_.reference = spare_reference(table_, round, former_parent_);
    }
    return;
  }
  if (role_ == Role::Spare) {
    SpareDecision d = spare_step(spare_, id_, table_, round, former_parent_, params_);
    spare_ = d.fsm;
    if (d.insert && spare_.claimed_edge) {
      const Edge e = *spare_.claimed_edge;
      role_ = Role::Connector;
      links_.new_parent = e.parent;
      links_.children = {e.child};
      child_since_[e.child] = t.now;
      committed_ = true;
      const HeartbeatMsg* phb = heartbeat_of(e.parent);
      links_.depth = phb != nullptr && phb->depth > 0 ? phb->depth + 1 : 0;
      if (links_.depth > 0) last_depth_ = links_.depth;
      if (const NeighborEntry* pe = table_.find(e.parent)) {
        lost_parent_at_ = t.sensing->odometry + pe->position().rotated(t.sensing->heading);
      }
      emit(t.out.outbox, id_, round, ParentClaimMsg{e.parent});
      emit(t.out.outbox, id_, round, ChildAckMsg{e.child, e.parent});
      spare_ = {};
      spare_decision_ = {};
      t.out.events.inserted = e;
      return;
    }
    if (spare_.spare_state == SpareState::ExtendEdge && spare_.claimed_edge) {
      emit(t.out.outbox, id_, round,
           SpareClaimMsg{spare_.claimed_edge->child, spare_.claimed_edge->parent});
    }
    spare_decision_ = d;
    return;
  }
  if (!committed_) {
    spare_.nonspare_state = NeedState::NoNeed;
    return;
  }

  NonSpareInputs in;
  const NeighborEntry* pe = links_.new_parent ? table_.find(*links_.new_parent) : nullptr;
  if (pe != nullptr) {
    in.d_parent = pe->range();
    in.pulled_outward = applied_target_force_.dot(pe->position()) < 0.0;
    const HeartbeatMsg* phb = pe->heartbeat();
    in.parent_awaiting = phb != nullptr && pe->round() == round && phb->need == NeedState::Await;
  }
  for (RobotId c : links_.children) {
    const HeartbeatMsg* hb = heartbeat_of(c);
    if (hb != nullptr && hb->need == NeedState::Need) in.child_in_need = true;
  }
  for (const auto& [id, e] : table_) {
    if (e.round() != round) continue;
    const SpareClaimMsg* sc = e.find<SpareClaimMsg>();
    if (sc == nullptr) continue;
    if ((sc->child == id_ && links_.new_parent == sc->parent) ||
        (sc->parent == id_ && links_.children.contains(sc->child))) {
      in.own_edge_claimed = true;
    }
  }
  spare_.nonspare_state = nonspare_spare_fsm(spare_.nonspare_state, in, params_);
  if (spare_.nonspare_state == NeedState::Need && pe != nullptr) {
    emit(t.out.outbox, id_, round, NeedEdgeMsg{*links_.new_parent, pe->position()});
  }
}

void Agent::aggregate(Tick& t) {
  const std::uint32_t round = links_.round;
  std::uint32_t workers = role_ == Role::Worker ? 1 : 0;
  std::uint32_t arrived = role_ == Role::Worker && arrived_ ? 1 : 0;
  CountState cs;
  cs.depth = std::max<std::uint32_t>(links_.depth, 1);
  CentroidState ce;
  bool complete = links_.depth > 0;
  Vec2 child_force;

  for (RobotId c : links_.children) {
    const NeighborEntry* e = table_.find(c);
    if (e == nullptr || e->round() != round) {
      complete = false;
      continue;
    }
    if (const auto* wf = e->find<WorkerFlagMsg>()) {
      workers += wf->workers;
      arrived += wf->arrived;
    }
    const auto* cr = e->find<CountReportMsg>();
    const auto* qr = e->find<CentroidReportMsg>();
    if (cr != nullptr && cr->complete && qr != nullptr && qr->complete) {
      cs.child_reports[c] = cr->count;
      ce.child_q[c] = ChildCentroid{qr->q, e->latest.rel_orientation};
    } else {
      complete = false;
    }
    if (const auto* tf = e->find<TargetForceMsg>()) {
      child_force += sender_to_receiver(tf->force, e->latest);
    }
  }
  if (role_ != Role::Root) {
    const NeighborEntry* pe = links_.new_parent ? table_.find(*links_.new_parent) : nullptr;
    if (pe != nullptr) {
      ce.p_parent = pe->position();
    } else {
      complete = false;
    }
  }
  subtree_workers_ = workers;
  subtree_arrived_ = arrived;
  links_.useful = workers > 0;

  if (role_ == Role::Worker) {
    const Vec2 own = anchored() && t.sensing->target ? target_force(*t.sensing->target, params_)
                                                     : Vec2{};
    applied_target_force_ = own;
    forwarded_target_force_ = own;
  } else if (role_ != Role::Connector) {
    applied_target_force_ = {};
    forwarded_target_force_ = {};
  } else {
    forwarded_target_force_ = child_force;
    applied_target_force_ = anchored() ? child_force : Vec2{};
  }

  if (!committed_) return;
  if (ce.p_parent || role_ == Role::Root) {
    count_ = count_step(cs);
    q_ = centroid_step(ce, cs);
    count_complete_ = complete;
    if (role_ == Role::Root && complete && fsm_ != FsmState::SelectRoot) centroid_ = q_;
  }
  emit(t.out.outbox, id_, round, WorkerFlagMsg{workers, arrived});
  emit(t.out.outbox, id_, round, CountReportMsg{count_, count_complete_});
  emit(t.out.outbox, id_, round, CentroidReportMsg{q_, count_complete_});
  if (forwarded_target_force_.norm() > 0.0) {
    emit(t.out.outbox, id_, round, TargetForceMsg{forwarded_target_force_});
  }
}

void Agent::barriers(Tick& t) {
  if (!committed_) return;
  const std::uint32_t round = links_.round;
  const int phase = phase_of(fsm_);
  auto children_done = [&](Barrier b) {
    std::vector<bool> done;
    for (RobotId c : links_.children) {
      const auto* bd = report_of<BarrierDoneMsg>(c);
      done.push_back(bd != nullptr && bd->barrier == b);
    }
    return done;
  };
  const auto elapsed = static_cast<std::int64_t>(t.now - round_start_);

  if (phase == 1) {
    bool own = links_.depth > 0;
    if (variant_ == AlgorithmVariant::Outwards) {
      for (const auto& [id, e] : table_) {
        const HeartbeatMsg* hb = e.heartbeat();
        if (hb == nullptr || e.round() != round || !hb->committed) own = false;
      }
    }
    const auto cd = children_done(Barrier::Parent);
    const bool done = barrier_done(own, cd);
    if (role_ == Role::Root) {
      if (done && subtree_workers_ >= n_workers_) {
        t.out.events.go_emitted = Barrier::Parent;
        apply_go(Barrier::Parent, t);
      }
    } else if (done) {
      fsm_ = FsmState::WaitParentBarrier;
      emit(t.out.outbox, id_, round, BarrierDoneMsg{Barrier::Parent});
    }
  } else if (phase == 2) {
    const bool timed_out = elapsed >= params_.ticks_for(params_.R);
    bool own = timed_out;
    if (role_ == Role::Root) {
      own = own || (subtree_workers_ >= n_workers_ && subtree_arrived_ >= n_workers_);
    } else if (role_ == Role::Worker) {
      own = own || arrived_;
    } else {
      own = own || (subtree_workers_ > 0 && subtree_arrived_ == subtree_workers_);
    }
    const auto cd = children_done(Barrier::Growth);
    if (!barrier_done(own, cd)) return;
    if (role_ == Role::Root) {
      t.out.events.go_emitted = Barrier::Growth;
      apply_go(Barrier::Growth, t);
    } else {
      fsm_ = FsmState::WaitGrowthBarrier;
      emit(t.out.outbox, id_, round, BarrierDoneMsg{Barrier::Growth});
    }
  }
}

void Agent::select_root(Tick& t) {
  if (role_ != Role::Root || fsm_ != FsmState::SelectRoot) return;
  const std::uint32_t round = links_.round;
  if (predecessor_) {
    // one handoff at a time: wait until the previous root is heard stepping down
    const NeighborEntry* e = table_.find(*predecessor_);
    const HeartbeatMsg* hb = e == nullptr ? nullptr : e->heartbeat();
    if (hb == nullptr || e->received_at() != t.now || e->round() != round || hb->role == Role::Root) {
      return;
    }
    predecessor_.reset();
  }
  if (awaiting_ack_) {
    if (static_cast<std::int64_t>(t.now - handoff_sent_at_) <= params_.liveness_ticks()) return;
    if (handoff_attempts_ < 3 && table_.contains(*awaiting_ack_) && centroid_) {
      emit(t.out.outbox, id_, round, RootHandoffMsg{*awaiting_ack_, *centroid_});
      handoff_sent_at_ = t.now;
      ++handoff_attempts_;
      return;
    }
    awaiting_ack_.reset();
  } else if (centroid_ && handoff_attempts_ == 0) {
    std::vector<HandoffCandidate> cands;
    for (const auto& [id, e] : table_) {
      const HeartbeatMsg* hb = e.heartbeat();
      if (hb != nullptr && e.round() == round && hb->committed && hb->role == Role::Connector &&
          e.received_at() == t.now) {
        cands.push_back({id, e.position()});
      }
    }
    if (auto next = choose_handoff(*centroid_, cands, params_.handoff_hysteresis)) {
      emit(t.out.outbox, id_, round, RootHandoffMsg{*next, *centroid_});
      awaiting_ack_ = next;
      handoff_sent_at_ = t.now;
      handoff_attempts_ = 1;
      t.out.events.handoff_to = next;
      return;
    }
  }
  t.out.events.go_emitted = Barrier::Root;
  apply_go(Barrier::Root, t);
}

ForceBreakdown Agent::motion(Tick& t) {
  MotionInputs in;
  std::vector<RobotId> kin;
  auto vec_to = [&](RobotId id) -> std::optional<Vec2> {
    const NeighborEntry* e = table_.find(id);
    if (e == nullptr) return std::nullopt;
    return e->position();
  };

  if (links_.new_parent) {
    kin.push_back(*links_.new_parent);
    if (auto v = vec_to(*links_.new_parent)) {
      in.parents.push_back(*v);
      in.u_tree_new += tree_force_vec(*v, params_);
    }
  } else if (role_ != Role::Spare && role_ != Role::Root && !committed_) {
    // head for the lost parent; within E of the spot it would have been heard
    if (lost_parent_at_ && (*lost_parent_at_ - t.sensing->odometry).norm() <= params_.E) {
      lost_parent_at_.reset();
    }
    if (lost_parent_at_) {
      in.parents.push_back((*lost_parent_at_ - t.sensing->odometry).rotated(-t.sensing->heading));
    } else if (last_depth_ > 0 ||
               static_cast<std::int64_t>(t.now - round_start_) > params_.liveness_ticks()) {
      // walk down the distance-to-root gradient; the stored root position goes
      // stale once the root migrates
      std::optional<Vec2> downhill;
      double best = dist_to_root_ >= 0.0 ? dist_to_root_ : std::numeric_limits<double>::infinity();
      for (const auto& [nid, e] : table_) {
        const HeartbeatMsg* hb = e.heartbeat();
        if (hb == nullptr || e.round() != links_.round || hb->dist_to_root < 0.0) continue;
        if (hb->dist_to_root < best) {
          best = hb->dist_to_root;
          downhill = e.position();
        }
      }
      if (downhill) {
        if (downhill->norm() > params_.A_avoid) in.u_target = *downhill * (params_.tau / downhill->norm());
      } else if (root_at_) {
        const Vec2 home = (*root_at_ - t.sensing->odometry).rotated(-t.sensing->heading);
        if (home.norm() > params_.S) in.u_target = home * (params_.tau / home.norm());
      }
    }
  }
  if (links_.old_parent) {
    kin.push_back(*links_.old_parent);
    if (auto v = vec_to(*links_.old_parent)) {
      in.parents.push_back(*v);
      in.u_tree_old += tree_force_vec(*v, params_);
    }
  }
  for (RobotId c : links_.children) {
    kin.push_back(c);
    if (params_.mirror_tree_force) {
      if (auto v = vec_to(c)) in.u_tree_new += tree_force_vec(*v, params_);
    }
  }
  for (RobotId c : links_.old_children) {
    kin.push_back(c);
    if (params_.mirror_tree_force) {
      if (auto v = vec_to(c)) in.u_tree_old += tree_force_vec(*v, params_);
    }
  }
  in.u_target += applied_target_force_;
  in.u_avoid = avoid_force(table_, kin, params_);
  if (role_ == Role::Spare) {
    in.u_spare = spare_control(spare_decision_, table_, params_);
    if (!spare_decision_.goal && !spare_decision_.reference && root_at_) {
      // nobody to follow: fall back toward the root
      const Vec2 home = (*root_at_ - t.sensing->odometry).rotated(-t.sensing->heading);
      if (home.norm() > params_.S) in.u_spare = (home * params_.spare_gain).clamped(params_.u_max);
    }
    // the body occludes any link it sits on; cross within the liveness window
    std::vector<Segment> edges;
    for (const auto& [nid, e] : table_) {
      const HeartbeatMsg* hb = e.heartbeat();
      if (hb == nullptr || e.round() != links_.round) continue;
      for (const auto& p : {hb->parent, hb->old_parent}) {
        if (!p) continue;
        const NeighborEntry* pe = table_.find(*p);
        if (pe == nullptr) continue;
        if (spare_.claimed_edge && *spare_.claimed_edge == Edge{nid, *p}) continue;
        edges.push_back({e.position(), pe->position()});
      }
    }
    in.u_spare += edge_crossing_force(edges, in.u_spare, params_);
  }
  return compose(in, params_);
}

}  // namespace swarmtree
