#include <doctest.h>

#include "oracles.hpp"
#include "swarmtree/protocol.hpp"

using namespace swarmtree;

namespace {

struct Heard {
  RobotId id;
  Vec2 at;
  HeartbeatMsg hb;
  std::vector<Payload> extra{};
  std::uint32_t round = 1;
  std::uint64_t tick = 10;
};

NeighborTable table(const std::vector<Heard>& hs) {
  std::vector<SituatedReception> in;
  for (const auto& h : hs) {
    in.push_back(oracle::seen_from(h.at, 0.0, {0, 0}, 0.0, Message{h.id, h.round, h.hb}, h.tick));
    for (const auto& p : h.extra) {
      in.push_back(oracle::seen_from(h.at, 0.0, {0, 0}, 0.0, Message{h.id, h.round, p}, h.tick));
    }
  }
  NeighborTable t;
  t.ingest(in);
  return t;
}

HeartbeatMsg beat(Role role, bool committed, std::uint32_t depth, double dist = -1.0) {
  HeartbeatMsg h;
  h.role = role;
  h.committed = committed;
  h.depth = depth;
  h.dist_to_root = dist;
  return h;
}

}  // namespace

TEST_CASE("roles: nearest to each target, then nearest to the centroid") {
  std::vector<Vec2> pos{{0, 0}, {1, 0}, {-1, 0}, {0, 1}, {0.1, 0.1}};
  std::vector<Vec2> tgt{{5, 0}, {-5, 0}};
  const auto r = init_roles(pos, tgt);
  CHECK(r.roles[1] == Role::Worker);
  CHECK(r.worker_target[1] == 0u);
  CHECK(r.roles[2] == Role::Worker);
  CHECK(r.worker_target[2] == 1u);
  // centroid (0.02, 0.22)
  CHECK(r.root == 4);
  CHECK(r.roles[4] == Role::Root);
  CHECK(r.roles[0] == Role::Spare);
  CHECK(r.roles[3] == Role::Spare);
  std::vector<Vec2> tied{{1, 0}, {1, 0}, {0, 0}};
  std::vector<Vec2> one{{3, 0}};
  CHECK(init_roles(tied, one).roles[0] == Role::Worker);
  CHECK_THROWS_AS(init_roles(std::vector<Vec2>{{0, 0}}, one), ConfigError);
}

TEST_CASE("outwards parent: nearest committed non-worker with a depth") {
  const auto t = table({{1, {1.0, 0}, beat(Role::Connector, true, 3)},
                        {2, {0.5, 0}, beat(Role::Worker, true, 2)},
                        {3, {0.7, 0}, beat(Role::Spare, false, 0)},
                        {4, {1.2, 0}, beat(Role::Root, true, 1)},
                        {5, {0.2, 0}, beat(Role::Connector, true, 2), {}, 0}});
  SelectionFilter f;
  f.round = 1;
  f.max_range = 2.5;
  CHECK(select_parent_outwards(t, f) == 1u);
  f.exclude = {1};
  CHECK(select_parent_outwards(t, f) == 4u);
  f.max_range = 1.1;
  CHECK_FALSE(select_parent_outwards(t, f).has_value());
}

TEST_CASE("inwards parent: smallest distance estimate, ties by lowest id") {
  const auto t = table({{7, {1.0, 0}, beat(Role::Spare, false, 0, 2.0)},
                        {3, {2.0, 0}, beat(Role::Connector, true, 2, 2.0)},
                        {9, {0.4, 0}, beat(Role::Spare, false, 0, 2.5)},
                        {2, {0.3, 0}, beat(Role::Worker, true, 0, 0.5)}});
  SelectionFilter f;
  f.round = 1;
  f.max_range = 2.5;
  CHECK(select_parent_inwards(t, f) == 3u);
  f.require_committed = true;
  CHECK(select_parent_inwards(t, f) == 3u);
  f.require_committed = false;
  f.below_dist_to_root = 2.0;
  CHECK_FALSE(select_parent_inwards(t, f).has_value());
  f.below_dist_to_root = 2.6;
  f.exclude = {3};
  CHECK(select_parent_inwards(t, f) == 7u);
}

TEST_CASE("non-spare need machine") {
  const Params p = default_params(AlgorithmVariant::Inwards);
  NonSpareInputs in;
  in.d_parent = p.E - 0.01;
  CHECK(nonspare_spare_fsm(NeedState::NoNeed, in, p) == NeedState::NoNeed);
  in.d_parent = p.E + 0.01;
  CHECK(nonspare_spare_fsm(NeedState::NoNeed, in, p) == NeedState::Need);
  in.pulled_outward = false;
  CHECK(nonspare_spare_fsm(NeedState::NoNeed, in, p) == NeedState::NoNeed);
  in.child_in_need = true;
  CHECK(nonspare_spare_fsm(NeedState::NoNeed, in, p) == NeedState::Need);

  NonSpareInputs quiet;
  CHECK(nonspare_spare_fsm(NeedState::Need, quiet, p) == NeedState::Need);
  quiet.own_edge_claimed = true;
  CHECK(nonspare_spare_fsm(NeedState::Need, quiet, p) == NeedState::Await);
  CHECK(nonspare_spare_fsm(NeedState::Await, quiet, p) == NeedState::Await);
  quiet.own_edge_claimed = false;
  quiet.parent_awaiting = true;
  CHECK(nonspare_spare_fsm(NeedState::Need, quiet, p) == NeedState::Await);
  quiet.parent_awaiting = false;
  CHECK(nonspare_spare_fsm(NeedState::Await, quiet, p) == NeedState::NoNeed);
}

TEST_CASE("spare claims the nearest advertised edge") {
  const Params p = default_params(AlgorithmVariant::Inwards);
  HeartbeatMsg child = beat(Role::Worker, true, 3);
  child.parent = 4;
  child.need = NeedState::Need;
  HeartbeatMsg far_child = child;
  far_child.parent = 6;
  const auto t = table({{1, {1.0, 1.5}, child, {NeedEdgeMsg{4, {}}}},
                        {4, {1.0, -0.5}, beat(Role::Connector, true, 2)},
                        {5, {3.0, 1.0}, far_child, {NeedEdgeMsg{6, {}}}},
                        {6, {3.0, -1.0}, beat(Role::Root, true, 1)}});
  const auto d = spare_step({}, 20, t, 1, std::nullopt, p);
  CHECK(d.fsm.spare_state == SpareState::ExtendEdge);
  REQUIRE(d.fsm.claimed_edge.has_value());
  CHECK(*d.fsm.claimed_edge == Edge{1, 4});
  REQUIRE(d.goal.has_value());
  CHECK(d.goal->x == doctest::Approx(1.0));
  CHECK(d.goal->y == doctest::Approx(0.5));
  CHECK_FALSE(d.insert);

  SUBCASE("keeps the claim and comes in from the side") {
    const auto d2 = spare_step(d.fsm, 20, t, 1, std::nullopt, p);
    CHECK(d2.fsm.claimed_edge == d.fsm.claimed_edge);
    REQUIRE(d2.goal.has_value());
    // edge runs along y at x = 1; the spare sits at x < 1, so the goal is offset toward it
    CHECK(d2.goal->x == doctest::Approx(1.0 - 4.0 * p.body_radius));
    CHECK(d2.goal->y == doctest::Approx(0.5));
    CHECK_FALSE(d2.insert);
  }
  SUBCASE("a lower-id spare holding the same claim wins") {
    auto t2 = table({{1, {1.0, 1.5}, child, {NeedEdgeMsg{4, {}}}},
                     {4, {1.0, -0.5}, beat(Role::Connector, true, 2)},
                     {11, {0.5, 0.0}, beat(Role::Spare, false, 0), {SpareClaimMsg{1, 4}}}});
    const auto d2 = spare_step(d.fsm, 20, t2, 1, std::nullopt, p);
    CHECK(d2.claim_lost);
    CHECK(d2.fsm.claimed_edge != std::optional<Edge>(Edge{1, 4}));
  }
  SUBCASE("a need that went away releases the claim") {
    HeartbeatMsg calm = child;
    calm.need = NeedState::NoNeed;
    auto t2 = table({{1, {1.0, 1.0}, calm}, {4, {1.0, -1.0}, beat(Role::Connector, true, 2)}});
    const auto d2 = spare_step(d.fsm, 20, t2, 1, 4u, p);
    CHECK(d2.claim_lost);
    CHECK(d2.fsm.spare_state == SpareState::AdjustPosition);
    CHECK(d2.reference == 4u);
  }
}

TEST_CASE("spare inserts only at the midpoint with both ends fresh") {
  const Params p = default_params(AlgorithmVariant::Inwards);
  HeartbeatMsg child = beat(Role::Worker, true, 3);
  child.parent = 4;
  child.need = NeedState::Await;
  SpareFsm held;
  held.spare_state = SpareState::ExtendEdge;
  held.claimed_edge = Edge{1, 4};
  auto fresh = table({{1, {0.0, 1.0}, child}, {4, {0.0, -1.0}, beat(Role::Connector, true, 2)}});
  CHECK(spare_step(held, 20, fresh, 1, std::nullopt, p).insert);
  auto stale = table({{1, {0.0, 1.0}, child, {}, 1, 10},
                      {4, {0.0, -1.0}, beat(Role::Connector, true, 2), {}, 1, 9}});
  CHECK_FALSE(spare_step(held, 20, stale, 1, std::nullopt, p).insert);
  auto off = table({{1, {0.5, 1.0}, child}, {4, {0.5, -1.0}, beat(Role::Connector, true, 2)}});
  CHECK_FALSE(spare_step(held, 20, off, 1, std::nullopt, p).insert);
}

TEST_CASE("spare without work orbits the nearest committed robot") {
  const Params p = default_params(AlgorithmVariant::Inwards);
  const auto t = table({{2, {2.0, 0.0}, beat(Role::Connector, true, 2)},
                        {3, {1.0, 0.0}, beat(Role::Spare, false, 0)},
                        {5, {0.0, 1.0}, beat(Role::Root, true, 1)}});
  const auto d = spare_step({}, 20, t, 1, std::nullopt, p);
  CHECK(d.fsm.spare_state == SpareState::AdjustPosition);
  CHECK(d.reference == 5u);
  CHECK(spare_step({}, 20, t, 1, 2u, p).reference == 2u);
  // within S: tangential at tau
  const Vec2 u = spare_control(d, t, p);
  CHECK(u.norm() == doctest::Approx(p.tau));
  CHECK(u.dot({0.0, 1.0}) == doctest::Approx(0.0));
  // beyond S: toward the reference
  auto d2 = spare_step({}, 20, t, 1, 2u, p);
  CHECK(spare_control(d2, t, p).x > 0.0);
}

TEST_CASE("barrier completion needs every child") {
  CHECK(barrier_done(true, {}));
  CHECK(barrier_done(true, {true, true}));
  CHECK_FALSE(barrier_done(true, {true, false}));
  CHECK_FALSE(barrier_done(false, {true}));
}

TEST_CASE("a lone root with no workers to wait for") {
  const Params p = default_params(AlgorithmVariant::Outwards);
  Agent root(0, Role::Root, AlgorithmVariant::Outwards, p, 0);
  RobotSensing s;
  auto out = root.step(0, {}, s);
  CHECK(root.role() == Role::Root);
  CHECK(root.links().depth == 1);
  bool heartbeat = false;
  for (const auto& m : out.outbox) heartbeat |= m.kind() == MsgKind::Heartbeat;
  CHECK(heartbeat);
}
