#include <doctest.h>

#include "swarmtree/world.hpp"

using namespace swarmtree;

namespace {

Params params() { return default_params(AlgorithmVariant::Outwards); }

World line_world(std::vector<Vec2> pts, bool los) {
  std::vector<RobotPhysState> r;
  for (Vec2 p : pts) r.push_back({p, {}, 0.0});
  return World(std::move(r), {}, params(), los);
}

}  // namespace

TEST_CASE("double integrator clamps control and speed") {
  const Params p = params();
  RobotPhysState s;
  auto n = step_dynamics(s, {100.0, 0.0}, p);
  CHECK(n.v.x == doctest::Approx(p.u_max * p.dt));
  CHECK(n.p.x == doctest::Approx(p.u_max * p.dt * p.dt));
  CHECK(n.theta == doctest::Approx(0.0));
  for (int k = 0; k < 50; ++k) n = step_dynamics(n, {0.0, 100.0}, p);
  CHECK(n.v.norm() == doctest::Approx(p.v_max));
  CHECK(n.theta > 1.5);
  // heading holds while nearly stopped
  RobotPhysState slow{{0, 0}, {0, 0}, 1.0};
  CHECK(step_dynamics(slow, {0.0, 0.0}, p).theta == 1.0);
  CHECK_THROWS_AS(step_dynamics(s, {NAN, 0.0}, p), SimulationFault);
}

TEST_CASE("range is inclusive at C") {
  const Params p = params();
  World w = line_world({{0, 0}, {p.C, 0}, {p.C + 1e-6, 0.0}}, false);
  CHECK(w.in_range(0, 1));
  CHECK_FALSE(w.in_range(0, 2));
  const auto g = w.comm_graph();
  CHECK(g.symmetric());
  CHECK(g(0, 1));
  CHECK(g(1, 2));
  CHECK_FALSE(g(0, 2));
  CHECK(g.edge_count() == 2);
}

TEST_CASE("a body on the segment blocks line of sight") {
  const Params p = params();
  SUBCASE("midpoint blocker") {
    World w = line_world({{0, 0}, {2, 0}, {1, 0}}, true);
    CHECK_FALSE(w.line_of_sight(0, 1));
    CHECK(w.line_of_sight(0, 2));
    CHECK_FALSE(w.comm_graph()(0, 1));
  }
  SUBCASE("just outside the body radius") {
    World w = line_world({{0, 0}, {2, 0}, {1, p.body_radius + 0.001}}, true);
    CHECK(w.line_of_sight(0, 1));
  }
  SUBCASE("just inside") {
    World w = line_world({{0, 0}, {2, 0}, {1, p.body_radius - 0.001}}, true);
    CHECK_FALSE(w.line_of_sight(0, 1));
  }
  SUBCASE("beyond the endpoints only the cap counts") {
    World w = line_world({{0, 0}, {2, 0}, {2.0 + p.body_radius + 0.01, 0}}, true);
    CHECK(w.line_of_sight(0, 1));
  }
  SUBCASE("disabled") {
    World w = line_world({{0, 0}, {2, 0}, {1, 0}}, false);
    CHECK(w.line_of_sight(0, 1));
  }
}

TEST_CASE("world step advances every robot and the tick") {
  World w = line_world({{0, 0}, {1, 0}}, false);
  std::vector<Vec2> u{{1, 0}, {0, 1}};
  w.step(u);
  CHECK(w.tick() == 1);
  CHECK(w.robot(0).v.x > 0.0);
  CHECK(w.robot(1).v.y > 0.0);
  std::vector<Vec2> bad{{1, 0}};
  CHECK_THROWS_AS(w.step(bad), SimulationFault);
}

TEST_CASE("point to segment distance") {
  CHECK(point_segment_distance({1, 1}, {0, 0}, {2, 0}) == doctest::Approx(1.0));
  CHECK(point_segment_distance({3, 0}, {0, 0}, {2, 0}) == doctest::Approx(1.0));
  CHECK(point_segment_distance({-3, 4}, {0, 0}, {2, 0}) == doctest::Approx(5.0));
  CHECK(point_segment_distance({1, 1}, {0, 0}, {0, 0}) == doctest::Approx(std::sqrt(2.0)));
}
