#include <doctest.h>

#include <set>
#include <sstream>

#include "oracles.hpp"
#include "swarmtree/scenario.hpp"

using namespace swarmtree;

TEST_CASE("robot count from targets, radius and redundancy") {
  CHECK(robot_count(2, 3.0, 2, 1.9) == 2 * (2 * 2 + 1));
  CHECK(robot_count(4, 9.0, 4, 1.54) == kMaxRobots);
  CHECK(robot_count(3, 6.0, 1, 2.0) == 3 * 3 + 1);
}

TEST_CASE("deployment: targets on the circle, cluster in range") {
  for (bool los : {false, true}) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const Scenario sc = make_scenario(AlgorithmVariant::Inwards, 3, 6.0, 2, los, seed);
      const Deployment d = generate(sc);
      CHECK(d.robots.size() == sc.n_robots());
      REQUIRE(d.targets.size() == 3);
      for (Vec2 t : d.targets) CHECK(t.norm() == doctest::Approx(6.0));
      std::vector<std::vector<bool>> adj(d.robots.size(), std::vector<bool>(d.robots.size()));
      World w(d.robots, d.targets, sc.params, los);
      const auto g = w.comm_graph();
      for (std::size_t i = 0; i < d.robots.size(); ++i) {
        for (std::size_t j = 0; j < d.robots.size(); ++j) {
          if (i == j) continue;
          CHECK((d.robots[i].p - d.robots[j].p).norm() <= sc.params.C);
          CHECK((d.robots[i].p - d.robots[j].p).norm() > 2 * sc.params.body_radius);
          adj[i][j] = g(i, j);
        }
      }
      CHECK(oracle::connected(adj));
      std::size_t workers = 0, roots = 0;
      for (Role r : d.roles.roles) {
        workers += r == Role::Worker;
        roots += r == Role::Root;
      }
      CHECK(workers == 3);
      CHECK(roots == 1);
    }
  }
}

TEST_CASE("grid parsing and canonical expansion") {
  std::istringstream in(
      "# comment\nvariants = outwards, inwards\ntargets = 3, 2\nradii = 3\nredundancy = 2\n"
      "los = true, false\nn_robots = 9\n");
  const Grid g = parse_grid(in);
  CHECK(g.n_robots == 9u);
  const auto sc = expand(g, 4, 5);
  REQUIRE(sc.size() == 2 * 2 * 2 * 2);
  // inwards sorts first by name, then los off before on, then ascending targets and seeds
  CHECK(sc.front().variant == AlgorithmVariant::Inwards);
  CHECK_FALSE(sc.front().los_enabled);
  CHECK(sc.front().n_targets == 2);
  CHECK(sc[0].seed == 4);
  CHECK(sc[1].seed == 5);
  CHECK(sc.back().variant == AlgorithmVariant::Outwards);
  CHECK(sc.back().los_enabled);
  CHECK(sc.back().n_targets == 3);
  CHECK(sc.back().n_robots() == 9);

  std::istringstream bad("radii = far\n");
  CHECK_THROWS_AS(parse_grid(bad), ConfigError);
  std::istringstream unknown("colour = blue\n");
  CHECK_THROWS_AS(parse_grid(unknown), ConfigError);
}

TEST_CASE("seed ranges") {
  CHECK(parse_seed_range("1..50") == std::pair<std::uint64_t, std::uint64_t>{1, 50});
  CHECK(parse_seed_range("7") == std::pair<std::uint64_t, std::uint64_t>{7, 7});
  CHECK_THROWS_AS(parse_seed_range("9..3"), ConfigError);
  CHECK_THROWS_AS(parse_seed_range("x..3"), ConfigError);
}

TEST_CASE("a still swarm never finishes and keeps the tree valid") {
  Scenario sc = make_scenario(AlgorithmVariant::Outwards, 2, 2.3, 2, false, 3);
  sc.n_robots_override = 9;
  sc.motion_enabled = false;
  sc.target_radius = 0.5;  // short horizon
  const RunResult r = run(sc);
  CHECK_FALSE(r.invalid);
  CHECK_FALSE(r.summary.completed);
  CHECK(r.summary.disconnected_time_ratio == 0.0);
  CHECK(r.summary.fiedler_low_ratio == 0.0);
  CHECK(r.stats.parent_barriers_checked > 0);
}

TEST_CASE("desk-scale runs finish and are reproducible") {
  for (auto v : {AlgorithmVariant::Outwards, AlgorithmVariant::Inwards}) {
    Scenario sc = make_scenario(v, 2, 2.3, 2, false, 1);
    sc.n_robots_override = 9;
    std::ostringstream p1, m1, p2, m2;
    const RunResult a = run(sc, {&p1, &m1});
    const RunResult b = run(sc, {&p2, &m2});
    CHECK_FALSE(a.invalid);
    CHECK(a.summary.completed);
    CHECK(a.stats.parent_barriers_checked > 0);
    CHECK(p1.str() == p2.str());
    CHECK(m1.str() == m2.str());
    CHECK(a.summary.ticks == b.summary.ticks);
  }
}

TEST_CASE("csv rows") {
  Scenario sc = make_scenario(AlgorithmVariant::Inwards, 2, 2.3, 2, false, 1);
  sc.n_robots_override = 9;
  std::vector<RunRow> rows{{sc, run(sc)}};
  std::ostringstream out;
  write_csv(out, rows);
  std::istringstream lines(out.str());
  std::string header, row, extra;
  std::getline(lines, header);
  std::getline(lines, row);
  CHECK_FALSE(std::getline(lines, extra));
  CHECK(header ==
        "variant,los,n_targets,target_radius,redundancy,seed,n_robots,status,completed,"
        "normalized_time,disconnected_time_ratio,fiedler_low_ratio");
  CHECK(row.rfind("inwards,0,2,2.300,2,1,9,OK,1,", 0) == 0);
}

TEST_CASE("sweep keeps input order regardless of thread count") {
  Grid g;
  g.variants = {AlgorithmVariant::Outwards};
  g.targets = {2};
  g.radii = {2.3};
  g.redundancies = {2};
  g.los = {false};
  g.n_robots = 9;
  const auto sc = expand(g, 1, 3);
  std::ostringstream a, b;
  write_csv(a, sweep(sc, 1));
  write_csv(b, sweep(sc, 3));
  CHECK(a.str() == b.str());
}
