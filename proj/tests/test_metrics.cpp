#include <doctest.h>

#include <algorithm>
#include <random>

#include "oracles.hpp"
#include "swarmtree/metrics.hpp"

using namespace swarmtree;

namespace {

AdjacencyMatrix complete(std::size_t n) {
  AdjacencyMatrix a(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) a.set_edge(i, j);
  return a;
}

}  // namespace

TEST_CASE("laplacian rows sum to zero") {
  AdjacencyMatrix a(4);
  a.set_edge(0, 1);
  a.set_edge(1, 2);
  a.set_edge(1, 3);
  const auto L = laplacian(a);
  CHECK(L(1, 1) == 3.0);
  CHECK(L(0, 1) == -1.0);
  CHECK(L(0, 2) == 0.0);
  for (int i = 0; i < 4; ++i) CHECK(L.row(i).sum() == 0.0);
  AdjacencyMatrix bad(2);
  bad.set(0, 1, true);
  CHECK_THROWS_AS(laplacian(bad), SimulationFault);
}

TEST_CASE("fiedler value of complete graphs") {
  for (std::size_t n = 3; n <= 50; ++n) {
    CHECK(fiedler_value(laplacian(complete(n))) ==
          doctest::Approx(oracle::complete_graph_fiedler(n)).epsilon(1e-9));
  }
  CHECK(fiedler_value(laplacian(complete(1))) == 0.0);
}

TEST_CASE("fiedler value of a path") {
  const std::size_t n = 12;
  AdjacencyMatrix a(n);
  for (std::size_t i = 0; i + 1 < n; ++i) a.set_edge(i, i + 1);
  CHECK(fiedler_value(laplacian(a)) == doctest::Approx(2.0 * (1.0 - std::cos(M_PI / n))));
}

TEST_CASE("positive fiedler value iff connected, against union-find") {
  std::mt19937_64 rng(7);
  int n_connected = 0;
  for (int g = 0; g < 500; ++g) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(2, 40)(rng);
    const double p = std::uniform_real_distribution<double>(0.0, 4.0 / n)(rng);
    AdjacencyMatrix a(n);
    std::vector<std::vector<bool>> ref(n, std::vector<bool>(n, false));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (std::bernoulli_distribution(p)(rng)) {
          a.set_edge(i, j);
          ref[i][j] = ref[j][i] = true;
        }
    const bool truth = oracle::connected(ref);
    n_connected += truth;
    CHECK((fiedler_value(laplacian(a)) > 1e-9) == truth);
    CHECK(connected(a) == truth);
  }
  // the generator must exercise both outcomes
  CHECK(n_connected > 50);
  CHECK(n_connected < 450);
}

TEST_CASE("fiedler value is invariant under relabeling") {
  std::mt19937_64 rng(11);
  for (int g = 0; g < 20; ++g) {
    const std::size_t n = 15;
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    AdjacencyMatrix a(n), b(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (std::bernoulli_distribution(0.25)(rng)) {
          a.set_edge(i, j);
          b.set_edge(perm[i], perm[j]);
        }
    CHECK(fiedler_value(laplacian(a)) == doctest::Approx(fiedler_value(laplacian(b))).epsilon(1e-9));
  }
}

TEST_CASE("summary ratios and normalized time") {
  const Params p = default_params(AlgorithmVariant::Outwards);
  const double radius = 1.0;  // T_max = 20 s = 200 ticks
  CHECK(max_mission_time(radius, p) == 20.0);
  std::vector<MetricsSample> s(100);
  for (std::uint64_t k = 0; k < s.size(); ++k) {
    s[k].tick = k + 1;
    s[k].fiedler = k < 10 ? 0.0 : 1.0;
    s[k].tree_edge_broken = k < 5;
  }
  s[49].done = true;
  auto r = summarize(s, radius, p);
  CHECK(r.completed);
  CHECK(*r.normalized_time == doctest::Approx(5.0 / 20.0));
  CHECK(r.disconnected_time_ratio == doctest::Approx(0.05));
  CHECK(r.fiedler_low_ratio == doctest::Approx(0.10));

  s[49].done = false;
  r = summarize(s, radius, p);
  CHECK_FALSE(r.completed);
  CHECK_FALSE(r.normalized_time.has_value());

  // only sampled ticks count toward the Fiedler ratio
  for (std::size_t k = 0; k < s.size(); k += 2) s[k].sampled_fiedler = false;
  r = summarize(s, radius, p);
  CHECK(r.fiedler_low_ratio == doctest::Approx(5.0 / 50.0));
  CHECK_THROWS_AS(summarize(std::span<const MetricsSample>{}, radius, p), ConfigError);
}

TEST_CASE("completion past T_max is a DNF") {
  const Params p = default_params(AlgorithmVariant::Outwards);
  std::vector<MetricsSample> s(1);
  s[0].tick = 201;
  s[0].done = true;
  CHECK_FALSE(summarize(s, 1.0, p).completed);
  s[0].tick = 200;
  CHECK(summarize(s, 1.0, p).completed);
}

TEST_CASE("observer sample flags broken tree edges and arrivals") {
  Params p = default_params(AlgorithmVariant::Outwards);
  std::vector<RobotPhysState> r{{{0, 0}, {}, 0}, {{2, 0}, {}, 0}, {{5, 0}, {}, 0}};
  World w(r, {{5.05, 0}}, p, false);
  const auto adj = w.comm_graph();
  std::vector<std::optional<RobotId>> parents{std::nullopt, 0u, std::nullopt};
  std::vector<std::optional<Vec2>> targets{std::nullopt, std::nullopt, Vec2{5.05, 0}};
  auto s = sample(w, adj, parents, targets);
  CHECK_FALSE(s.tree_edge_broken);
  CHECK(s.done);
  CHECK(s.workers_arrived == 1);
  CHECK(s.fiedler == 0.0);
  parents[2] = 1u;
  CHECK(sample(w, adj, parents, targets).tree_edge_broken);
}
