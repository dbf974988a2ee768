#include <doctest.h>

#include <chrono>
#include <random>

#include "oracles.hpp"
#include "swarmtree/collective.hpp"

using namespace swarmtree;

namespace {

// Every node recomputes from the reports its children sent last round, as the
// robots do once per tick. Returns the root value after the tree has settled.
std::int64_t distributed_count(const oracle::RandomTree& t) {
  const std::size_t n = t.parent.size();
  std::vector<std::int64_t> sent(n, 0);
  std::vector<bool> heard(n, false);
  for (std::size_t round = 0; round <= n + 1; ++round) {
    std::vector<std::int64_t> next(n);
    for (std::size_t i = 0; i < n; ++i) {
      CountState s;
      s.depth = t.depth[i];
      for (int c : t.children[i])
        if (heard[c]) s.child_reports[c] = sent[c];
      next[i] = count_step(s);
    }
    sent = next;
    heard.assign(n, true);
  }
  return sent[0];
}

struct Pose {
  Vec2 p;
  double heading;
};

Vec2 distributed_centroid_world(const oracle::RandomTree& t, const std::vector<Pose>& poses) {
  const std::size_t n = t.parent.size();
  std::vector<CountState> count(n);
  for (std::size_t i = 0; i < n; ++i) count[i].depth = t.depth[i];
  // bottom-up in one pass: children have larger indices
  std::vector<std::int64_t> c(n);
  std::vector<Vec2> q(n);
  for (std::size_t k = n; k-- > 0;) {
    CentroidState s;
    if (t.parent[k] >= 0) {
      const auto rec = oracle::seen_from(poses[t.parent[k]].p, poses[t.parent[k]].heading,
                                         poses[k].p, poses[k].heading);
      s.p_parent = to_local_frame(rec);
    }
    for (int ch : t.children[k]) {
      const auto rec = oracle::seen_from(poses[ch].p, poses[ch].heading, poses[k].p,
                                         poses[k].heading);
      s.child_q[ch] = ChildCentroid{q[ch], rec.rel_orientation};
      count[k].child_reports[ch] = c[ch];
    }
    c[k] = count_step(count[k]);
    q[k] = centroid_step(s, count[k]);
  }
  const Pose& root = poses[0];
  return {root.p.x + oracle::rotate_x(q[0], root.heading),
          root.p.y + oracle::rotate_y(q[0], root.heading)};
}

}  // namespace

TEST_CASE("count of a leaf and a chain") {
  CountState leaf;
  leaf.depth = 4;
  CHECK(count_step(leaf) == 4);
  CountState one;
  one.depth = 3;
  one.child_reports[9] = 7;
  CHECK(count_step(one) == 7);
  CountState two;
  two.depth = 1;
  two.child_reports = {{1, 2}, {2, 4}};
  CHECK(count_step(two) == 1 + 1 + 3);
}

TEST_CASE("distributed count equals the node count on random trees") {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2024);
  for (int k = 0; k < 200; ++k) {
    const int n = std::uniform_int_distribution<int>(1, 60)(rng);
    const auto t = oracle::random_tree(rng, n, k % 5);
    CHECK(distributed_count(t) == n);
  }
  CHECK(std::chrono::steady_clock::now() - t0 < std::chrono::seconds(5));
}

TEST_CASE("distributed centroid matches the mean position") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> pos(-20.0, 20.0), ang(-M_PI, M_PI);
  for (int k = 0; k < 200; ++k) {
    const int n = std::uniform_int_distribution<int>(1, 60)(rng);
    const auto t = oracle::random_tree(rng, n, k % 5);
    std::vector<Pose> poses(n);
    Vec2 mean;
    for (auto& p : poses) {
      p = {{pos(rng), pos(rng)}, ang(rng)};
      mean += p.p;
    }
    mean = mean / n;
    const Vec2 est = distributed_centroid_world(t, poses);
    CHECK((est - mean).norm() < 1e-6);
  }
}

TEST_CASE("handoff picks the closest candidate beyond the hysteresis") {
  const Vec2 c{1.0, 0.0};
  std::vector<HandoffCandidate> cands{{5, {0.8, 0.0}}, {3, {1.1, 0.0}}, {7, {0.0, 1.0}}};
  CHECK(choose_handoff(c, cands, 0.05) == 3u);
  std::vector<HandoffCandidate> tied{{5, {1.0, 0.5}}, {3, {1.0, -0.5}}};
  CHECK(choose_handoff(c, tied, 0.05) == 3u);
  CHECK_FALSE(choose_handoff({0.02, 0.0}, cands, 0.05).has_value());
  // gains less than the hysteresis
  std::vector<HandoffCandidate> small{{1, {0.04, 0.0}}};
  CHECK_FALSE(choose_handoff(c, small, 0.05).has_value());
  CHECK(choose_handoff(c, small, 0.0) == 1u);
}

TEST_CASE("centroid re-expressed at the receiver") {
  // sender at (2, 0) facing +y, receiver at origin facing +x
  const auto rec = oracle::seen_from({2, 0}, M_PI / 2, {0, 0}, 0.0);
  const Vec2 v = reexpress_centroid({1.0, 0.0}, rec);  // one meter ahead of the sender
  CHECK(v.x == doctest::Approx(2.0));
  CHECK(v.y == doctest::Approx(1.0));
}
