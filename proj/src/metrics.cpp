#include "swarmtree/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace swarmtree {

Eigen::MatrixXd laplacian(const AdjacencyMatrix& adj) {
  if (!adj.symmetric()) throw SimulationFault("laplacian: adjacency not symmetric or has self loops");
  const auto n = static_cast<Eigen::Index>(adj.size());
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j && adj(i, j)) {
        L(i, j) = -1.0;
        L(i, i) += 1.0;
      }
    }
  }
  return L;
}

double fiedler_value(const Eigen::MatrixXd& L) {
  if (L.rows() < 2) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L, Eigen::EigenvaluesOnly);
  // eigenvalues come sorted ascending
  return std::max(0.0, es.eigenvalues()(1));
}

bool connected(const AdjacencyMatrix& adj) {
  const std::size_t n = adj.size();
  if (n <= 1) return true;
  std::vector<std::size_t> up(n);
  std::iota(up.begin(), up.end(), 0);
  auto find = [&](std::size_t x) {
    while (up[x] != x) x = up[x] = up[up[x]];
    return x;
  };
  std::size_t components = n;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!adj(i, j)) continue;
      const auto a = find(i), b = find(j);
      if (a != b) {
        up[a] = b;
        --components;
      }
    }
  }
  return components == 1;
}

MetricsSample sample(const World& world, const AdjacencyMatrix& adj,
                     std::span<const std::optional<RobotId>> parent_of,
                     std::span<const std::optional<Vec2>> worker_targets, bool with_fiedler) {
  MetricsSample s;
  s.tick = world.tick();
  s.sampled_fiedler = with_fiedler;
  if (with_fiedler) s.fiedler = fiedler_value(laplacian(adj));
  const double C = world.params().C;
  for (RobotId i = 0; i < parent_of.size(); ++i) {
    if (!parent_of[i]) continue;
    const RobotId p = *parent_of[i];
    if ((world.robot(i).p - world.robot(p).p).norm() > C || !world.line_of_sight(i, p)) {
      s.tree_edge_broken = true;
      break;
    }
  }
  std::uint32_t workers = 0;
  for (RobotId i = 0; i < worker_targets.size(); ++i) {
    if (!worker_targets[i]) continue;
    ++workers;
    if ((world.robot(i).p - *worker_targets[i]).norm() <= world.params().target_reach) {
      ++s.workers_arrived;
    }
  }
  s.done = workers > 0 && s.workers_arrived == workers;
  return s;
}

double max_mission_time(double target_radius, const Params& params) {
  return 10.0 * target_radius / params.v_max;
}

RunSummary summarize(std::span<const MetricsSample> samples, double target_radius,
                     const Params& params) {
  if (samples.empty()) throw ConfigError("summarize: no samples");
  RunSummary r;
  r.ticks = samples.size();
  std::size_t broken = 0, low = 0, fiedler_ticks = 0;
  for (const auto& s : samples) {
    broken += s.tree_edge_broken ? 1 : 0;
    if (s.sampled_fiedler) {
      ++fiedler_ticks;
      low += s.fiedler < kFiedlerLow ? 1 : 0;
    }
  }
  r.disconnected_time_ratio = static_cast<double>(broken) / static_cast<double>(samples.size());
  r.fiedler_low_ratio =
      fiedler_ticks == 0 ? 0.0 : static_cast<double>(low) / static_cast<double>(fiedler_ticks);
  const double t_max = max_mission_time(target_radius, params);
  auto it = std::ranges::find_if(samples, [](const MetricsSample& s) { return s.done; });
  if (it != samples.end()) {
    const double t = static_cast<double>(it->tick) * params.dt;
    if (t <= t_max + 1e-9) {
      r.completed = true;
      r.normalized_time = t / t_max;
    }
  }
  return r;
}

}  // namespace swarmtree
