#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "swarmtree/comms.hpp"
#include "swarmtree/core.hpp"
#include "swarmtree/metrics.hpp"
#include "swarmtree/protocol.hpp"
#include "swarmtree/world.hpp"

namespace swarmtree {

inline constexpr std::uint32_t kMaxRobots = 94;

/// redundancy * (n_targets * ceil(radius / delta) + 1), capped at kMaxRobots.
std::uint32_t robot_count(std::uint32_t n_targets, double target_radius, std::uint32_t redundancy,
                          double delta);

struct Scenario {
  AlgorithmVariant variant = AlgorithmVariant::Outwards;
  std::uint32_t n_targets = 2;
  double target_radius = 3.0;
  std::uint32_t redundancy = 2;
  bool los_enabled = false;
  std::uint64_t seed = 1;
  Params params = default_params(AlgorithmVariant::Outwards);
  std::optional<std::uint32_t> n_robots_override;
  double cluster_radius_factor = 0.4;  // initial disc radius over C
  std::uint32_t fiedler_every = 1;     // sample the Fiedler value every k ticks
  bool motion_enabled = true;          // test hook: false forces u = 0
  bool stop_when_done = true;          // false keeps simulating up to T_max

  std::uint32_t n_robots() const;
  double t_max() const { return max_mission_time(target_radius, params); }
  std::uint64_t max_ticks() const;
};

/// Scenario with the variant's default parameters.
Scenario make_scenario(AlgorithmVariant variant, std::uint32_t n_targets, double target_radius,
                       std::uint32_t redundancy, bool los_enabled, std::uint64_t seed);

struct Deployment {
  std::vector<RobotPhysState> robots;
  std::vector<Vec2> targets;
  RoleAssignment roles;
};

/// Jittered grid inside the initial disc, targets on the circle, roles assigned.
/// Without line of sight the initial graph is complete; with it, every pair is in
/// range and the graph is connected. Throws ConfigError when no packing works.
Deployment generate(const Scenario& sc);

struct TraceSinks {
  std::ostream* protocol = nullptr;  // one JSON object per robot per tick
  std::ostream* messages = nullptr;  // one JSON object per reception
};

struct InvariantStats {
  std::uint64_t parent_barriers_checked = 0;
  std::uint64_t growth_barriers_checked = 0;
  // Go(Parent) released while some committed robot had just lost its path to the
  // root; aggregation lags the tree by at least one tick, so this is counted only
  std::uint64_t parent_barriers_stale = 0;
  std::uint64_t insertions_checked = 0;
  std::uint64_t leaf_checks = 0;
  std::uint64_t handoffs = 0;
};

struct RunResult {
  RunSummary summary;
  bool invalid = false;
  std::string diagnostic;
  std::uint64_t invalid_tick = 0;
  InvariantStats stats;
  std::uint32_t n_robots = 0;
};

class Simulation {
 public:
  explicit Simulation(const Scenario& sc, TraceSinks traces = {});

  /// Advances one tick; returns false once the run is over.
  bool step();
  RunResult run();

  const World& world() const { return world_; }
  const std::vector<Agent>& agents() const { return agents_; }
  const std::vector<MetricsSample>& samples() const { return samples_; }
  const InvariantStats& stats() const { return stats_; }
  bool finished() const { return finished_; }

 private:
  Simulation(const Scenario& sc, TraceSinks traces, Deployment dep);

  void check_invariants(const std::vector<std::optional<RobotId>>& parents_before,
                        const std::vector<StepEvents>& events);
  void trace_tick(std::span<const std::vector<SituatedReception>> inboxes);
  RunSummary summary() const;

  Scenario sc_;
  TraceSinks traces_;
  World world_;
  std::vector<Agent> agents_;
  std::vector<std::optional<Vec2>> worker_targets_;
  std::vector<std::vector<Message>> outboxes_;
  std::vector<double> send_headings_;
  std::vector<MetricsSample> samples_;
  InvariantStats stats_;
  bool finished_ = false;
};

/// Runs a scenario to completion; internal faults become an INVALID result.
RunResult run(const Scenario& sc, TraceSinks traces = {});

// ---------------------------------------------------------------------------
// Sweeps.

struct Grid {
  std::vector<AlgorithmVariant> variants{AlgorithmVariant::Outwards, AlgorithmVariant::Inwards};
  std::vector<std::uint32_t> targets{2, 3, 4};
  std::vector<double> radii{3.0, 6.0, 9.0};
  std::vector<std::uint32_t> redundancies{2, 3, 4};
  std::vector<bool> los{false, true};
  std::optional<std::uint32_t> n_robots;
  std::optional<Params> params_outwards;
  std::optional<Params> params_inwards;
  std::uint32_t fiedler_every = 1;
};

/// key = value lines; list values are comma separated. Keys: variants, targets,
/// radii, redundancy, los, n_robots, fiedler_every, params_outwards, params_inwards
/// (paths resolved relative to `base_dir`).
Grid parse_grid(std::istream& in, const std::string& base_dir = ".");
Grid load_grid(const std::string& path);

/// Inclusive seed range "A..B" or a single seed.
std::pair<std::uint64_t, std::uint64_t> parse_seed_range(const std::string& text);

/// Cartesian product in canonical order: variant name, los, targets, radius,
/// redundancy, seed (outermost first, each ascending).
std::vector<Scenario> expand(const Grid& grid, std::uint64_t seed_lo, std::uint64_t seed_hi);

struct RunRow {
  Scenario scenario;
  RunResult result;
};

/// Runs every scenario with at most `jobs` threads; rows keep the input order.
std::vector<RunRow> sweep(const std::vector<Scenario>& scenarios, unsigned jobs);

void write_csv_header(std::ostream& out);
void write_csv_row(std::ostream& out, const RunRow& row);
void write_csv(std::ostream& out, const std::vector<RunRow>& rows);

}  // namespace swarmtree
