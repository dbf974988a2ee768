#include "swarmtree/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <ostream>
#include <set>
#include <thread>

#include <json.hpp>

#include "kv_file.hpp"
#include "swarmtree/params_io.hpp"

namespace swarmtree {

std::uint32_t robot_count(std::uint32_t n_targets, double target_radius, std::uint32_t redundancy,
                          double delta) {
  if (n_targets == 0 || redundancy == 0 || !(target_radius > 0.0) || !(delta > 0.0)) {
    throw ConfigError("robot_count: targets, redundancy, radius and delta must be positive");
  }
  const auto per_branch = static_cast<std::uint64_t>(std::ceil(target_radius / delta));
  const std::uint64_t n = std::uint64_t{redundancy} * (std::uint64_t{n_targets} * per_branch + 1);
  return static_cast<std::uint32_t>(std::min<std::uint64_t>(n, kMaxRobots));
}

std::uint32_t Scenario::n_robots() const {
  if (n_robots_override) return *n_robots_override;
  return robot_count(n_targets, target_radius, redundancy, params.delta);
}

std::uint64_t Scenario::max_ticks() const {
  return static_cast<std::uint64_t>(std::ceil(t_max() / params.dt - 1e-9));
}

Scenario make_scenario(AlgorithmVariant variant, std::uint32_t n_targets, double target_radius,
                       std::uint32_t redundancy, bool los_enabled, std::uint64_t seed) {
  Scenario sc;
  sc.variant = variant;
  sc.n_targets = n_targets;
  sc.target_radius = target_radius;
  sc.redundancy = redundancy;
  sc.los_enabled = los_enabled;
  sc.seed = seed;
  sc.params = default_params(variant);
  return sc;
}

namespace {

// Reserved stream ids, above any robot id.
constexpr RobotId kPlacementStream = 0xFFFF0000u;

std::vector<Vec2> grid_points(std::size_t n, double spacing) {
  const int half = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n)))) + 2;
  std::vector<Vec2> pts;
  for (int iy = -half; iy <= half; ++iy) {
    for (int ix = -half; ix <= half; ++ix) pts.push_back({ix * spacing, iy * spacing});
  }
  std::ranges::sort(pts, [](Vec2 a, Vec2 b) {
    const double na = a.dot(a), nb = b.dot(b);
    if (na != nb) return na < nb;
    return a.y != b.y ? a.y < b.y : a.x < b.x;
  });
  pts.resize(n);
  return pts;
}

bool all_in_range(const World& w) {
  for (RobotId i = 0; i < w.size(); ++i) {
    for (RobotId j = i + 1; j < w.size(); ++j) {
      if (!w.in_range(i, j)) return false;
    }
  }
  return true;
}

}  // namespace

Deployment generate(const Scenario& sc) {
  sc.params.validate();
  const std::uint32_t n = sc.n_robots();
  if (n < sc.n_targets + 1) throw ConfigError("generate: too few robots for the targets");
  if (!(sc.cluster_radius_factor > 0.0) || sc.cluster_radius_factor >= 0.5) {
    throw ConfigError("generate: cluster radius factor must lie in (0, 0.5)");
  }
  Deployment d;
  for (std::uint32_t k = 0; k < sc.n_targets; ++k) {
    const double a = 2.0 * std::numbers::pi * k / sc.n_targets;
    d.targets.push_back({sc.target_radius * std::cos(a), sc.target_radius * std::sin(a)});
  }

  const double disc = sc.cluster_radius_factor * sc.params.C;
  RngStream rng(sc.seed, kPlacementStream);
  double spacing = disc * std::sqrt(std::numbers::pi / n);
  for (int attempt = 0; attempt < 200; ++attempt) {
    const double jitter = 0.2 * spacing;
    auto pts = grid_points(n, spacing);
    d.robots.assign(n, {});
    bool fits = true;
    for (std::uint32_t i = 0; i < n; ++i) {
      Vec2 p = pts[i] + Vec2{rng.uniform(-jitter, jitter), rng.uniform(-jitter, jitter)};
      d.robots[i].p = p;
      d.robots[i].theta = wrap_angle(rng.uniform(-std::numbers::pi, std::numbers::pi));
      if (p.norm() > disc) fits = false;
    }
    if (!fits) {
      spacing *= 0.97;
      continue;
    }
    World w(d.robots, d.targets, sc.params, sc.los_enabled);
    const AdjacencyMatrix adj = w.comm_graph();
    const bool ok = sc.los_enabled ? all_in_range(w) && connected(adj)
                                   : adj.edge_count() == std::size_t{n} * (n - 1) / 2;
    if (!ok) {
      spacing *= 0.97;
      continue;
    }
    std::vector<Vec2> positions;
    for (const auto& r : d.robots) positions.push_back(r.p);
    d.roles = init_roles(positions, d.targets);
    return d;
  }
  throw ConfigError("generate: no admissible initial packing");
}

// ---------------------------------------------------------------------------

namespace {

std::vector<Agent> make_agents(const Scenario& sc, const RoleAssignment& roles) {
  std::vector<Agent> agents;
  for (RobotId i = 0; i < roles.roles.size(); ++i) {
    agents.emplace_back(i, roles.roles[i], sc.variant, sc.params, sc.n_targets);
  }
  return agents;
}

std::vector<std::optional<Vec2>> worker_targets_of(const Deployment& d) {
  std::vector<std::optional<Vec2>> out(d.robots.size());
  for (std::size_t i = 0; i < d.robots.size(); ++i) {
    if (d.roles.worker_target[i]) out[i] = d.targets[*d.roles.worker_target[i]];
  }
  return out;
}

}  // namespace

Simulation::Simulation(const Scenario& sc, TraceSinks traces)
    : Simulation(sc, traces, generate(sc)) {}

Simulation::Simulation(const Scenario& sc, TraceSinks traces, Deployment dep)
    : sc_(sc),
      traces_(traces),
      world_(dep.robots, dep.targets, sc.params, sc.los_enabled),
      agents_(make_agents(sc, dep.roles)),
      worker_targets_(worker_targets_of(dep)),
      outboxes_(dep.robots.size()),
      send_headings_(dep.robots.size(), 0.0) {
  if (sc.fiedler_every == 0) throw ConfigError("fiedler_every must be at least 1");
}

namespace {

nlohmann::json vec_json(Vec2 v) { return nlohmann::json::array({v.x, v.y}); }

nlohmann::json opt_id(std::optional<RobotId> id) {
  return id ? nlohmann::json(*id) : nlohmann::json(nullptr);
}

}  // namespace

void Simulation::trace_tick(std::span<const std::vector<SituatedReception>> inboxes) {
  const std::uint64_t tick = world_.tick();
  if (traces_.messages != nullptr) {
    for (RobotId r = 0; r < inboxes.size(); ++r) {
      for (const auto& rec : inboxes[r]) {
        nlohmann::json j;
        j["tick"] = tick;
        j["to"] = r;
        j["from"] = rec.msg.sender;
        j["kind"] = std::string(to_string(rec.msg.kind()));
        j["round"] = rec.msg.round;
        j["range"] = rec.range;
        j["bearing"] = rec.bearing;
        *traces_.messages << j.dump() << '\n';
      }
    }
  }
  if (traces_.protocol != nullptr) {
    for (RobotId i = 0; i < agents_.size(); ++i) {
      const Agent& a = agents_[i];
      nlohmann::json j;
      j["tick"] = tick;
      j["id"] = i;
      j["role"] = std::string(to_string(a.role()));
      j["fsm"] = std::string(to_string(a.fsm()));
      j["round"] = a.round();
      j["parent"] = opt_id(a.links().new_parent);
      j["old_parent"] = opt_id(a.links().old_parent);
      j["depth"] = a.links().depth;
      j["dist_to_root"] = a.dist_to_root();
      j["subtree_workers"] = a.subtree_workers();
      j["committed"] = a.committed();
      j["need"] = std::string(to_string(a.spare_fsm().nonspare_state));
      j["spare"] = std::string(to_string(a.spare_fsm().spare_state));
      j["p"] = vec_json(world_.robot(i).p);
      j["v"] = vec_json(world_.robot(i).v);
      *traces_.protocol << j.dump() << '\n';
    }
  }
}

void Simulation::check_invariants(const std::vector<std::optional<RobotId>>& parents_before,
                                  const std::vector<StepEvents>& events) {
  const std::size_t n = agents_.size();
  const std::uint64_t tick = world_.tick();
  auto fail = [&](const std::string& what) {
    throw SimulationFault("tick " + std::to_string(tick) + ": " + what);
  };

  std::vector<RobotId> roots;
  for (RobotId i = 0; i < n; ++i) {
    if (agents_[i].role() == Role::Root) roots.push_back(i);
  }
  if (roots.empty() || roots.size() > 2) {
    std::string ids;
    for (RobotId r : roots) ids += (ids.empty() ? "" : ",") + std::to_string(r);
    fail("expected one root, found " + std::to_string(roots.size()) + " (" + ids + ")");
  }

  // Parent pointers never close a cycle.
  for (RobotId i = 0; i < n; ++i) {
    std::size_t hops = 0;
    std::optional<RobotId> cur = agents_[i].links().new_parent;
    while (cur) {
      if (*cur == i || ++hops > n) fail("parent cycle through robot " + std::to_string(i));
      cur = agents_[*cur].links().new_parent;
    }
  }

  // Ground-truth child counts.
  std::vector<std::uint32_t> n_children(n, 0);
  for (RobotId i = 0; i < n; ++i) {
    if (auto p = agents_[i].links().new_parent; p && agents_[i].committed()) ++n_children[*p];
  }

  auto reaches_root = [&](RobotId i) {
    std::optional<RobotId> cur = i;
    while (cur) {
      const Agent& a = agents_[*cur];
      if (a.role() == Role::Root) return true;
      if (!a.committed()) return false;
      cur = a.links().new_parent;
    }
    return false;
  };

  for (RobotId i = 0; i < n; ++i) {
    const auto& ev = events[i];
    if (ev.handoff_to) ++stats_.handoffs;
    if (!ev.go_emitted) continue;
    if (*ev.go_emitted == Barrier::Parent) {
      ++stats_.parent_barriers_checked;
      if (roots.size() != 1) fail("two roots at the parent barrier");
      for (RobotId k = 0; k < n; ++k) {
        if (agents_[k].committed() && !reaches_root(k)) {
          ++stats_.parent_barriers_stale;
          break;
        }
      }
    }
    if (*ev.go_emitted == Barrier::Growth && sc_.variant == AlgorithmVariant::Outwards) {
      ++stats_.growth_barriers_checked;
      for (RobotId k = 0; k < n; ++k) {
        const Agent& a = agents_[k];
        if (a.committed() && a.role() != Role::Root && a.role() != Role::Worker &&
            a.links().children.empty()) {
          fail("non-worker leaf " + std::to_string(k) + " after pruning");
        }
      }
    }
  }

  if (sc_.variant == AlgorithmVariant::Inwards) {
    ++stats_.leaf_checks;
    for (RobotId k = 0; k < n; ++k) {
      const Agent& a = agents_[k];
      if (a.committed() && a.role() != Role::Root && a.role() != Role::Worker &&
          a.links().children.empty()) {
        fail("inwards non-worker leaf " + std::to_string(k));
      }
    }
  }

  for (RobotId s = 0; s < n; ++s) {
    const auto& ins = events[s].inserted;
    if (!ins) continue;
    ++stats_.insertions_checked;
    if (parents_before[ins->child] != ins->parent) {
      fail("spare " + std::to_string(s) + " split a non-existent edge");
    }
    if (agents_[s].links().new_parent != ins->parent ||
        agents_[s].links().children != std::set<RobotId>{ins->child}) {
      fail("spare " + std::to_string(s) + " did not take over exactly one edge");
    }
  }
  // A child leaving P for a robot S that is not a fresh insertion must not skip levels.
  for (RobotId c = 0; c < n; ++c) {
    const auto before = parents_before[c];
    const auto now = agents_[c].links().new_parent;
    if (!before || !now || before == now) continue;
    const Agent& s = agents_[*now];
    if (s.role() == Role::Connector && s.links().children == std::set<RobotId>{c} &&
        s.links().new_parent == before) {
      continue;
    }
    if (s.links().new_parent == c) fail("robot " + std::to_string(c) + " adopted its own child");
  }
}

bool Simulation::step() {
  if (finished_) return false;
  const std::size_t n = agents_.size();
  const AdjacencyMatrix adj = world_.comm_graph();
  const auto inboxes = deliver(world_, adj, outboxes_, send_headings_);
  trace_tick(inboxes);

  std::vector<std::optional<RobotId>> parents_before(n);
  for (RobotId i = 0; i < n; ++i) parents_before[i] = agents_[i].links().new_parent;

  std::vector<Vec2> controls(n);
  std::vector<StepEvents> events(n);
  const Params& prm = sc_.params;
  for (RobotId i = 0; i < n; ++i) {
    const RobotPhysState& st = world_.robot(i);
    RobotSensing sensing;
    sensing.odometry = st.p;
    sensing.heading = st.theta;
    if (worker_targets_[i]) sensing.target = (*worker_targets_[i] - st.p).rotated(-st.theta);
    StepOutput out = agents_[i].step(world_.tick(), inboxes[i], sensing);
    outboxes_[i] = std::move(out.outbox);
    send_headings_[i] = st.theta;
    events[i] = out.events;
    if (sc_.motion_enabled) {
      controls[i] = acceleration_command(out.forces.u_total.rotated(st.theta), st.v, prm);
    }
  }
  check_invariants(parents_before, events);

  std::vector<std::optional<RobotId>> parent_of(n);
  for (RobotId i = 0; i < n; ++i) {
    if (agents_[i].committed()) parent_of[i] = agents_[i].links().new_parent;
  }
  const bool with_fiedler = world_.tick() % sc_.fiedler_every == 0;
  samples_.push_back(sample(world_, adj, parent_of, worker_targets_, with_fiedler));

  if ((samples_.back().done && sc_.stop_when_done) || world_.tick() >= sc_.max_ticks()) {
    finished_ = true;
    return false;
  }
  world_.step(controls);
  return true;
}

RunSummary Simulation::summary() const {
  return summarize(samples_, sc_.target_radius, sc_.params);
}

RunResult Simulation::run() {
  RunResult r;
  r.n_robots = static_cast<std::uint32_t>(agents_.size());
  try {
    while (step()) {
    }
    r.summary = summary();
  } catch (const SimulationFault& e) {
    r.invalid = true;
    r.diagnostic = e.what();
    r.invalid_tick = world_.tick();
    if (!samples_.empty()) r.summary = summary();
  }
  r.stats = stats_;
  return r;
}

RunResult run(const Scenario& sc, TraceSinks traces) {
  try {
    Simulation sim(sc, traces);
    return sim.run();
  } catch (const ConfigError& e) {
    RunResult r;
    r.invalid = true;
    r.diagnostic = e.what();
    return r;
  }
}

// ---------------------------------------------------------------------------

namespace {

template <typename T>
std::vector<T> parse_list(const detail::KvEntry& e, auto&& conv) {
  std::vector<T> out;
  for (const auto& item : detail::split_list(e.value)) out.push_back(conv(item));
  if (out.empty()) throw ConfigError("grid line " + std::to_string(e.line) + ": empty list");
  return out;
}

}  // namespace

Grid parse_grid(std::istream& in, const std::string& base_dir) {
  Grid g;
  namespace fs = std::filesystem;
  auto resolve = [&](const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path.string() : (fs::path(base_dir) / path).string();
  };
  for (const auto& e : detail::read_kv(in)) {
    auto to_u32 = [&](const std::string& t) {
      const long long v = detail::to_int(e, t);
      if (v <= 0) throw ConfigError("grid line " + std::to_string(e.line) + ": must be positive");
      return static_cast<std::uint32_t>(v);
    };
    if (e.key == "variants") {
      g.variants = parse_list<AlgorithmVariant>(e, [](const std::string& t) { return parse_variant(t); });
    } else if (e.key == "targets") {
      g.targets = parse_list<std::uint32_t>(e, to_u32);
    } else if (e.key == "radii") {
      g.radii = parse_list<double>(e, [&](const std::string& t) { return detail::to_double(e, t); });
    } else if (e.key == "redundancy") {
      g.redundancies = parse_list<std::uint32_t>(e, to_u32);
    } else if (e.key == "los") {
      g.los = parse_list<bool>(e, [&](const std::string& t) { return detail::to_bool(e, t); });
    } else if (e.key == "n_robots") {
      g.n_robots = to_u32(e.value);
    } else if (e.key == "fiedler_every") {
      g.fiedler_every = to_u32(e.value);
    } else if (e.key == "params_outwards") {
      g.params_outwards = load_params(resolve(e.value), AlgorithmVariant::Outwards);
    } else if (e.key == "params_inwards") {
      g.params_inwards = load_params(resolve(e.value), AlgorithmVariant::Inwards);
    } else {
      throw ConfigError("grid line " + std::to_string(e.line) + ": unknown key '" + e.key + "'");
    }
  }
  return g;
}

Grid load_grid(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open grid file '" + path + "'");
  return parse_grid(in, std::filesystem::path(path).parent_path().string());
}

std::pair<std::uint64_t, std::uint64_t> parse_seed_range(const std::string& text) {
  detail::KvEntry e{"seeds", text, 0};
  const auto dots = text.find("..");
  if (dots == std::string::npos) {
    const auto v = static_cast<std::uint64_t>(detail::to_int(e, text));
    return {v, v};
  }
  const auto lo = static_cast<std::uint64_t>(detail::to_int(e, text.substr(0, dots)));
  const auto hi = static_cast<std::uint64_t>(detail::to_int(e, text.substr(dots + 2)));
  if (hi < lo) throw ConfigError("seed range '" + text + "' is empty");
  return {lo, hi};
}

std::vector<Scenario> expand(const Grid& grid, std::uint64_t seed_lo, std::uint64_t seed_hi) {
  auto sorted = [](auto v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
  };
  std::vector<AlgorithmVariant> variants = grid.variants;
  std::ranges::sort(variants, [](auto a, auto b) { return to_string(a) < to_string(b); });
  variants.erase(std::unique(variants.begin(), variants.end()), variants.end());
  const auto los = sorted(grid.los);
  const auto targets = sorted(grid.targets);
  const auto radii = sorted(grid.radii);
  const auto reds = sorted(grid.redundancies);

  std::vector<Scenario> out;
  for (auto v : variants) {
    for (bool l : los) {
      for (auto t : targets) {
        for (double r : radii) {
          for (auto red : reds) {
            for (std::uint64_t s = seed_lo; s <= seed_hi; ++s) {
              Scenario sc = make_scenario(v, t, r, red, l, s);
              if (v == AlgorithmVariant::Outwards && grid.params_outwards) sc.params = *grid.params_outwards;
              if (v == AlgorithmVariant::Inwards && grid.params_inwards) sc.params = *grid.params_inwards;
              sc.n_robots_override = grid.n_robots;
              sc.fiedler_every = grid.fiedler_every;
              out.push_back(sc);
              if (s == seed_hi) break;
            }
          }
        }
      }
    }
  }
  return out;
}

std::vector<RunRow> sweep(const std::vector<Scenario>& scenarios, unsigned jobs) {
  std::vector<RunRow> rows(scenarios.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < scenarios.size(); i = next++) {
      rows[i].scenario = scenarios[i];
      rows[i].result = run(scenarios[i]);
    }
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(scenarios.size())));
  std::vector<std::jthread> pool;
  for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  return rows;
}

void write_csv_header(std::ostream& out) {
  out << "variant,los,n_targets,target_radius,redundancy,seed,n_robots,status,completed,"
         "normalized_time,disconnected_time_ratio,fiedler_low_ratio\n";
}

void write_csv_row(std::ostream& out, const RunRow& row) {
  const Scenario& sc = row.scenario;
  const RunResult& r = row.result;
  char buf[512];
  const std::string nt = r.summary.normalized_time
                             ? [&] {
                                 char b[32];
                                 std::snprintf(b, sizeof b, "%.6f", *r.summary.normalized_time);
                                 return std::string(b);
                               }()
                             : std::string("DNF");
  std::snprintf(buf, sizeof buf, "%s,%d,%u,%.3f,%u,%llu,%u,%s,%d,%s,%.6f,%.6f\n",
                std::string(to_string(sc.variant)).c_str(), sc.los_enabled ? 1 : 0, sc.n_targets,
                sc.target_radius, sc.redundancy, static_cast<unsigned long long>(sc.seed),
                r.n_robots, r.invalid ? "INVALID" : "OK", r.summary.completed ? 1 : 0, nt.c_str(),
                r.summary.disconnected_time_ratio, r.summary.fiedler_low_ratio);
  out << buf;
}

void write_csv(std::ostream& out, const std::vector<RunRow>& rows) {
  write_csv_header(out);
  for (const auto& row : rows) write_csv_row(out, row);
}

}  // namespace swarmtree
