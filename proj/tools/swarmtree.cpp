#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "swarmtree/params_io.hpp"
#include "swarmtree/scenario.hpp"

using namespace swarmtree;

namespace {

struct RunArgs {
  std::string variant = "outwards";
  unsigned targets = 2;
  double radius = 3.0;
  unsigned redundancy = 2;
  bool los = false;
  std::uint64_t seed = 1;
  std::string params;
  std::string trace;
  unsigned n_robots = 0;
  unsigned fiedler_every = 1;
};

int do_run(const RunArgs& a, bool strict) {
  const AlgorithmVariant v = parse_variant(a.variant);
  Scenario sc = make_scenario(v, a.targets, a.radius, a.redundancy, a.los, a.seed);
  if (!a.params.empty()) sc.params = load_params(a.params, v);
  if (a.n_robots > 0) sc.n_robots_override = a.n_robots;
  sc.fiedler_every = a.fiedler_every;

  std::unique_ptr<std::ofstream> proto, msgs;
  TraceSinks sinks;
  if (!a.trace.empty()) {
    proto = std::make_unique<std::ofstream>(a.trace + ".protocol.jsonl");
    msgs = std::make_unique<std::ofstream>(a.trace + ".messages.jsonl");
    if (!*proto || !*msgs) throw ConfigError("cannot open trace files with prefix '" + a.trace + "'");
    sinks.protocol = proto.get();
    sinks.messages = msgs.get();
  }
  RunRow row{sc, run(sc, sinks)};
  write_csv_header(std::cout);
  write_csv_row(std::cout, row);
  if (row.result.invalid) std::cerr << "INVALID: " << row.result.diagnostic << '\n';
  return strict && row.result.invalid ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tree-based connectivity-preserving swarm simulator"};
  app.require_subcommand(1);
  bool strict = false;
  app.add_flag("--strict", strict, "Exit nonzero when any run is INVALID");

  RunArgs ra;
  auto* run_cmd = app.add_subcommand("run", "Run a single scenario and print its CSV row");
  run_cmd->add_option("--variant", ra.variant, "outwards or inwards")
      ->check(CLI::IsMember({"outwards", "inwards"}));
  run_cmd->add_option("--targets", ra.targets, "Number of targets")->check(CLI::PositiveNumber);
  run_cmd->add_option("--radius", ra.radius, "Target circle radius [m]")->check(CLI::PositiveNumber);
  run_cmd->add_option("--redundancy", ra.redundancy, "Redundancy factor")->check(CLI::PositiveNumber);
  run_cmd->add_flag("--los", ra.los, "Enable line-of-sight occlusion");
  run_cmd->add_option("--seed", ra.seed, "Random seed");
  run_cmd->add_option("--params", ra.params, "Parameter file")->check(CLI::ExistingFile);
  run_cmd->add_option("--trace", ra.trace, "Write <prefix>.protocol.jsonl and <prefix>.messages.jsonl");
  run_cmd->add_option("--robots", ra.n_robots, "Override the derived robot count");
  run_cmd->add_option("--fiedler-every", ra.fiedler_every, "Sample the Fiedler value every k ticks")
      ->check(CLI::PositiveNumber);

  std::string grid_path, seeds = "1..50", out_path;
  unsigned jobs = 1;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a grid of scenarios over a seed range");
  sweep_cmd->add_option("--grid", grid_path, "Grid file")->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("--seeds", seeds, "Seed range A..B (inclusive)");
  sweep_cmd->add_option("--jobs", jobs, "Concurrent runs")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--out", out_path, "CSV output (default stdout)");

  std::string params_path, base = "outwards";
  auto* val_cmd = app.add_subcommand("validate-params", "Load a parameter file and report warnings");
  val_cmd->add_option("file", params_path, "Parameter file")->required()->check(CLI::ExistingFile);
  val_cmd->add_option("--base", base, "Defaults for unlisted keys")
      ->check(CLI::IsMember({"outwards", "inwards"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return do_run(ra, strict);
    if (*sweep_cmd) {
      const auto [lo, hi] = parse_seed_range(seeds);
      const auto rows = sweep(expand(load_grid(grid_path), lo, hi), jobs);
      std::ofstream file;
      if (!out_path.empty()) {
        file.open(out_path);
        if (!file) throw ConfigError("cannot open '" + out_path + "'");
      }
      write_csv(out_path.empty() ? std::cout : file, rows);
      std::size_t invalid = 0;
      for (const auto& r : rows) {
        if (r.result.invalid) {
          ++invalid;
          std::cerr << "INVALID " << to_string(r.scenario.variant) << " seed " << r.scenario.seed
                    << ": " << r.result.diagnostic << '\n';
        }
      }
      return strict && invalid > 0 ? 2 : 0;
    }
    if (*val_cmd) {
      const Params p = load_params(params_path, parse_variant(base));
      write_params(std::cout, p);
      for (const auto& w : p.warnings()) std::cerr << "warning: " << w << '\n';
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
