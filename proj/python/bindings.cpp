#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "swarmtree/metrics.hpp"
#include "swarmtree/motion.hpp"
#include "swarmtree/params_io.hpp"
#include "swarmtree/scenario.hpp"

namespace py = pybind11;
using namespace swarmtree;

namespace {

// Nested sequences rather than the Eigen caster: the system pybind11 predates NumPy 2.
using Rows = std::vector<std::vector<double>>;

AdjacencyMatrix to_adjacency(const Rows& a) {
  AdjacencyMatrix adj(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].size() != a.size()) throw py::value_error("adjacency must be square");
    for (std::size_t j = 0; j < a.size(); ++j) adj.set(i, j, a[i][j] != 0.0);
  }
  return adj;
}

py::dict row_dict(const RunRow& r) {
  py::dict d;
  const auto& s = r.result.summary;
  d["variant"] = std::string(to_string(r.scenario.variant));
  d["los"] = r.scenario.los_enabled;
  d["n_targets"] = r.scenario.n_targets;
  d["target_radius"] = r.scenario.target_radius;
  d["redundancy"] = r.scenario.redundancy;
  d["seed"] = r.scenario.seed;
  d["n_robots"] = r.result.n_robots;
  d["invalid"] = r.result.invalid;
  d["diagnostic"] = r.result.diagnostic;
  d["completed"] = s.completed;
  d["normalized_time"] = s.normalized_time ? py::cast(*s.normalized_time) : py::none();
  d["disconnected_time_ratio"] = s.disconnected_time_ratio;
  d["fiedler_low_ratio"] = s.fiedler_low_ratio;
  d["ticks"] = s.ticks;
  return d;
}

Scenario scenario_from(const std::string& variant, std::uint32_t targets, double radius,
                       std::uint32_t redundancy, bool los, std::uint64_t seed,
                       std::optional<std::uint32_t> n_robots, std::optional<Params> params) {
  Scenario sc = make_scenario(parse_variant(variant), targets, radius, redundancy, los, seed);
  sc.n_robots_override = n_robots;
  if (params) {
    params->validate();
    sc.params = *params;
  }
  return sc;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Tree-based connectivity-preserving swarm simulator";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<SimulationFault>(m, "SimulationFault", PyExc_RuntimeError);

  py::class_<Params>(m, "Params")
      .def(py::init<>())
      .def_readwrite("S", &Params::S)
      .def_readwrite("A_avoid", &Params::A_avoid)
      .def_readwrite("delta", &Params::delta)
      .def_readwrite("epsilon", &Params::epsilon)
      .def_readwrite("tau", &Params::tau)
      .def_readwrite("R", &Params::R)
      .def_readwrite("I", &Params::I)
      .def_readwrite("E", &Params::E)
      .def_readwrite("J", &Params::J)
      .def_readwrite("C", &Params::C)
      .def_readwrite("dt", &Params::dt)
      .def_readwrite("v_max", &Params::v_max)
      .def_readwrite("u_max", &Params::u_max)
      .def_readwrite("body_radius", &Params::body_radius)
      .def_readwrite("target_reach", &Params::target_reach)
      .def_readwrite("track_gain", &Params::track_gain)
      .def_readwrite("edge_clearance", &Params::edge_clearance)
      .def_readwrite("link_slack", &Params::link_slack)
      .def_readwrite("mirror_tree_force", &Params::mirror_tree_force)
      .def("validate", &Params::validate)
      .def("warnings", &Params::warnings)
      .def("__eq__", [](const Params& a, const Params& b) { return a == b; })
      .def("__repr__", [](const Params& p) {
        std::ostringstream os;
        write_params(os, p);
        return "<Params\n" + os.str() + ">";
      });

  m.def(
      "default_params", [](const std::string& v) { return default_params(parse_variant(v)); },
      py::arg("variant"));
  m.def(
      "load_params",
      [](const std::string& path, const std::string& base) {
        return load_params(path, parse_variant(base));
      },
      py::arg("path"), py::arg("base") = "outwards");

  m.def("tree_force", py::overload_cast<double, double, double>(&tree_force), py::arg("d"),
        py::arg("delta"), py::arg("epsilon"));
  m.def(
      "fiedler_value",
      [](const Rows& a) { return fiedler_value(laplacian(to_adjacency(a))); },
      py::arg("adjacency"));
  m.def(
      "connected", [](const Rows& a) { return connected(to_adjacency(a)); },
      py::arg("adjacency"));
  m.def("max_mission_time", &max_mission_time, py::arg("target_radius"), py::arg("params"));

  m.def(
      "run",
      [](const std::string& variant, std::uint32_t targets, double radius, std::uint32_t redundancy,
         bool los, std::uint64_t seed, std::optional<std::uint32_t> n_robots,
         std::optional<Params> params) {
        const Scenario sc =
            scenario_from(variant, targets, radius, redundancy, los, seed, n_robots, params);
        RunRow row{sc, {}};
        {
          py::gil_scoped_release release;
          row.result = run(sc);
        }
        return row_dict(row);
      },
      py::arg("variant") = "outwards", py::arg("targets") = 2, py::arg("radius") = 3.0,
      py::arg("redundancy") = 2, py::arg("los") = false, py::arg("seed") = 1,
      py::arg("n_robots") = py::none(), py::arg("params") = py::none());

  m.def(
      "sweep_csv",
      [](const std::string& grid_path, std::uint64_t seed_lo, std::uint64_t seed_hi,
         unsigned jobs) {
        const auto scenarios = expand(load_grid(grid_path), seed_lo, seed_hi);
        std::vector<RunRow> rows;
        {
          py::gil_scoped_release release;
          rows = sweep(scenarios, jobs);
        }
        std::ostringstream os;
        write_csv(os, rows);
        return os.str();
      },
      py::arg("grid"), py::arg("seed_lo"), py::arg("seed_hi"), py::arg("jobs") = 1);
}
