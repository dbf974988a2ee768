#include "swarmtree/params_io.hpp"

#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>

#include "kv_file.hpp"

namespace swarmtree {

namespace {

using Field = double Params::*;

const std::map<std::string, Field>& numeric_fields() {
  static const std::map<std::string, Field> fields = {
      {"S", &Params::S},
      {"A", &Params::A_avoid},
      {"delta", &Params::delta},
      {"epsilon", &Params::epsilon},
      {"tau", &Params::tau},
      {"R", &Params::R},
      {"I", &Params::I},
      {"E", &Params::E},
      {"J", &Params::J},
      {"C", &Params::C},
      {"dt", &Params::dt},
      {"v_max", &Params::v_max},
      {"u_max", &Params::u_max},
      {"body_radius", &Params::body_radius},
      {"target_reach", &Params::target_reach},
      {"track_gain", &Params::track_gain},
      {"handoff_hysteresis", &Params::handoff_hysteresis},
      {"avoid_gain", &Params::avoid_gain},
      {"spare_gain", &Params::spare_gain},
      {"link_rest", &Params::link_rest},
      {"edge_clearance", &Params::edge_clearance},
  };
  return fields;
}

}  // namespace

Params parse_params(std::istream& in, AlgorithmVariant fallback_base) {
  const auto entries = detail::read_kv(in);
  AlgorithmVariant base = fallback_base;
  for (const auto& e : entries) {
    if (e.key == "base") base = parse_variant(e.value);
  }
  Params p = default_params(base);
  for (const auto& e : entries) {
    if (e.key == "base") continue;
    if (e.key == "mirror_tree_force") {
      p.mirror_tree_force = detail::to_bool(e, e.value);
      continue;
    }
    if (e.key == "link_slack") {
      p.link_slack = detail::to_bool(e, e.value);
      continue;
    }
    const auto it = numeric_fields().find(e.key);
    if (it == numeric_fields().end()) {
      throw ConfigError("line " + std::to_string(e.line) + ": unknown parameter '" + e.key + "'");
    }
    p.*(it->second) = detail::to_double(e, e.value);
  }
  p.validate();
  return p;
}

Params load_params(const std::string& path, AlgorithmVariant fallback_base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open params file '" + path + "'");
  return parse_params(in, fallback_base);
}

void write_params(std::ostream& out, const Params& p) {
  const auto flags = out.flags();
  out << std::setprecision(17);
  for (const auto& [key, field] : numeric_fields()) out << key << " = " << p.*field << '\n';
  out << "mirror_tree_force = " << (p.mirror_tree_force ? "true" : "false") << '\n';
  out << "link_slack = " << (p.link_slack ? "true" : "false") << '\n';
  out.flags(flags);
}

}  // namespace swarmtree
