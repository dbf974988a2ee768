#include "swarmtree/core.hpp"

#include <numbers>
#include <sstream>

namespace swarmtree {

double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  if (a > std::numbers::pi) a -= two_pi;
  return a;
}

std::string_view to_string(Role r) {
  switch (r) {
    case Role::Root: return "root";
    case Role::Worker: return "worker";
    case Role::Connector: return "connector";
    case Role::Spare: return "spare";
  }
  return "?";
}

std::string_view to_string(AlgorithmVariant v) {
  return v == AlgorithmVariant::Outwards ? "outwards" : "inwards";
}

AlgorithmVariant parse_variant(std::string_view s) {
  if (s == "outwards") return AlgorithmVariant::Outwards;
  if (s == "inwards") return AlgorithmVariant::Inwards;
  throw ConfigError("unknown algorithm variant '" + std::string(s) + "'");
}

void Params::validate() const {
  const std::pair<const char*, double> positive[] = {
      {"S", S},   {"A", A_avoid},         {"delta", delta},     {"epsilon", epsilon},
      {"tau", tau}, {"R", R},             {"I", I},             {"E", E},
      {"J", J},   {"C", C},               {"dt", dt},           {"v_max", v_max},
      {"u_max", u_max}, {"body_radius", body_radius}, {"target_reach", target_reach}};
  for (const auto& [name, value] : positive) {
    if (!std::isfinite(value) || value <= 0.0) {
      throw ConfigError(std::string("parameter ") + name + " must be finite and > 0");
    }
  }
  if (!std::isfinite(track_gain) || track_gain <= 0.0) throw ConfigError("track_gain must be > 0");
  if (!std::isfinite(handoff_hysteresis) || handoff_hysteresis < 0.0) {
    throw ConfigError("handoff_hysteresis must be >= 0");
  }
  if (!std::isfinite(link_rest)) throw ConfigError("link_rest must be finite");
  if (!std::isfinite(edge_clearance) || edge_clearance < 0.0) {
    throw ConfigError("edge_clearance must be finite and >= 0");
  }
  if (!(S < C)) throw ConfigError("S must be smaller than C");
  if (!(E < C)) throw ConfigError("E must be smaller than C");
  if (!(J < E)) throw ConfigError("J must be smaller than E");
}

std::vector<std::string> Params::warnings() const {
  std::vector<std::string> out;
  if (S > E) {
    std::ostringstream os;
    os << "S (" << S << " m) > E (" << E
       << " m): the gate-0 band is empty, target and avoidance forces are cut at the emergency "
          "threshold";
    out.push_back(os.str());
  }
  if (delta >= C) out.push_back("delta >= C: the ideal parent-child distance is out of range");
  if (delta > E) {
    std::ostringstream os;
    os << "delta (" << delta << " m) > E (" << E
       << " m): parent-child links are repulsive everywhere below the emergency threshold";
    out.push_back(os.str());
  }
  return out;
}

std::int64_t Params::ticks_for(double seconds) const {
  return static_cast<std::int64_t>(std::llround(seconds / dt));
}

std::int64_t Params::liveness_ticks() const { return ticks_for(I); }

Params default_params(AlgorithmVariant variant) {
  Params p;
  if (variant == AlgorithmVariant::Outwards) {
    p.S = 1.3893;
    p.A_avoid = 0.4316;
    p.delta = 1.90;
    p.epsilon = 10.0;
    p.tau = 0.49;
    p.R = 38.8;
    p.I = 1.2;
    p.E = 1.3209;
    p.J = 0.0979;
  } else {
    p.S = 1.3525581;
    p.A_avoid = 0.4099;
    p.delta = 1.540841;
    p.epsilon = 10.0;
    p.tau = 0.2539;
    p.R = 44.0;
    p.I = 0.5;
    p.E = 1.321353;
    p.J = 0.066395;
  }
  return p;
}

RngStream::RngStream(std::uint64_t run_seed, RobotId robot) {
  std::seed_seq seq{static_cast<std::uint32_t>(run_seed & 0xffffffffu),
                    static_cast<std::uint32_t>(run_seed >> 32), static_cast<std::uint32_t>(robot),
                    0x5eedu};
  engine_.seed(seq);
}

std::uint64_t RngStream::next_u64() { return engine_(); }

double RngStream::uniform() {
  // 53 high bits; std::uniform_real_distribution is not portable across standard libraries.
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

RngStream seeded_rng(std::uint64_t run_seed, RobotId robot) { return RngStream(run_seed, robot); }

}  // namespace swarmtree
