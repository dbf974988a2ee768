#include "swarmtree/motion.hpp"

#include <algorithm>
#include <cmath>

namespace swarmtree {

namespace {
constexpr double kMinDistance = 1e-6;
}

double tree_force(double d, double delta, double epsilon) {
  d = std::max(d, kMinDistance);
  const double r2 = (delta / d) * (delta / d);
  return epsilon / d * (r2 - r2 * r2);
}

double tree_force(double d, const Params& params) {
  return tree_force(d, params.delta, params.epsilon);
}

Vec2 tree_force_vec(Vec2 to_partner, const Params& params) {
  const double d = to_partner.norm();
  if (d < kMinDistance) return {};
  double f = tree_force(d, params.effective_link_rest(), params.epsilon);
  if (params.link_slack && f < 0.0) {
    // compressed links are free down to the avoidance range, then repel like strangers
    const double gain = params.effective_avoid_gain();
    f = d < params.A_avoid ? -gain * (params.A_avoid - d) / params.A_avoid : 0.0;
  }
  return to_partner * (f / d);
}

Vec2 target_force(Vec2 to_target, const Params& params) {
  const double d = to_target.norm();
  if (d < params.target_reach) return {};
  return to_target * (params.tau / d);
}

Vec2 avoid_force(std::span<const Vec2> others, const Params& params) {
  const double gain = params.effective_avoid_gain();
  Vec2 u;
  for (const Vec2& rel : others) {
    const double d = std::max(rel.norm(), kMinDistance);
    if (d >= params.A_avoid) continue;
    const Vec2 away = rel.norm() < kMinDistance ? Vec2{1.0, 0.0} : -rel / d;
    u += away * (gain * (params.A_avoid - d) / params.A_avoid);
  }
  return u;
}

Vec2 avoid_force(const NeighborTable& nbrs, std::span<const RobotId> kin, const Params& params) {
  std::vector<Vec2> others;
  for (const auto& [id, e] : nbrs) {
    if (std::find(kin.begin(), kin.end(), id) != kin.end()) continue;
    if (e.range() < params.A_avoid) others.push_back(e.position());
  }
  return avoid_force(others, params);
}

Vec2 edge_crossing_force(std::span<const Segment> segments, Vec2 heading, const Params& params) {
  const double m = params.edge_clearance;
  Vec2 u;
  if (m <= 0.0) return u;
  for (const Segment& s : segments) {
    const Vec2 ab = s.b - s.a;
    const double len2 = ab.dot(ab);
    if (len2 < kMinDistance) continue;
    const double t = -s.a.dot(ab) / len2;
    if (t <= 0.0 || t >= 1.0) continue;
    const Vec2 closest = s.a + ab * t;
    const double d = closest.norm();
    if (d >= m) continue;
    Vec2 normal = Vec2{-ab.y, ab.x} / std::sqrt(len2);
    if (heading.dot(normal) < 0.0 || (heading.dot(normal) == 0.0 && closest.dot(normal) > 0.0)) {
      normal = -normal;
    }
    u += normal * params.v_max;
  }
  return u;
}

ForceBreakdown compose(const MotionInputs& in, const Params& params) {
  ForceBreakdown out;
  out.u_tree_old = in.u_tree_old;
  out.u_tree_new = in.u_tree_new;
  out.u_target = in.u_target;
  out.u_avoid = in.u_avoid;
  out.u_spare = in.u_spare;

  Vec2 pull;
  for (const Vec2& p : in.parents) {
    const double d = p.norm();
    if (d > params.E) {
      out.emergency = true;
      pull += p / d;
    }
    if (d > params.S) out.gate = 0;
  }
  if (out.emergency) {
    out.gate = 0;
    const double n = pull.norm();
    out.u_total = n > 0.0 ? pull * (params.u_max / n) : Vec2{};
    return out;
  }
  out.u_total = in.u_tree_old + in.u_tree_new + (in.u_target + in.u_avoid) * out.gate + in.u_spare;
  return out;
}

Vec2 acceleration_command(Vec2 u_total_world, Vec2 velocity_world, const Params& params) {
  return (u_total_world - velocity_world) * params.track_gain;
}

}  // namespace swarmtree
