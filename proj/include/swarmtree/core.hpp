#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace swarmtree {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2() = default;
  constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator-() const { return {-x, -y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
  constexpr Vec2& operator+=(Vec2 o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr Vec2& operator-=(Vec2 o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  constexpr bool operator==(const Vec2&) const = default;

  double norm() const { return std::hypot(x, y); }
  constexpr double dot(Vec2 o) const { return x * o.x + y * o.y; }
  constexpr double cross(Vec2 o) const { return x * o.y - y * o.x; }
  bool finite() const { return std::isfinite(x) && std::isfinite(y); }

  /// Rotates counter-clockwise by `angle` radians.
  Vec2 rotated(double angle) const {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    return {c * x - s * y, s * x + c * y};
  }

  /// Returns this vector scaled down to `max_norm` if longer, unchanged otherwise.
  Vec2 clamped(double max_norm) const {
    const double n = norm();
    if (n > max_norm && n > 0.0) return *this * (max_norm / n);
    return *this;
  }
};

inline constexpr Vec2 operator*(double s, Vec2 v) { return v * s; }

/// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

/// Dense robot index, 0..N-1. Lower ids win every tie.
using RobotId = std::uint32_t;

enum class Role { Root, Worker, Connector, Spare };
enum class AlgorithmVariant { Outwards, Inwards };

std::string_view to_string(Role r);
std::string_view to_string(AlgorithmVariant v);
AlgorithmVariant parse_variant(std::string_view s);

/// Configuration rejected at load or generation time.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Internal invariant violated while simulating; the run is invalid.
class SimulationFault : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// All lengths in meters, times in seconds.
struct Params {
  // Optimized design parameters.
  double S = 0.0;        // safe range between parent and child
  double A_avoid = 0.0;  // non-parent-child avoidance range
  double delta = 0.0;    // ideal parent-child distance
  double epsilon = 0.0;  // parent-child interaction gain
  double tau = 0.0;      // target attraction magnitude
  double R = 0.0;        // reconfiguration period
  double I = 0.0;        // information liveness period
  double E = 0.0;        // spare recruitment / emergency threshold
  double J = 0.0;        // distance to edge midpoint at which a spare becomes a connector

  // Simulator constants.
  double C = 2.5;
  double dt = 0.1;
  double v_max = 0.5;
  double u_max = 2.0;
  double body_radius = 0.07;
  double target_reach = 0.10;
  double track_gain = 4.0;           // u is tracked as a velocity setpoint with this gain, 1/s
  double handoff_hysteresis = 0.05;  // root handoff margin, m
  double avoid_gain = 0.0;           // avoidance ramp peak; <= 0 means use tau
  double spare_gain = 2.0;           // spare controller stiffness, 1/s^2
  bool mirror_tree_force = true;     // parents also feel their children's link force
  bool link_slack = true;            // compressed links are free above A_avoid in the motion
  double edge_clearance = 0.21;      // spares closer than this to a tree edge hurry across; 0 disables
  double link_rest = 0.0;            // rest length of the link potential in the motion; <= 0 means E

  /// Throws ConfigError when a hard invariant is violated.
  void validate() const;
  /// Soft inconsistencies worth reporting (e.g. S > E).
  std::vector<std::string> warnings() const;

  double effective_avoid_gain() const { return avoid_gain > 0.0 ? avoid_gain : tau; }
  double effective_link_rest() const { return link_rest > 0.0 ? link_rest : E; }
  /// Liveness period expressed in whole ticks.
  std::int64_t liveness_ticks() const;
  std::int64_t ticks_for(double seconds) const;

  bool operator==(const Params&) const = default;
};

Params default_params(AlgorithmVariant variant);

/// Deterministic per-robot random stream. Same (run_seed, robot) always
/// yields the same sequence on every platform.
class RngStream {
 public:
  RngStream(std::uint64_t run_seed, RobotId robot);

  std::uint64_t next_u64();
  /// Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::mt19937_64 engine_;
};

RngStream seeded_rng(std::uint64_t run_seed, RobotId robot);

}  // namespace swarmtree
