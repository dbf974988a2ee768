#include "swarmtree/collective.hpp"

namespace swarmtree {

std::int64_t count_step(const CountState& self) {
  const auto d = static_cast<std::int64_t>(self.depth);
  switch (self.child_reports.size()) {
    case 0: return d;
    case 1: return self.child_reports.begin()->second;
    default: {
      // Summed over children only; summing over every neighbor would count the parent.
      std::int64_t c = d;
      for (const auto& [id, cj] : self.child_reports) c += cj - d;
      return c;
    }
  }
}

Vec2 centroid_accumulator(const CentroidState& self) {
  Vec2 a;
  for (const auto& [id, child] : self.child_q) a += child.q.rotated(child.rel_orientation);
  return a;
}

Vec2 centroid_step(const CentroidState& self, const CountState& count) {
  const Vec2 a = centroid_accumulator(self);
  const std::int64_t c = count_step(count);
  if (self.p_parent) {
    const auto descendants = c - static_cast<std::int64_t>(count.depth);
    return a - *self.p_parent * static_cast<double>(descendants + 1);
  }
  return a / static_cast<double>(c);
}

std::optional<RobotId> choose_handoff(Vec2 centroid, std::span<const HandoffCandidate> candidates,
                                      double hysteresis) {
  const double own = centroid.norm();
  std::optional<RobotId> best;
  double best_d = 0.0;
  for (const auto& cand : candidates) {
    const double d = (centroid - cand.position).norm();
    if (own - d <= hysteresis) continue;
    if (!best || d < best_d || (d == best_d && cand.id < *best)) {
      best = cand.id;
      best_d = d;
    }
  }
  return best;
}

Vec2 reexpress_centroid(Vec2 centroid_sender_frame, const SituatedReception& rec) {
  return to_local_frame(rec) + sender_to_receiver(centroid_sender_frame, rec);
}

}  // namespace swarmtree
