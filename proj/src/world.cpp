#include "crowdsweep/world.hpp"

#include <algorithm>

namespace crowdsweep {

double wall_clearance(Vec2 p, double radius, const Workspace& ws) {
  const double d =
      std::min(std::min(p.x, ws.width - p.x), std::min(p.y, ws.length - p.y));
  return d - radius;
}

Vec2 clamp_action_to_walls(Vec2 p, Vec2 v, double radius, double dt,
                           const Workspace& ws) {
  const Vec2 next = p + v * dt;
  Vec2 out = v;
  if (v.x < 0.0 && next.x - radius < 0.0) {
    out.x = 0.0;
  }
  if (v.x > 0.0 && next.x + radius > ws.width) {
    out.x = 0.0;
  }
  if (v.y < 0.0 && next.y - radius < 0.0) {
    out.y = 0.0;
  }
  if (v.y > 0.0 && next.y + radius > ws.length) {
    out.y = 0.0;
  }
  return out;
}

bool discs_collide(const Disc& a, const Disc& b) {
  const double r = a.radius + b.radius;
  return (a.center - b.center).norm_sq() < r * r;
}

}  // namespace crowdsweep
