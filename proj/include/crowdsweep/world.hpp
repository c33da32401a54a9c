#pragma once

#include "crowdsweep/vec2.hpp"

namespace crowdsweep {

/// Rectangular room: the free region is the open rectangle
/// (0, width) x (0, length); everything outside it is obstacle.
struct Workspace {
  double width = 10.0;
  double length = 10.0;

  constexpr double free_area() const { return width * length; }
  constexpr Vec2 center() const { return {width / 2.0, length / 2.0}; }
};

struct Disc {
  Vec2 center;
  double radius = 0.0;
};

/// Minimum over the four walls of (distance from p to wall) - radius.
/// Negative means the disc overlaps the obstacle region.
double wall_clearance(Vec2 p, double radius, const Workspace& ws);

/// Shared obstacle rule applied to every commanded velocity: for each wall
/// the disc would cross within one step of dt, the velocity component
/// pointing toward that wall is zeroed; the tangential component survives.
Vec2 clamp_action_to_walls(Vec2 p, Vec2 v, double radius, double dt,
                           const Workspace& ws);

/// Strict overlap test; tangent discs do not collide.
bool discs_collide(const Disc& a, const Disc& b);

}  // namespace crowdsweep
