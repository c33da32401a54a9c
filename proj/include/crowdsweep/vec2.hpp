#pragma once

#include <cmath>

namespace crowdsweep {

/// Plain 2D vector; doubles everywhere, meters and m/s in this codebase.
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

  Vec2& operator+=(Vec2 o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  Vec2& operator-=(Vec2 o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  Vec2& operator*=(double s) {
    x *= s;
    y *= s;
    return *this;
  }

  constexpr bool operator==(const Vec2&) const = default;

  constexpr double norm_sq() const { return x * x + y * y; }
};

constexpr Vec2 operator*(double s, Vec2 v) { return v * s; }

constexpr double norm_sq(Vec2 v) { return v.norm_sq(); }

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

/// z-component of the 3D cross product; positive when b is ccw of a.
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

/// Counterclockwise quarter turn.
constexpr Vec2 perp(Vec2 v) { return {-v.y, v.x}; }

inline double norm(Vec2 v) { return std::sqrt(v.norm_sq()); }

inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

inline Vec2 normalized(Vec2 v) {
  const double n = norm(v);
  return {v.x / n, v.y / n};
}

inline Vec2 normalized_or(Vec2 v, Vec2 fallback, double eps = 1e-12) {
  const double n = norm(v);
  return n > eps ? v / n : fallback;
}

inline Vec2 clamp_norm(Vec2 v, double max_norm) {
  const double n2 = v.norm_sq();
  if (n2 > max_norm * max_norm) {
    return v * (max_norm / std::sqrt(n2));
  }
  return v;
}

inline double heading_of(Vec2 v) { return std::atan2(v.y, v.x); }

inline Vec2 from_polar(double theta, double r) {
  return {r * std::cos(theta), r * std::sin(theta)};
}

}  // namespace crowdsweep
