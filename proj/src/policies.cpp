#include "crowdsweep/policies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "crowdsweep/errors.hpp"
#include "crowdsweep/rng.hpp"

namespace crowdsweep {

namespace {

constexpr double kAtGoalEps = 1e-9;       // m; closer than this counts as arrived
constexpr double kCoincidentEps = 1e-9;   // m; centers closer than this share a point
constexpr double kParallelEps = 1e-12;    // unit-direction cross product threshold

// Direction-form line: feasible side is to the left of `direction`,
// i.e. (v - point) . perp(direction) >= 0.
struct Line {
  Vec2 point;
  Vec2 direction;
};

Line to_line(const HalfPlane& h) {
  return {h.point_on_line, Vec2{h.outward_normal.y, -h.outward_normal.x}};
}

double violation(const Line& line, Vec2 v) {
  return cross(line.direction, line.point - v);
}

// Fixed unit push direction for agent i in a degenerate geometry with
// agent j. Both agents hash the same unordered pair onto one axis and
// take opposite signs, so the pair separates instead of moving in step.
Vec2 deterministic_unit(std::size_t i, std::size_t j) {
  const std::size_t lo = std::min(i, j);
  const std::size_t hi = std::max(i, j);
  const uint64_t h = mix64(mix64(0x9e3779b97f4a7c15ull ^ lo) ^ hi);
  const double angle = 2.0 * M_PI * double(h >> 11) * 0x1.0p-53;
  const Vec2 axis = from_polar(angle, 1.0);
  return i == lo ? axis : -axis;
}

// Clamps the new optimum onto line `line_no` subject to the speed disc
// and all earlier lines. False means that slice of the feasible set is
// empty, which makes the whole prefix infeasible.
bool linear_program1(const std::vector<Line>& lines, std::size_t line_no,
                     double radius, Vec2 opt_velocity, bool direction_opt,
                     Vec2& result) {
  const Line& line = lines[line_no];
  const double dot_product = dot(line.point, line.direction);
  const double discriminant =
      dot_product * dot_product + radius * radius - norm_sq(line.point);
  if (discriminant < 0.0) return false;  // line misses the speed disc

  const double sqrt_disc = std::sqrt(discriminant);
  double t_left = -dot_product - sqrt_disc;
  double t_right = -dot_product + sqrt_disc;

  for (std::size_t i = 0; i < line_no; ++i) {
    const double denominator = cross(line.direction, lines[i].direction);
    const double numerator =
        cross(lines[i].direction, line.point - lines[i].point);
    if (std::fabs(denominator) <= kParallelEps) {
      if (numerator < 0.0) return false;  // parallel and fully outside
      continue;
    }
    const double t = numerator / denominator;
    if (denominator >= 0.0) {
      t_right = std::min(t_right, t);
    } else {
      t_left = std::max(t_left, t);
    }
    if (t_left > t_right) return false;
  }

  if (direction_opt) {
    result = dot(opt_velocity, line.direction) > 0.0
                 ? line.point + line.direction * t_right
                 : line.point + line.direction * t_left;
  } else {
    const double t = dot(line.direction, opt_velocity - line.point);
    result = line.point + line.direction * std::clamp(t, t_left, t_right);
  }
  return true;
}

// Sequential 2D LP over the lines and the speed disc. Returns
// lines.size() on success; otherwise the index of the line where the
// feasible set became empty (result then holds the last feasible value).
std::size_t linear_program2(const std::vector<Line>& lines, double radius,
                            Vec2 opt_velocity, bool direction_opt,
                            Vec2& result) {
  if (direction_opt) {
    result = opt_velocity * radius;  // opt_velocity is a unit direction here
  } else if (norm_sq(opt_velocity) > radius * radius) {
    result = normalized(opt_velocity) * radius;
  } else {
    result = opt_velocity;
  }

  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (violation(lines[i], result) > 0.0) {
      const Vec2 temp = result;
      if (!linear_program1(lines, i, radius, opt_velocity, direction_opt,
                           result)) {
        result = temp;
        return i;
      }
    }
  }
  return lines.size();
}

// Infeasible fallback: starting from the line that failed, minimize the
// largest violation by optimizing along each violated line's normal in
// the arrangement of bisecting lines.
void linear_program3(const std::vector<Line>& lines, std::size_t begin_line,
                     double radius, Vec2& result) {
  double distance = 0.0;
  for (std::size_t i = begin_line; i < lines.size(); ++i) {
    if (violation(lines[i], result) <= distance) continue;

    std::vector<Line> proj_lines;
    proj_lines.reserve(i);
    for (std::size_t j = 0; j < i; ++j) {
      Line line;
      const double determinant = cross(lines[i].direction, lines[j].direction);
      if (std::fabs(determinant) <= kParallelEps) {
        if (dot(lines[i].direction, lines[j].direction) > 0.0) {
          continue;  // same direction: j is redundant against i
        }
        line.point = (lines[i].point + lines[j].point) * 0.5;
      } else {
        line.point =
            lines[i].point +
            lines[i].direction *
                (cross(lines[j].direction, lines[i].point - lines[j].point) /
                 determinant);
      }
      line.direction = normalized(lines[j].direction - lines[i].direction);
      proj_lines.push_back(line);
    }

    const Vec2 temp = result;
    const Vec2 normal{-lines[i].direction.y, lines[i].direction.x};
    if (linear_program2(proj_lines, radius, normal, true, result) <
        proj_lines.size()) {
      // Rounding artifact: the projected program is feasible by
      // construction, so keep the last valid value.
      result = temp;
    }
    distance = violation(lines[i], result);
  }
}

}  // namespace

std::string_view policy_name(PolicyTag tag) {
  switch (tag) {
    case PolicyTag::Cv: return "cv";
    case PolicyTag::Static: return "static";
    case PolicyTag::Sfm: return "sfm";
    case PolicyTag::Orca: return "orca";
    case PolicyTag::Rp: return "rp";
    case PolicyTag::MpcCv: return "mpc_cv";
    case PolicyTag::MppiCv: return "mppi_cv";
  }
  throw InternalError("policy_name: unknown tag");
}

std::optional<PolicyTag> policy_from_name(std::string_view name) {
  if (name == "cv") return PolicyTag::Cv;
  if (name == "static") return PolicyTag::Static;
  if (name == "sfm") return PolicyTag::Sfm;
  if (name == "orca") return PolicyTag::Orca;
  if (name == "rp") return PolicyTag::Rp;
  if (name == "mpc_cv") return PolicyTag::MpcCv;
  if (name == "mppi_cv") return PolicyTag::MppiCv;
  return std::nullopt;
}

Vec2 cv_action(const AgentState& self, double dt) {
  const Vec2 to_goal = self.current_goal - self.position;
  const double dist = norm(to_goal);
  if (dist < kAtGoalEps) return {0.0, 0.0};
  const double speed = std::min(self.v_pref, dist / dt);
  return to_goal * (speed / dist);
}

Vec2 sfm_force(const AgentState& self, std::size_t self_index,
               const WorldSnapshot& snapshot, const SfmParams& params) {
  const Vec2 goal_dir =
      normalized_or(self.current_goal - self.position, {0.0, 0.0}, kAtGoalEps);
  Vec2 force = (goal_dir * self.v_pref - self.velocity) * (1.0 / params.tau);

  for (std::size_t j = 0; j < snapshot.agents.size(); ++j) {
    if (j == self_index) continue;
    const ObservedAgent& other = snapshot.agents[j];
    const Vec2 away = self.position - other.position;
    const double d = norm(away);
    const Vec2 dir = d < kCoincidentEps ? deterministic_unit(self_index, j)
                                        : away * (1.0 / d);
    const double magnitude = std::min(
        params.F_max,
        params.A * std::exp((self.radius + other.radius - d) / params.B));
    force += dir * magnitude;
  }

  const Workspace& ws = snapshot.workspace;
  struct Wall {
    double distance;
    Vec2 inward;
  };
  const Wall walls[4] = {
      {self.position.x, {1.0, 0.0}},
      {ws.width - self.position.x, {-1.0, 0.0}},
      {self.position.y, {0.0, 1.0}},
      {ws.length - self.position.y, {0.0, -1.0}},
  };
  for (const Wall& wall : walls) {
    const double magnitude = std::min(
        params.F_max,
        params.A_wall * std::exp((self.radius - wall.distance) / params.B_wall));
    force += wall.inward * magnitude;
  }
  return force;
}

Vec2 sfm_action(const AgentState& self, std::size_t self_index,
                const WorldSnapshot& snapshot, const SfmParams& params) {
  const Vec2 force = sfm_force(self, self_index, snapshot, params);
  return clamp_norm(self.velocity + force * snapshot.dt, self.v_pref);
}

std::optional<Vec2> solve_lp2(const std::vector<HalfPlane>& halfplanes,
                              Vec2 v_pref_vec, double v_max) {
  if (v_max <= 0.0) throw InternalError("solve_lp2: v_max must be positive");
  std::vector<Line> lines;
  lines.reserve(halfplanes.size());
  for (const HalfPlane& h : halfplanes) lines.push_back(to_line(h));
  Vec2 result;
  if (linear_program2(lines, v_max, v_pref_vec, false, result) <
      lines.size()) {
    return std::nullopt;
  }
  return result;
}

std::vector<HalfPlane> orca_halfplanes(const AgentState& self,
                                       std::size_t self_index,
                                       const WorldSnapshot& snapshot,
                                       const OrcaParams& params) {
  std::vector<HalfPlane> planes;
  const double range_sq = params.neighbor_dist * params.neighbor_dist;
  const double inv_horizon = 1.0 / params.time_horizon;

  for (std::size_t j = 0; j < snapshot.agents.size(); ++j) {
    if (j == self_index) continue;
    const ObservedAgent& other = snapshot.agents[j];
    const Vec2 rel_pos = other.position - self.position;
    if (norm_sq(rel_pos) > range_sq) continue;

    const Vec2 rel_vel = self.velocity - other.velocity;
    const double dist_sq = norm_sq(rel_pos);
    const double combined = self.radius + other.radius;
    const double combined_sq = combined * combined;

    Vec2 direction;
    Vec2 u;
    if (dist_sq > combined_sq) {
      // Velocity obstacle truncated at the avoidance horizon.
      const Vec2 w = rel_vel - rel_pos * inv_horizon;
      const double w_len_sq = norm_sq(w);
      const double dot1 = dot(w, rel_pos);
      if (dot1 < 0.0 && dot1 * dot1 > combined_sq * w_len_sq) {
        // Closest escape is through the cutoff arc.
        const double w_len = std::sqrt(w_len_sq);
        const Vec2 unit_w = w_len < kCoincidentEps
                                ? deterministic_unit(self_index, j)
                                : w * (1.0 / w_len);
        direction = {unit_w.y, -unit_w.x};
        u = unit_w * (combined * inv_horizon - w_len);
      } else {
        // Closest escape is through one of the legs.
        const double leg = std::sqrt(dist_sq - combined_sq);
        if (cross(rel_pos, w) > 0.0) {
          direction = Vec2{rel_pos.x * leg - rel_pos.y * combined,
                           rel_pos.x * combined + rel_pos.y * leg} *
                      (1.0 / dist_sq);
        } else {
          direction = Vec2{rel_pos.x * leg + rel_pos.y * combined,
                           -rel_pos.x * combined + rel_pos.y * leg} *
                      (-1.0 / dist_sq);
        }
        u = direction * dot(rel_vel, direction) - rel_vel;
      }
    } else {
      // Discs already overlap: push apart within one time step.
      const double inv_step = 1.0 / snapshot.dt;
      const Vec2 w = rel_vel - rel_pos * inv_step;
      const double w_len = norm(w);
      const Vec2 unit_w = w_len < kCoincidentEps
                              ? deterministic_unit(self_index, j)
                              : w * (1.0 / w_len);
      direction = {unit_w.y, -unit_w.x};
      u = unit_w * (combined * inv_step - w_len);
    }

    // Each agent takes half the correction; reciprocity cancels the rest.
    planes.push_back(HalfPlane{self.velocity + u * 0.5,
                               Vec2{-direction.y, direction.x}});
  }
  return planes;
}

Vec2 orca_action(const AgentState& self, std::size_t self_index,
                 const WorldSnapshot& snapshot, const OrcaParams& params) {
  const std::vector<HalfPlane> planes =
      orca_halfplanes(self, self_index, snapshot, params);
  std::vector<Line> lines;
  lines.reserve(planes.size());
  for (const HalfPlane& h : planes) lines.push_back(to_line(h));

  const Vec2 preferred = cv_action(self, snapshot.dt);
  Vec2 result;
  const std::size_t fail =
      linear_program2(lines, self.v_pref, preferred, false, result);
  if (fail < lines.size()) {
    linear_program3(lines, fail, self.v_pref, result);
  }
  // The programs keep |v| <= v_pref up to rounding; make it a guarantee.
  return clamp_norm(result, self.v_pref);
}

ActionSpace build_action_space(double v_pref) {
  if (v_pref <= 0.0) {
    throw InternalError("build_action_space: v_pref must be positive");
  }
  ActionSpace space;
  space.speeds.reserve(5);
  for (int i = 1; i <= 5; ++i) {
    space.speeds.push_back(v_pref * (std::exp(double(i) / 5.0) - 1.0) /
                           (M_E - 1.0));
  }
  space.headings.reserve(16);
  for (int k = 0; k < 16; ++k) {
    space.headings.push_back(2.0 * M_PI * double(k) / 16.0);
  }
  space.includes_stop = true;
  return space;
}

std::size_t action_count(const ActionSpace& space) {
  return space.speeds.size() * space.headings.size() +
         (space.includes_stop ? 1 : 0);
}

Vec2 action_at(const ActionSpace& space, std::size_t index) {
  const std::size_t moving = space.speeds.size() * space.headings.size();
  if (index < moving) {
    const double speed = space.speeds[index / space.headings.size()];
    const double heading = space.headings[index % space.headings.size()];
    return from_polar(heading, speed);
  }
  if (space.includes_stop && index == moving) return {0.0, 0.0};
  throw InternalError("action_at: index out of range");
}

Vec2 reactive_action(const AgentState& self, std::size_t self_index,
                     const WorldSnapshot& snapshot) {
  const ActionSpace space = build_action_space(self.v_pref);
  const double dt = snapshot.dt;

  // Others advance one constant-velocity step during the lookahead.
  std::vector<Disc> others;
  others.reserve(snapshot.agents.size());
  for (std::size_t j = 0; j < snapshot.agents.size(); ++j) {
    if (j == self_index) continue;
    const ObservedAgent& a = snapshot.agents[j];
    others.push_back(Disc{a.position + a.velocity * dt, a.radius});
  }

  const std::size_t total = action_count(space);
  Vec2 best_action{0.0, 0.0};
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < total; ++i) {
    const Vec2 a = action_at(space, i);
    const Disc next{self.position + a * dt, self.radius};
    bool free = true;
    for (const Disc& o : others) {
      if (discs_collide(next, o)) {
        free = false;
        break;
      }
    }
    if (!free) continue;
    const double d = distance(next.center, self.current_goal);
    if (d < best_dist) {
      best_dist = d;
      best_action = a;
    }
  }
  // best_action stays the stop action when everything was blocked.
  return best_action;
}

}  // namespace crowdsweep
