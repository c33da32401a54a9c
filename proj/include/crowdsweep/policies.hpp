#pragma once

#include <optional>
#include <vector>

#include "crowdsweep/agent.hpp"
#include "crowdsweep/vec2.hpp"

namespace crowdsweep {

// Feasible side is (v - point_on_line) . outward_normal >= 0.
struct HalfPlane {
  Vec2 point_on_line;
  Vec2 outward_normal;  // unit length
};

// A and B are calibrated so that SFM crowds yield early: an SFM-only crowd
// must leave a competent ego a success rate >= 0.85 at density 0.15.
struct SfmParams {
  double tau = 0.5;      // relaxation time, s
  double A = 4.0;        // agent repulsion strength, m/s^2
  double B = 0.8;        // agent repulsion range, m
  double A_wall = 5.0;   // wall repulsion strength, m/s^2
  double B_wall = 0.2;   // wall repulsion range, m
  double F_max = 10.0;   // per-term magnitude cap, m/s^2
};

struct OrcaParams {
  double neighbor_dist = 10.0;  // m; neighbors beyond this are ignored
  double time_horizon = 5.0;    // s; overlap case uses the step dt instead
};

struct ActionSpace {
  std::vector<double> speeds;    // ascending, in (0, v_pref]
  std::vector<double> headings;  // ascending, evenly covering [0, 2pi)
  bool includes_stop = true;
};

// Straight drive at min(v_pref, distance/dt); lands exactly on the goal.
Vec2 cv_action(const AgentState& self, double dt);

// Net social force: goal driving plus exponential agent and wall
// repulsion. Exposed separately so the integration step can be tested
// against a term-by-term evaluation.
Vec2 sfm_force(const AgentState& self, std::size_t self_index,
               const WorldSnapshot& snapshot, const SfmParams& params);

// velocity + dt * force, speed-clipped to v_pref.
Vec2 sfm_action(const AgentState& self, std::size_t self_index,
                const WorldSnapshot& snapshot, const SfmParams& params);

// Closest point to v_pref_vec inside all half-planes and the speed disc
// |v| <= v_max; nullopt when that set is empty.
std::optional<Vec2> solve_lp2(const std::vector<HalfPlane>& halfplanes,
                              Vec2 v_pref_vec, double v_max);

// One reciprocal avoidance constraint per neighbor in range. Exposed for
// geometry tests.
std::vector<HalfPlane> orca_halfplanes(const AgentState& self,
                                       std::size_t self_index,
                                       const WorldSnapshot& snapshot,
                                       const OrcaParams& params);

// Reciprocal collision avoidance toward the straight-to-goal velocity;
// infeasible constraint sets fall back to minimizing the worst violation,
// so a velocity always comes back.
Vec2 orca_action(const AgentState& self, std::size_t self_index,
                 const WorldSnapshot& snapshot, const OrcaParams& params);

// 5 exponentially spaced speeds x 16 headings plus stop: 81 actions.
ActionSpace build_action_space(double v_pref);

// Actions enumerate speed-major then heading, stop last; this fixes the
// tie rule (first minimum in that order wins).
Vec2 action_at(const ActionSpace& space, std::size_t index);
std::size_t action_count(const ActionSpace& space);

// Greedy one-step planner: picks the collision-free action whose next
// position is nearest the goal, propagating others one constant-velocity
// step; stops when everything is blocked.
Vec2 reactive_action(const AgentState& self, std::size_t self_index,
                     const WorldSnapshot& snapshot);

}  // namespace crowdsweep
