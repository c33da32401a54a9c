#include "crowdsweep/policies.hpp"

#include <cmath>
#include <optional>
#include <vector>

#include "crowdsweep/rng.hpp"
#include "doctest.h"

using namespace crowdsweep;

namespace {

const Workspace kRoom{10.0, 10.0};
// Large enough that wall repulsion underflows to zero at the center.
const Workspace kOpenField{1000.0, 1000.0};

AgentState make_agent(Vec2 pos, Vec2 vel, Vec2 goal, double radius = 0.3,
                      double v_pref = 1.0) {
  AgentState a;
  a.position = pos;
  a.velocity = vel;
  a.radius = radius;
  a.current_goal = goal;
  a.v_pref = v_pref;
  return a;
}

WorldSnapshot make_snapshot(const std::vector<AgentState>& agents,
                            const Workspace& ws, double dt = 0.25) {
  WorldSnapshot snap;
  snap.time = 0.0;
  snap.workspace = ws;
  snap.dt = dt;
  for (const AgentState& a : agents) snap.agents.push_back(observe(a));
  return snap;
}

// Term-by-term reimplementation of the social force, accumulating x and y
// separately so transcription slips in either implementation surface.
Vec2 oracle_sfm_force(const AgentState& self, std::size_t idx,
                      const WorldSnapshot& snap, const SfmParams& p) {
  double fx = 0.0;
  double fy = 0.0;
  const Vec2 to_goal = self.current_goal - self.position;
  const double goal_dist = norm(to_goal);
  double ex = 0.0;
  double ey = 0.0;
  if (goal_dist > 1e-9) {
    ex = to_goal.x / goal_dist;
    ey = to_goal.y / goal_dist;
  }
  fx += (self.v_pref * ex - self.velocity.x) / p.tau;
  fy += (self.v_pref * ey - self.velocity.y) / p.tau;

  for (std::size_t j = 0; j < snap.agents.size(); ++j) {
    if (j == idx) continue;
    const double dx = self.position.x - snap.agents[j].position.x;
    const double dy = self.position.y - snap.agents[j].position.y;
    const double d = std::sqrt(dx * dx + dy * dy);
    REQUIRE(d > 1e-9);  // fuzz keeps agents apart; coincidence tested aside
    const double mag = std::min(
        p.F_max,
        p.A * std::exp((self.radius + snap.agents[j].radius - d) / p.B));
    fx += mag * dx / d;
    fy += mag * dy / d;
  }

  const double wall_d[4] = {self.position.x,
                            snap.workspace.width - self.position.x,
                            self.position.y,
                            snap.workspace.length - self.position.y};
  const double wall_nx[4] = {1.0, -1.0, 0.0, 0.0};
  const double wall_ny[4] = {0.0, 0.0, 1.0, -1.0};
  for (int w = 0; w < 4; ++w) {
    const double mag = std::min(
        p.F_max, p.A_wall * std::exp((self.radius - wall_d[w]) / p.B_wall));
    fx += mag * wall_nx[w];
    fy += mag * wall_ny[w];
  }
  return {fx, fy};
}

struct LpInstance {
  std::vector<HalfPlane> planes;
  Vec2 v0;
  double v_max = 1.0;
};

// Exact reference for the projection LP: the optimum of a convex program
// is v0 itself, a projection onto one line, a line/line vertex, a
// line/circle vertex, or the radial point of the circle. Enumerate all of
// them, filter by feasibility, take the closest.
std::optional<Vec2> oracle_lp(const LpInstance& in) {
  constexpr double kTol = 1e-9;
  auto feasible = [&](Vec2 v) {
    if (norm(v) > in.v_max + kTol) return false;
    for (const HalfPlane& h : in.planes) {
      if (dot(v - h.point_on_line, h.outward_normal) < -kTol) return false;
    }
    return true;
  };

  std::vector<Vec2> candidates;
  candidates.push_back(in.v0);
  if (norm(in.v0) > 1e-12) {
    candidates.push_back(normalized(in.v0) * in.v_max);
  }
  const std::size_t n = in.planes.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 p = in.planes[i].point_on_line;
    const Vec2 nrm = in.planes[i].outward_normal;
    const Vec2 d{nrm.y, -nrm.x};

    candidates.push_back(p + d * dot(d, in.v0 - p));

    const double b = dot(p, d);
    const double disc = b * b + in.v_max * in.v_max - norm_sq(p);
    if (disc >= 0.0) {
      const double s = std::sqrt(disc);
      candidates.push_back(p + d * (-b - s));
      candidates.push_back(p + d * (-b + s));
    }

    for (std::size_t j = i + 1; j < n; ++j) {
      const Vec2 nj = in.planes[j].outward_normal;
      const double den = dot(d, nj);
      if (std::fabs(den) < 1e-12) continue;
      const double t = dot(in.planes[j].point_on_line - p, nj) / den;
      candidates.push_back(p + d * t);
    }
  }

  std::optional<Vec2> best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (const Vec2& c : candidates) {
    if (!feasible(c)) continue;
    const double dist = distance(c, in.v0);
    if (dist < best_dist) {
      best_dist = dist;
      best = c;
    }
  }
  return best;
}

LpInstance random_lp_instance(Rng& rng) {
  LpInstance in;
  in.v_max = rng.uniform(0.5, 2.0);
  in.v0 = {rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};
  const std::size_t count = rng.uniform_index(9);
  for (std::size_t i = 0; i < count; ++i) {
    const double angle = rng.uniform(0.0, 2.0 * M_PI);
    const double off = rng.uniform(0.0, 1.5);
    const Vec2 normal = from_polar(angle, 1.0);
    // Place the line so the feasible side sometimes excludes the origin.
    const Vec2 point = normal * (rng.coin() ? -off : off);
    in.planes.push_back(HalfPlane{point, normal});
  }
  return in;
}

}  // namespace

TEST_CASE("cv_action drives straight and lands on the goal") {
  CHECK(cv_action(make_agent({0, 0}, {0, 0}, {0, 5}), 0.25) == Vec2{0.0, 1.0});

  const Vec2 braking = cv_action(make_agent({0, 0}, {0, 0}, {0, 0.1}), 0.25);
  CHECK(braking.x == doctest::Approx(0.0));
  CHECK(braking.y == doctest::Approx(0.4));

  CHECK(cv_action(make_agent({3, 3}, {1, 0}, {3, 3}), 0.25) == Vec2{0.0, 0.0});
}

TEST_CASE("sfm driving term dominates in isolation") {
  const AgentState self =
      make_agent({500, 500}, {0, 0}, {505, 500});
  const WorldSnapshot snap = make_snapshot({self}, kOpenField);
  const Vec2 f = sfm_force(self, 0, snap, SfmParams{});
  CHECK(f.x == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(f.y == doctest::Approx(0.0));
  const Vec2 v = sfm_action(self, 0, snap, SfmParams{});
  CHECK(norm(v) <= self.v_pref + 1e-9);
  CHECK(v.x == doctest::Approx(0.5));
}

TEST_CASE("sfm repulsion is exactly A at touching distance") {
  // Goal on the spot and zero velocity kill the driving term.
  const AgentState self = make_agent({500, 500}, {0, 0}, {500, 500});
  const AgentState other = make_agent({500.6, 500}, {0, 0}, {0, 0});
  const WorldSnapshot snap = make_snapshot({self, other}, kOpenField);
  const SfmParams p;
  const Vec2 f = sfm_force(self, 0, snap, p);
  CHECK(norm(f) == doctest::Approx(p.A).epsilon(1e-9));
  CHECK(f.x == doctest::Approx(-p.A).epsilon(1e-9));
}

TEST_CASE("sfm coincident centers still produce an opposed, capped push") {
  const AgentState a = make_agent({500, 500}, {0, 0}, {500, 500});
  const AgentState b = make_agent({500, 500}, {0, 0}, {400, 400});
  const WorldSnapshot snap = make_snapshot({a, b}, kOpenField);
  const SfmParams p;
  const Vec2 fa = sfm_force(a, 0, snap, p);
  const Vec2 fb = sfm_force(b, 1, snap, p);
  CHECK(norm(fa) <= p.F_max + 1e-9);
  CHECK(norm(fa) > 0.0);
  // b's force adds a driving term toward its goal; strip it to compare.
  const Vec2 drive =
      normalized(b.current_goal - b.position) * b.v_pref * (1.0 / p.tau);
  const Vec2 fb_rep = fb - drive;
  CHECK(fa.x == doctest::Approx(-fb_rep.x).epsilon(1e-9));
  CHECK(fa.y == doctest::Approx(-fb_rep.y).epsilon(1e-9));
}

TEST_CASE("sfm force matches the summation oracle on random snapshots") {
  Rng rng(0x5f3cu);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t count = 1 + rng.uniform_index(6);
    std::vector<AgentState> agents;
    for (std::size_t i = 0; i < count; ++i) {
      agents.push_back(make_agent(
          {rng.uniform(0.5, 9.5), rng.uniform(0.5, 9.5)},
          {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)},
          {rng.uniform(0.5, 9.5), rng.uniform(0.5, 9.5)}));
    }
    const WorldSnapshot snap = make_snapshot(agents, kRoom);
    const std::size_t idx = rng.uniform_index(count);
    const Vec2 got = sfm_force(agents[idx], idx, snap, SfmParams{});
    const Vec2 want = oracle_sfm_force(agents[idx], idx, snap, SfmParams{});
    CHECK(got.x == doctest::Approx(want.x).epsilon(1e-12));
    CHECK(got.y == doctest::Approx(want.y).epsilon(1e-12));
  }
}

TEST_CASE("sfm force rotates with the snapshot") {
  // Quarter-turn about the room center maps walls onto walls, so the
  // full force (wall terms included) must rotate along.
  auto rot90 = [](Vec2 v, Vec2 c) {
    const Vec2 r = v - c;
    return Vec2{-r.y, r.x} + c;
  };
  Rng rng(0x0f0fu);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<AgentState> agents;
    const std::size_t count = 2 + rng.uniform_index(4);
    for (std::size_t i = 0; i < count; ++i) {
      agents.push_back(make_agent(
          {rng.uniform(0.5, 9.5), rng.uniform(0.5, 9.5)},
          {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)},
          {rng.uniform(0.5, 9.5), rng.uniform(0.5, 9.5)}));
    }
    const Vec2 c = kRoom.center();
    std::vector<AgentState> turned = agents;
    for (AgentState& a : turned) {
      a.position = rot90(a.position, c);
      a.current_goal = rot90(a.current_goal, c);
      a.velocity = rot90(a.velocity, {0, 0});
    }
    const Vec2 f = sfm_force(agents[0], 0, make_snapshot(agents, kRoom),
                             SfmParams{});
    const Vec2 g = sfm_force(turned[0], 0, make_snapshot(turned, kRoom),
                             SfmParams{});
    const Vec2 expected = rot90(f, {0, 0});
    CHECK(g.x == doctest::Approx(expected.x).epsilon(1e-9));
    CHECK(g.y == doctest::Approx(expected.y).epsilon(1e-9));
  }
}

TEST_CASE("solve_lp2 basics") {
  CHECK(solve_lp2({}, {0.3, 0.4}, 1.0) == Vec2{0.3, 0.4});

  // Preferred velocity outside the disc projects onto it.
  const auto clipped = solve_lp2({}, {3.0, 0.0}, 2.0);
  REQUIRE(clipped.has_value());
  CHECK(clipped->x == doctest::Approx(2.0));
  CHECK(clipped->y == doctest::Approx(0.0));

  const std::vector<HalfPlane> right{{{1.0, 0.0}, {1.0, 0.0}}};
  const auto projected = solve_lp2(right, {0.0, 0.0}, 2.0);
  REQUIRE(projected.has_value());
  CHECK(projected->x == doctest::Approx(1.0));
  CHECK(projected->y == doctest::Approx(0.0));

  const std::vector<HalfPlane> empty_set{
      {{1.0, 0.0}, {1.0, 0.0}},    // x >= 1
      {{-1.0, 0.0}, {-1.0, 0.0}},  // x <= -1
  };
  CHECK_FALSE(solve_lp2(empty_set, {0.0, 0.0}, 2.0).has_value());

  // Feasible lines that the disc cannot reach are also infeasible.
  const std::vector<HalfPlane> far{{{5.0, 0.0}, {1.0, 0.0}}};
  CHECK_FALSE(solve_lp2(far, {0.0, 0.0}, 1.0).has_value());
}

TEST_CASE("solve_lp2 agrees with the vertex-enumeration oracle") {
  Rng rng(0x10a9u);
  int feasible_count = 0;
  int infeasible_count = 0;
  for (int trial = 0; trial < 4000; ++trial) {
    const LpInstance in = random_lp_instance(rng);
    const auto want = oracle_lp(in);
    const auto got = solve_lp2(in.planes, in.v0, in.v_max);
    if (!want.has_value()) {
      CHECK_FALSE(got.has_value());
      ++infeasible_count;
      continue;
    }
    REQUIRE(got.has_value());
    ++feasible_count;
    // The feasible set is convex, so the projection is unique.
    CHECK(distance(*got, *want) <= 1e-7);
    CHECK(norm(*got) <= in.v_max + 1e-7);
    for (const HalfPlane& h : in.planes) {
      CHECK(dot(*got - h.point_on_line, h.outward_normal) >= -1e-7);
    }
  }
  CHECK(feasible_count > 1000);
  CHECK(infeasible_count > 100);
}

TEST_CASE("solve_lp2 never beats a dense feasible sample") {
  Rng rng(0xd15cu);
  for (int trial = 0; trial < 100; ++trial) {
    const LpInstance in = random_lp_instance(rng);
    const auto got = solve_lp2(in.planes, in.v0, in.v_max);
    double best_sampled = std::numeric_limits<double>::infinity();
    bool any_feasible = false;
    for (int s = 0; s < 20000; ++s) {
      const Vec2 v = rng.in_disc(in.v_max);
      bool ok = true;
      for (const HalfPlane& h : in.planes) {
        if (dot(v - h.point_on_line, h.outward_normal) < 0.0) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      any_feasible = true;
      best_sampled = std::min(best_sampled, distance(v, in.v0));
    }
    if (!any_feasible) continue;  // sampling missed or truly empty
    REQUIRE(got.has_value());
    // Strictly interior samples can never beat the true projection.
    CHECK(distance(*got, in.v0) <= best_sampled + 1e-9);
  }
}

TEST_CASE("orca with nothing in range reduces to cv") {
  const AgentState self = make_agent({2, 5}, {0, 0}, {8, 5});
  SUBCASE("alone") {
    const WorldSnapshot snap = make_snapshot({self}, kRoom);
    CHECK(orca_action(self, 0, snap, OrcaParams{}) ==
          cv_action(self, snap.dt));
  }
  SUBCASE("neighbor beyond neighbor_dist") {
    OrcaParams p;
    p.neighbor_dist = 2.0;
    const AgentState far = make_agent({9, 9}, {0, 0}, {1, 1});
    const WorldSnapshot snap = make_snapshot({self, far}, kRoom);
    CHECK(orca_halfplanes(self, 0, snap, p).empty());
    CHECK(orca_action(self, 0, snap, p) == cv_action(self, snap.dt));
  }
}

TEST_CASE("orca half-plane normals are unit length") {
  Rng rng(0x0acau);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<AgentState> agents;
    const std::size_t count = 2 + rng.uniform_index(6);
    for (std::size_t i = 0; i < count; ++i) {
      agents.push_back(make_agent(
          {rng.uniform(0.5, 9.5), rng.uniform(0.5, 9.5)},
          {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)},
          {rng.uniform(0.5, 9.5), rng.uniform(0.5, 9.5)}));
    }
    const WorldSnapshot snap = make_snapshot(agents, kRoom);
    for (const HalfPlane& h :
         orca_halfplanes(agents[0], 0, snap, OrcaParams{})) {
      CHECK(norm(h.outward_normal) == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("head-on orca pair commands mirrored velocities") {
  const AgentState a = make_agent({2, 5}, {1, 0}, {8, 5});
  const AgentState b = make_agent({8, 5}, {-1, 0}, {2, 5});
  const WorldSnapshot snap = make_snapshot({a, b}, kRoom);
  const Vec2 va = orca_action(a, 0, snap, OrcaParams{});
  const Vec2 vb = orca_action(b, 1, snap, OrcaParams{});
  // Swapping the agents is a half-turn of the plane about the midpoint.
  CHECK(norm(va) == doctest::Approx(norm(vb)).epsilon(1e-9));
  CHECK(vb.x == doctest::Approx(-va.x).epsilon(1e-9));
  CHECK(vb.y == doctest::Approx(-va.y).epsilon(1e-9));
}

TEST_CASE("orca surrounded by a crushing ring still yields a velocity") {
  const AgentState self = make_agent({5, 5}, {0, 0}, {9, 5});
  std::vector<AgentState> agents{self};
  for (int k = 0; k < 6; ++k) {
    const double angle = 2.0 * M_PI * double(k) / 6.0;
    // 0.5 m spacing with 0.3 radii: every pair overlaps.
    agents.push_back(
        make_agent(Vec2{5, 5} + from_polar(angle, 0.5), {0, 0}, {5, 5}));
  }
  const WorldSnapshot snap = make_snapshot(agents, kRoom);
  const auto planes = orca_halfplanes(self, 0, snap, OrcaParams{});
  CHECK(planes.size() == 6);
  // The constraint set really is empty; the fallback must still answer.
  CHECK_FALSE(
      solve_lp2(planes, cv_action(self, snap.dt), self.v_pref).has_value());
  const Vec2 v = orca_action(self, 0, snap, OrcaParams{});
  CHECK(std::isfinite(v.x));
  CHECK(std::isfinite(v.y));
  CHECK(norm(v) <= self.v_pref + 1e-9);
}

TEST_CASE("orca is translation invariant") {
  Rng rng(0x7a7au);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<AgentState> agents;
    const std::size_t count = 2 + rng.uniform_index(5);
    for (std::size_t i = 0; i < count; ++i) {
      agents.push_back(make_agent(
          {rng.uniform(1.0, 9.0), rng.uniform(1.0, 9.0)},
          {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)},
          {rng.uniform(1.0, 9.0), rng.uniform(1.0, 9.0)}));
    }
    const Vec2 shift{rng.uniform(-30.0, 30.0), rng.uniform(-30.0, 30.0)};
    std::vector<AgentState> moved = agents;
    for (AgentState& a : moved) {
      a.position += shift;
      a.current_goal += shift;
    }
    const Vec2 v0 =
        orca_action(agents[0], 0, make_snapshot(agents, kRoom), OrcaParams{});
    const Vec2 v1 =
        orca_action(moved[0], 0, make_snapshot(moved, kRoom), OrcaParams{});
    CHECK(std::fabs(v1.x - v0.x) <= 1e-9);
    CHECK(std::fabs(v1.y - v0.y) <= 1e-9);
  }
}

TEST_CASE("action space is 5 speeds x 16 headings plus stop") {
  const ActionSpace space = build_action_space(1.0);
  REQUIRE(space.speeds.size() == 5);
  REQUIRE(space.headings.size() == 16);
  CHECK(space.includes_stop);
  CHECK(action_count(space) == 81);

  CHECK(space.speeds.back() == 1.0);  // i=5 term cancels exactly
  for (std::size_t i = 1; i < space.speeds.size(); ++i) {
    CHECK(space.speeds[i] > space.speeds[i - 1]);
    CHECK(space.speeds[i] <= 1.0);
  }
  CHECK(space.speeds.front() > 0.0);

  for (std::size_t k = 1; k < space.headings.size(); ++k) {
    CHECK(space.headings[k] - space.headings[k - 1] ==
          doctest::Approx(2.0 * M_PI / 16.0).epsilon(1e-12));
  }
  CHECK(space.headings.front() == 0.0);
  CHECK(space.headings.back() < 2.0 * M_PI);

  CHECK(action_at(space, 80) == Vec2{0.0, 0.0});
  const Vec2 fastest_east = action_at(space, 64);
  CHECK(fastest_east.x == doctest::Approx(1.0));
  CHECK(fastest_east.y == doctest::Approx(0.0));
}

TEST_CASE("reactive planner sprints for the goal in an empty room") {
  const AgentState self = make_agent({1, 1}, {0, 0}, {8, 1});
  const WorldSnapshot snap = make_snapshot({self}, kRoom);
  const Vec2 v = reactive_action(self, 0, snap);
  CHECK(v.x == doctest::Approx(1.0));
  CHECK(v.y == doctest::Approx(0.0));
}

TEST_CASE("reactive planner stops when fully enclosed") {
  const AgentState self = make_agent({5, 5}, {0, 0}, {9, 5});
  std::vector<AgentState> agents{self};
  for (int k = 0; k < 16; ++k) {
    const double angle = 2.0 * M_PI * (double(k) + 0.37) / 16.0;
    AgentState blocker =
        make_agent(Vec2{5, 5} + from_polar(angle, 0.7), {0, 0}, {5, 5}, 0.4);
    agents.push_back(blocker);
  }
  const WorldSnapshot snap = make_snapshot(agents, kRoom);
  CHECK(reactive_action(self, 0, snap) == Vec2{0.0, 0.0});
}

TEST_CASE("reactive planner matches exhaustive evaluation") {
  // Oracle scores all 81 actions and picks the smallest (distance, index)
  // pair, which is the documented tie rule.
  auto oracle = [](const AgentState& self, std::size_t idx,
                   const WorldSnapshot& snap) {
    const ActionSpace space = build_action_space(self.v_pref);
    double best_d = std::numeric_limits<double>::infinity();
    std::size_t best_i = 80;
    for (std::size_t heading = 0; heading < 16; ++heading) {
      for (std::size_t speed = 0; speed < 5; ++speed) {
        const std::size_t index = speed * 16 + heading;
        const Vec2 a = action_at(space, index);
        const Vec2 next = self.position + a * snap.dt;
        bool blocked = false;
        for (std::size_t j = 0; j < snap.agents.size(); ++j) {
          if (j == idx) continue;
          const ObservedAgent& o = snap.agents[j];
          const Vec2 other_next = o.position + o.velocity * snap.dt;
          if (distance(next, other_next) < self.radius + o.radius) {
            blocked = true;
            break;
          }
        }
        if (blocked) continue;
        const double d = distance(next, self.current_goal);
        if (d < best_d || (d == best_d && index < best_i)) {
          best_d = d;
          best_i = index;
        }
      }
    }
    // Stop competes too when free.
    {
      bool blocked = false;
      for (std::size_t j = 0; j < snap.agents.size(); ++j) {
        if (j == idx) continue;
        const ObservedAgent& o = snap.agents[j];
        if (distance(self.position, o.position + o.velocity * snap.dt) <
            self.radius + o.radius) {
          blocked = true;
          break;
        }
      }
      if (!blocked) {
        const double d = distance(self.position, self.current_goal);
        if (d < best_d) best_i = 80;
      }
    }
    return action_at(build_action_space(self.v_pref), best_i);
  };

  SUBCASE("single blocker dead ahead") {
    const AgentState self = make_agent({2, 5}, {1, 0}, {8, 5});
    const AgentState wall = make_agent({2.7, 5}, {0, 0}, {2.7, 5});
    const WorldSnapshot snap = make_snapshot({self, wall}, kRoom);
    const Vec2 got = reactive_action(self, 0, snap);
    const Vec2 want = oracle(self, 0, snap);
    CHECK(got == want);
    CHECK(norm(got) > 0.0);  // sidestep, not freeze
  }

  SUBCASE("random crowds") {
    Rng rng(0x4e4eu);
    for (int trial = 0; trial < 500; ++trial) {
      std::vector<AgentState> agents;
      const std::size_t count = 2 + rng.uniform_index(8);
      for (std::size_t i = 0; i < count; ++i) {
        agents.push_back(make_agent(
            {rng.uniform(0.5, 9.5), rng.uniform(0.5, 9.5)},
            {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)},
            {rng.uniform(0.5, 9.5), rng.uniform(0.5, 9.5)}));
      }
      const WorldSnapshot snap = make_snapshot(agents, kRoom);
      CHECK(reactive_action(agents[0], 0, snap) == oracle(agents[0], 0, snap));
    }
  }
}

TEST_CASE("every policy respects the speed limit under fuzz") {
  Rng rng(0xfa57u);
  const SfmParams sfm_params;
  const OrcaParams orca_params;
  for (int trial = 0; trial < 100000; ++trial) {
    const std::size_t count = 1 + rng.uniform_index(6);
    std::vector<AgentState> agents;
    for (std::size_t i = 0; i < count; ++i) {
      agents.push_back(make_agent(
          {rng.uniform(0.3, 9.7), rng.uniform(0.3, 9.7)},
          from_polar(rng.uniform(0.0, 2.0 * M_PI), rng.uniform(0.0, 1.0)),
          {rng.uniform(0.3, 9.7), rng.uniform(0.3, 9.7)}));
    }
    const WorldSnapshot snap = make_snapshot(agents, kRoom);
    const AgentState& self = agents[0];
    const double cap = self.v_pref + 1e-9;

    CHECK(norm(cv_action(self, snap.dt)) <= cap);
    CHECK(norm(sfm_action(self, 0, snap, sfm_params)) <= cap);
    CHECK(norm(orca_action(self, 0, snap, orca_params)) <= cap);
    if (trial % 10 == 0) {
      CHECK(norm(reactive_action(self, 0, snap)) <= cap);
    }
  }
}
