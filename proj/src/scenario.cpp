#include "crowdsweep/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <utility>

#include "crowdsweep/errors.hpp"
#include "json.hpp"

namespace crowdsweep {
namespace {

using nlohmann::json;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string format_level(const char* prefix, const char* fmt, double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, value);
  return std::string(prefix) + buf;
}

std::vector<SweepCondition> build_conditions() {
  std::vector<SweepCondition> out;
  int global = 0;

  const double densities[] = {0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35};
  for (int i = 0; i < 7; ++i) {
    SweepCondition c;
    c.factor = Factor::Density;
    c.level_index = i;
    c.global_index = global++;
    c.name = format_level("density_", "%.2f", densities[i]);
    c.density = densities[i];
    out.push_back(std::move(c));
  }

  const DirectionalityTag tags[] = {
      DirectionalityTag::PassingOnly,    DirectionalityTag::CrossingOnly,
      DirectionalityTag::PassingAndCrossing,
      DirectionalityTag::CircleCrossing, DirectionalityTag::Random};
  for (int i = 0; i < 5; ++i) {
    SweepCondition c;
    c.factor = Factor::Directionality;
    c.level_index = i;
    c.global_index = global++;
    c.name = std::string("dir_") + std::string(directionality_name(tags[i]));
    c.directionality = tags[i];
    out.push_back(std::move(c));
  }

  struct { const char* name; MixtureSpec mix; } mixtures[] = {
      {"mix_sfm_only", {0, 15, 0, 0}},
      {"mix_orca_only", {15, 0, 0, 0}},
      {"mix_1", {8, 7, 0, 0}},
      {"mix_2", {5, 5, 2, 3}},
      {"mix_3", {4, 4, 4, 3}},
  };
  for (int i = 0; i < 5; ++i) {
    SweepCondition c;
    c.factor = Factor::PolicyMixture;
    c.level_index = i;
    c.global_index = global++;
    c.name = mixtures[i].name;
    c.mixture = mixtures[i].mix;
    out.push_back(std::move(c));
  }

  const double widths[] = {4.5, 4.0, 3.5, 3.0, 2.5, 2.0, 1.5};
  for (int i = 0; i < 7; ++i) {
    SweepCondition c;
    c.factor = Factor::Width;
    c.level_index = i;
    c.global_index = global++;
    c.name = format_level("width_", "%.1f", widths[i]);
    c.width = widths[i];
    out.push_back(std::move(c));
  }

  return out;
}

double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }

struct ResolvedPair {
  Vec2 start;
  Vec2 goal;
  DirectionalityTag resolved;  // never PassingAndCrossing
};

// A lane endpoint sits in the band between the wall clearance line and
// the margin line, so |start - goal| along the travel axis is never below
// span - 2*margin. The band depth also decouples opposite lanes in
// narrow rooms; packing 35 starts at 0.8 m spacing needs all of it.
double lane_coordinate(bool near_wall, double span, Rng& rng,
                       const ScenarioParams& p) {
  const double t = rng.uniform(p.radius, std::min(p.margin, span / 2.0));
  return near_wall ? t : span - t;
}

// Start in one lane band, goal in the opposite band within the allowed
// deviation cone. along_y: travel parallel to the ego's axis (passing).
ResolvedPair lane_pair(bool along_y, const Workspace& ws, Rng& rng,
                       const ScenarioParams& p) {
  const double across_span = along_y ? ws.width : ws.length;
  const double travel_span = along_y ? ws.length : ws.width;
  const double a_lo = p.radius;
  const double a_hi = across_span - p.radius;
  if (a_hi < a_lo || travel_span - p.margin < p.margin ||
      p.margin < p.radius) {
    throw ConfigError("workspace too small for lane placement");
  }

  const bool from_near = rng.coin();
  const double t_start = lane_coordinate(from_near, travel_span, rng, p);
  const double t_goal = lane_coordinate(!from_near, travel_span, rng, p);
  const double a_start = rng.uniform(a_lo, a_hi);
  const double dev = std::tan(deg2rad(p.lane_dev_deg)) *
                     std::abs(t_goal - t_start);
  const double a_goal = rng.uniform(std::max(a_lo, a_start - dev),
                                    std::min(a_hi, a_start + dev));

  ResolvedPair r;
  r.resolved = along_y ? DirectionalityTag::PassingOnly
                       : DirectionalityTag::CrossingOnly;
  if (along_y) {
    r.start = {a_start, t_start};
    r.goal = {a_goal, t_goal};
  } else {
    r.start = {t_start, a_start};
    r.goal = {t_goal, a_goal};
  }
  return r;
}

double ring_radius(const Workspace& ws, const ScenarioParams& p) {
  const double r = std::min(ws.width, ws.length) / 2.0 - p.circle_inset;
  if (r <= 0.0) {
    throw ConfigError("workspace too small for circle crossing");
  }
  return r;
}

ResolvedPair circle_pair(const Workspace& ws, Rng& rng,
                         const ScenarioParams& p) {
  const double radius = ring_radius(ws, p);
  const Vec2 c = ws.center();
  const Vec2 dir = from_polar(rng.uniform(0.0, kTwoPi), 1.0);
  ResolvedPair r;
  r.resolved = DirectionalityTag::CircleCrossing;
  r.start = c + dir * radius + rng.in_disc(p.circle_noise);
  r.goal = c - dir * radius + rng.in_disc(p.circle_noise);
  return r;
}

Vec2 uniform_free_point(const Workspace& ws, Rng& rng,
                        const ScenarioParams& p) {
  return {rng.uniform(p.radius, ws.width - p.radius),
          rng.uniform(p.radius, ws.length - p.radius)};
}

ResolvedPair random_pair(const Workspace& ws, Rng& rng,
                         const ScenarioParams& p) {
  ResolvedPair r;
  r.resolved = DirectionalityTag::Random;
  r.start = uniform_free_point(ws, rng, p);
  for (int attempt = 0; attempt < p.max_attempts; ++attempt) {
    r.goal = uniform_free_point(ws, rng, p);
    if (distance(r.start, r.goal) >= p.random_min_travel) return r;
  }
  throw ConfigError("no goal far enough from a random start");
}

ResolvedPair sample_pair(DirectionalityTag tag, const Workspace& ws, Rng& rng,
                         const ScenarioParams& p) {
  switch (tag) {
    case DirectionalityTag::PassingOnly:
      return lane_pair(true, ws, rng, p);
    case DirectionalityTag::CrossingOnly:
      return lane_pair(false, ws, rng, p);
    case DirectionalityTag::PassingAndCrossing:
      return lane_pair(rng.coin(), ws, rng, p);
    case DirectionalityTag::CircleCrossing:
      return circle_pair(ws, rng, p);
    case DirectionalityTag::Random:
      return random_pair(ws, rng, p);
  }
  throw InternalError("unhandled directionality tag");
}

// Next goal continues the agent's travel pattern from wherever it is now.
Vec2 next_goal(DirectionalityTag resolved, Vec2 current, const Workspace& ws,
               Rng& rng, const ScenarioParams& p) {
  switch (resolved) {
    case DirectionalityTag::PassingOnly:
    case DirectionalityTag::CrossingOnly: {
      const bool along_y = resolved == DirectionalityTag::PassingOnly;
      const double across_span = along_y ? ws.width : ws.length;
      const double travel_span = along_y ? ws.length : ws.width;
      const double cur_travel = along_y ? current.y : current.x;
      const double cur_across = along_y ? current.x : current.y;
      // Cross back over the midline to the far lane.
      const double t_goal = lane_coordinate(cur_travel > travel_span / 2.0,
                                            travel_span, rng, p);
      const double dev = std::tan(deg2rad(p.lane_dev_deg)) *
                         std::abs(t_goal - cur_travel);
      const double lo = p.radius;
      const double hi = across_span - p.radius;
      const double a_goal = rng.uniform(std::max(lo, cur_across - dev),
                                        std::min(hi, cur_across + dev));
      return along_y ? Vec2{a_goal, t_goal} : Vec2{t_goal, a_goal};
    }
    case DirectionalityTag::CircleCrossing: {
      const double radius = ring_radius(ws, p);
      const Vec2 c = ws.center();
      const Vec2 dir = normalized_or(current - c, Vec2{1.0, 0.0});
      return c - dir * radius + rng.in_disc(p.circle_noise);
    }
    case DirectionalityTag::Random: {
      for (int attempt = 0; attempt < p.max_attempts; ++attempt) {
        const Vec2 g = uniform_free_point(ws, rng, p);
        if (distance(current, g) >= p.random_min_travel) return g;
      }
      throw ConfigError("no goal far enough from the current position");
    }
    case DirectionalityTag::PassingAndCrossing:
      break;
  }
  throw InternalError("goal chain requires a resolved travel pattern");
}

json vec_json(Vec2 v) { return json::array({v.x, v.y}); }

Vec2 vec_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) {
    throw IoError("scenario: expected a 2-element coordinate array");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

std::string_view factor_name(Factor f) {
  switch (f) {
    case Factor::Density: return "density";
    case Factor::Directionality: return "directionality";
    case Factor::Width: return "width";
    case Factor::PolicyMixture: return "mixture";
  }
  throw InternalError("unhandled factor");
}

std::optional<Factor> factor_from_name(std::string_view name) {
  if (name == "density") return Factor::Density;
  if (name == "directionality") return Factor::Directionality;
  if (name == "width") return Factor::Width;
  if (name == "mixture") return Factor::PolicyMixture;
  return std::nullopt;
}

std::string_view directionality_name(DirectionalityTag tag) {
  switch (tag) {
    case DirectionalityTag::PassingOnly: return "passing";
    case DirectionalityTag::CrossingOnly: return "crossing";
    case DirectionalityTag::PassingAndCrossing: return "passing_crossing";
    case DirectionalityTag::CircleCrossing: return "circle";
    case DirectionalityTag::Random: return "random";
  }
  throw InternalError("unhandled directionality tag");
}

std::optional<DirectionalityTag> directionality_from_name(
    std::string_view name) {
  if (name == "passing") return DirectionalityTag::PassingOnly;
  if (name == "crossing") return DirectionalityTag::CrossingOnly;
  if (name == "passing_crossing") return DirectionalityTag::PassingAndCrossing;
  if (name == "circle") return DirectionalityTag::CircleCrossing;
  if (name == "random") return DirectionalityTag::Random;
  return std::nullopt;
}

MixtureSpec default_mixture(int n) {
  MixtureSpec m;
  m.orca = (n + 1) / 2;
  m.sfm = n / 2;
  return m;
}

const std::vector<SweepCondition>& all_conditions() {
  static const std::vector<SweepCondition> table = build_conditions();
  return table;
}

const SweepCondition& condition_by_name(const std::string& name) {
  for (const SweepCondition& c : all_conditions()) {
    if (c.name == name) return c;
  }
  throw ConfigError("unknown condition '" + name + "'");
}

const SweepCondition& base_condition() {
  return condition_by_name("density_0.15");
}

int agents_for_density(double density, const Workspace& ws) {
  return static_cast<int>(std::lround(density * ws.free_area()));
}

std::pair<Vec2, Vec2> sample_start_goal(DirectionalityTag tag,
                                        const Workspace& ws, Rng& rng,
                                        const ScenarioParams& params) {
  const ResolvedPair r = sample_pair(tag, ws, rng, params);
  return {r.start, r.goal};
}

Scenario sample_scenario(const SweepCondition& cond, std::uint64_t seed,
                         const ScenarioParams& params) {
  const Workspace ws{cond.width, 10.0};
  int n = 15;
  if (cond.mixture) {
    n = cond.mixture->total();
  } else if (cond.factor == Factor::Density) {
    n = agents_for_density(cond.density, ws);
  }
  const MixtureSpec mix = cond.mixture.value_or(default_mixture(n));
  if (mix.total() != n) {
    throw InternalError("mixture does not cover the crowd");
  }

  Scenario s;
  s.n = n;
  s.seed = seed;
  s.workspace = ws;
  s.v_pref = params.v_pref;
  s.ego_radius = params.radius;
  s.ego_start = {ws.width / 2.0, 1.0};
  s.ego_goal = {ws.width / 2.0, ws.length - 1.0};
  s.agent_radii.assign(n, params.radius);
  s.agent_starts.reserve(n);
  s.agent_goal_sequences.reserve(n);
  s.agent_policies.reserve(n);

  for (int i = 0; i < n; ++i) {
    PolicyTag policy;
    if (i < mix.orca) policy = PolicyTag::Orca;
    else if (i < mix.orca + mix.sfm) policy = PolicyTag::Sfm;
    else if (i < mix.orca + mix.sfm + mix.cv) policy = PolicyTag::Cv;
    else policy = PolicyTag::Static;
    s.agent_policies.push_back(policy);
  }

  Rng rng(seed);
  const double min_sep = params.min_separation();
  // Dense crowds can jam an unlucky placement order; rather than fail on
  // one ordering, retry the whole layout from the same stream.
  bool complete = false;
  for (int restart = 0; restart < params.max_attempts && !complete;
       ++restart) {
    s.agent_starts.clear();
    s.agent_goal_sequences.clear();
    complete = true;
    for (int i = 0; i < n; ++i) {
      bool placed = false;
      ResolvedPair pair;
      for (int attempt = 0; attempt < params.max_attempts && !placed;
           ++attempt) {
        pair = sample_pair(cond.directionality, ws, rng, params);
        if (wall_clearance(pair.start, params.radius, ws) < 0.0) continue;
        if (wall_clearance(pair.goal, params.radius, ws) < 0.0) continue;
        if (distance(pair.start, s.ego_start) < min_sep) continue;
        bool clear = true;
        for (const Vec2& other : s.agent_starts) {
          if (distance(pair.start, other) < min_sep) {
            clear = false;
            break;
          }
        }
        placed = clear;
      }
      if (!placed) {
        complete = false;
        break;
      }

      s.agent_starts.push_back(pair.start);
      std::vector<Vec2> chain;
      chain.reserve(params.goal_chain_length);
      if (s.agent_policies[i] == PolicyTag::Static) {
        chain.assign(params.goal_chain_length, pair.start);
      } else {
        chain.push_back(pair.goal);
        Vec2 cur = pair.goal;
        for (int k = 1; k < params.goal_chain_length; ++k) {
          cur = next_goal(pair.resolved, cur, ws, rng, params);
          chain.push_back(cur);
        }
      }
      s.agent_goal_sequences.push_back(std::move(chain));
    }
  }
  if (!complete) {
    throw ConfigError("could not place a crowd for condition '" + cond.name +
                      "' after " + std::to_string(params.max_attempts) +
                      " layout attempts");
  }

  return s;
}

Scenario sample_scenario(const SweepCondition& cond, std::uint64_t seed) {
  return sample_scenario(cond, seed, ScenarioParams{});
}

Scenario base_scenario(std::uint64_t seed) {
  return sample_scenario(base_condition(), seed);
}

std::string scenario_to_json(const Scenario& s) {
  json j;
  j["n"] = s.n;
  j["seed"] = s.seed;
  j["v_pref"] = s.v_pref;
  j["workspace"] = {{"w", s.workspace.width}, {"l", s.workspace.length}};
  j["ego_start"] = vec_json(s.ego_start);
  j["ego_goal"] = vec_json(s.ego_goal);
  // radii[0] is the ego, the rest follow agent order.
  json radii = json::array();
  radii.push_back(s.ego_radius);
  for (double r : s.agent_radii) radii.push_back(r);
  j["radii"] = std::move(radii);
  json starts = json::array();
  for (const Vec2& v : s.agent_starts) starts.push_back(vec_json(v));
  j["starts"] = std::move(starts);
  json seqs = json::array();
  for (const auto& chain : s.agent_goal_sequences) {
    json one = json::array();
    for (const Vec2& g : chain) one.push_back(vec_json(g));
    seqs.push_back(std::move(one));
  }
  j["goal_sequences"] = std::move(seqs);
  json pols = json::array();
  for (PolicyTag t : s.agent_policies) {
    pols.push_back(std::string(policy_name(t)));
  }
  j["policies"] = std::move(pols);
  return j.dump();
}

Scenario scenario_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw IoError(std::string("scenario parse failed: ") + e.what());
  }

  try {
    Scenario s;
    s.n = j.at("n").get<int>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.v_pref = j.at("v_pref").get<double>();
    s.workspace.width = j.at("workspace").at("w").get<double>();
    s.workspace.length = j.at("workspace").at("l").get<double>();
    s.ego_start = vec_from_json(j.at("ego_start"));
    s.ego_goal = vec_from_json(j.at("ego_goal"));

    const json& radii = j.at("radii");
    if (!radii.is_array() || radii.size() != static_cast<size_t>(s.n) + 1) {
      throw IoError("scenario: radii must list the ego plus every agent");
    }
    s.ego_radius = radii[0].get<double>();
    for (size_t i = 1; i < radii.size(); ++i) {
      s.agent_radii.push_back(radii[i].get<double>());
    }

    const json& starts = j.at("starts");
    const json& seqs = j.at("goal_sequences");
    const json& pols = j.at("policies");
    const auto count = static_cast<size_t>(s.n);
    if (starts.size() != count || seqs.size() != count ||
        pols.size() != count) {
      throw IoError("scenario: agent arrays disagree with n");
    }
    for (const json& v : starts) s.agent_starts.push_back(vec_from_json(v));
    for (const json& chain : seqs) {
      std::vector<Vec2> one;
      for (const json& g : chain) one.push_back(vec_from_json(g));
      s.agent_goal_sequences.push_back(std::move(one));
    }
    for (const json& p : pols) {
      const auto tag = policy_from_name(p.get<std::string>());
      if (!tag) {
        throw IoError("scenario: unknown policy '" + p.get<std::string>() +
                      "'");
      }
      s.agent_policies.push_back(*tag);
    }
    return s;
  } catch (const json::exception& e) {
    throw IoError(std::string("scenario field error: ") + e.what());
  }
}

std::uint64_t scenario_hash(const Scenario& s) {
  const std::string dump = scenario_to_json(s);
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace crowdsweep
