#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "crowdsweep/agent.hpp"
#include "crowdsweep/rng.hpp"
#include "crowdsweep/vec2.hpp"
#include "crowdsweep/world.hpp"

namespace crowdsweep {

enum class Factor { Density, Directionality, Width, PolicyMixture };

std::string_view factor_name(Factor f);
std::optional<Factor> factor_from_name(std::string_view name);

enum class DirectionalityTag {
  PassingOnly,
  CrossingOnly,
  PassingAndCrossing,
  CircleCrossing,
  Random,
};

std::string_view directionality_name(DirectionalityTag tag);
std::optional<DirectionalityTag> directionality_from_name(
    std::string_view name);

// Crowd composition by policy, assigned to agents in this field order.
struct MixtureSpec {
  int orca = 0;
  int sfm = 0;
  int cv = 0;
  int still = 0;  // agents that never move

  int total() const { return orca + sfm + cv + still; }
};

// Half orca (rounded up), half sfm: the default composition at any n.
MixtureSpec default_mixture(int n);

struct SweepCondition {
  Factor factor = Factor::Density;
  int level_index = 0;   // 0 = lowest intensity within the factor
  int global_index = 0;  // unique across the whole sweep; seeds derive from it
  std::string name;

  // Effective generation parameters after applying the factor level.
  double density = 0.15;  // agents per square meter
  DirectionalityTag directionality = DirectionalityTag::PassingAndCrossing;
  double width = 10.0;  // workspace width, m
  std::optional<MixtureSpec> mixture;  // fixed composition when set
};

// The full sweep: 7 density, 5 directionality, 5 mixture, 7 width levels,
// with stable global indices 0..23 in that order.
const std::vector<SweepCondition>& all_conditions();
const SweepCondition& condition_by_name(const std::string& name);
// Density 0.15, passing+crossing, 10x10: the reference condition.
const SweepCondition& base_condition();

struct ScenarioParams {
  double radius = 0.3;           // every agent, ego included
  double v_pref = 1.0;           // m/s, shared
  double margin = 0.5;           // lane offset from the walls, m
  double separation_gap = 0.2;   // min start spacing = 2*radius + this
  int max_attempts = 1000;       // placement rejection budget
  double circle_inset = 1.0;     // ring radius = min(w,l)/2 - this
  double circle_noise = 0.5;     // start/goal perturbation, m
  double lane_dev_deg = 15.0;    // lane travel direction tolerance
  double random_min_travel = 2.0;  // m between random start and goal
  int goal_chain_length = 10;    // goals per agent (G)

  double min_separation() const { return 2.0 * radius + separation_gap; }
};

struct Scenario {
  int n = 0;  // non-ego agents
  std::uint64_t seed = 0;
  double ego_radius = 0.3;
  Vec2 ego_start;
  Vec2 ego_goal;
  std::vector<double> agent_radii;
  std::vector<Vec2> agent_starts;
  std::vector<std::vector<Vec2>> agent_goal_sequences;  // length G each
  std::vector<PolicyTag> agent_policies;
  Workspace workspace;
  double v_pref = 1.0;
};

// round(d * free area).
int agents_for_density(double density, const Workspace& ws);

// One start/goal pair in the given travel pattern. Passing lanes run
// along y (the ego's axis), crossing lanes along x.
std::pair<Vec2, Vec2> sample_start_goal(DirectionalityTag tag,
                                        const Workspace& ws, Rng& rng,
                                        const ScenarioParams& params);

Scenario sample_scenario(const SweepCondition& cond, std::uint64_t seed,
                         const ScenarioParams& params);
Scenario sample_scenario(const SweepCondition& cond, std::uint64_t seed);

// The reference 15-agent scenario (8 orca + 7 sfm, passing and crossing).
Scenario base_scenario(std::uint64_t seed);

// JSON round-trip with fixed field names, stable across runs; the dump is
// also the hashing domain.
std::string scenario_to_json(const Scenario& s);
Scenario scenario_from_json(const std::string& text);
std::uint64_t scenario_hash(const Scenario& s);

}  // namespace crowdsweep
