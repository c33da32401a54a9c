#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "crowdsweep/vec2.hpp"
#include "crowdsweep/world.hpp"

namespace crowdsweep {

enum class PolicyTag { Cv, Static, Sfm, Orca, Rp, MpcCv, MppiCv };

std::string_view policy_name(PolicyTag tag);
std::optional<PolicyTag> policy_from_name(std::string_view name);

// Full per-agent state. Only the owning agent's policy ever sees this;
// everyone else observes the kinematic projection below.
struct AgentState {
  Vec2 position;
  Vec2 velocity;
  double radius = 0.3;
  Vec2 current_goal;
  double v_pref = 1.0;
  PolicyTag policy_tag = PolicyTag::Cv;
};

// What an agent can see of another: position, velocity, radius. Goals and
// policy tags are deliberately not here.
struct ObservedAgent {
  Vec2 position;
  Vec2 velocity;
  double radius = 0.3;
};

inline ObservedAgent observe(const AgentState& a) {
  return {a.position, a.velocity, a.radius};
}

// Shared view of one simulation step. agents[0] is the ego robot; every
// policy receives its own full state separately plus its index here.
struct WorldSnapshot {
  double time = 0.0;
  std::vector<ObservedAgent> agents;
  Workspace workspace;
  double dt = 0.25;
};

}  // namespace crowdsweep
