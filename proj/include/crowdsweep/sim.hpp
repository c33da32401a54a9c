#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "crowdsweep/agent.hpp"
#include "crowdsweep/metrics.hpp"
#include "crowdsweep/policies.hpp"
#include "crowdsweep/predictive.hpp"
#include "crowdsweep/scenario.hpp"
#include "crowdsweep/vec2.hpp"
#include "crowdsweep/world.hpp"

namespace crowdsweep {

struct TrialConfig {
  double dt = 0.25;
  double time_limit = 50.0;
  double goal_tolerance = 0.3;
  PolicyTag ego_policy = PolicyTag::Cv;
  SfmParams sfm;  // shared by sfm crowd agents and an sfm ego
  OrcaParams orca;
  CostParams mpc = mpc_default_params();
  CostParams mppi = mppi_default_params();
  std::string predictor = "cv";
  // Off records the ego trajectory only; crowd trajectories are dropped.
  bool record_full_trajectories = true;
};

struct TimedState {
  double time = 0.0;
  Vec2 position;
  Vec2 velocity;
};

struct TrialResult {
  Outcome outcome = Outcome::Timeout;
  std::optional<double> time_to_goal;        // success only
  std::optional<double> min_agent_distance;  // surface distance, any outcome
  std::optional<double> path_irregularity;   // rad/m over the ego path
  std::vector<TimedState> ego_trajectory;
  std::vector<std::vector<TimedState>> agent_trajectories;
  PolicyTag ego_policy = PolicyTag::Cv;
  std::vector<PolicyTag> agent_policies;
  int steps = 0;
};

// Per-step velocity source for the ego; stateful implementations carry
// their plan between calls.
class EgoController {
 public:
  virtual ~EgoController() = default;
  virtual Vec2 act(const AgentState& ego, const WorldSnapshot& snapshot) = 0;
};

// Controller for any policy tag; sampling controllers draw from a stream
// derived from the trial seed.
std::unique_ptr<EgoController> make_ego_controller(const TrialConfig& tc,
                                                   std::uint64_t seed);

class Simulation {
 public:
  Simulation(const Scenario& sc, const TrialConfig& tc, std::uint64_t seed);

  // One synchronous tick: every policy reads the same pre-step snapshot,
  // commands are wall-clamped, positions integrate, crowd goals advance
  // (cycling through each agent's sequence), time moves by dt.
  void step();

  WorldSnapshot snapshot() const;  // agents[0] is the ego
  const std::vector<AgentState>& agents() const { return agents_; }
  const AgentState& ego() const { return agents_[0]; }
  double time() const { return time_; }
  int goal_index(int agent) const { return goal_index_.at(agent); }

  bool ego_arrived() const;
  bool ego_collided() const;

 private:
  Vec2 crowd_action(int index, const WorldSnapshot& snap) const;

  TrialConfig config_;
  Workspace workspace_;
  Vec2 ego_goal_;
  std::vector<AgentState> agents_;  // 0 = ego
  std::vector<std::vector<Vec2>> goal_sequences_;  // [0] unused
  std::vector<int> goal_index_;
  std::unique_ptr<EgoController> controller_;
  double time_ = 0.0;
};

// Runs to Success / Collision / Timeout and computes the per-trial
// metric inputs along the way.
TrialResult run_trial(const Scenario& sc, const TrialConfig& tc,
                      std::uint64_t seed);

// step,time,agent_id,x,y,vx,vy,policy_tag rows; agent_id 0 is the ego.
std::string trajectory_csv(const TrialResult& result);

}  // namespace crowdsweep
