#pragma once

#include <functional>
#include <string>
#include <vector>

#include "crowdsweep/agent.hpp"
#include "crowdsweep/rng.hpp"
#include "crowdsweep/vec2.hpp"

namespace crowdsweep {

// Predicted future positions of every non-ego agent: exactly `horizon`
// points per agent, starting one step ahead of the snapshot.
struct PredictionSet {
  int horizon = 0;
  std::vector<std::vector<Vec2>> agent_positions;  // [agent][step]
  std::vector<double> radii;                       // parallel to agent_positions
};

using ControlSequence = std::vector<Vec2>;

struct CostParams {
  double w_goal = 1.0;        // per-step distance-to-goal weight
  double C_col = 1e4;         // penalty per penetrating step
  double w_discomfort = 5.0;  // linear penalty inside the buffer
  double buffer = 0.2;        // m of personal space beyond contact
  double w_smooth = 0.1;      // squared command-difference weight
  double lambda = 0.5;        // MPPI temperature
  int samples = 500;          // K
  double sigma = 0.5;         // m/s perturbation scale
  int horizon = 8;            // steps (2 s at dt = 0.25)
  double step_dt = 0.25;      // rollout integration step, s
};

inline CostParams mpc_default_params() { return CostParams{}; }

inline CostParams mppi_default_params() {
  CostParams p;
  p.samples = 400;
  return p;
}

// Straight-line extrapolation of everyone except the ego; deliberately
// not wall-clamped.
PredictionSet predict_cv(const WorldSnapshot& snapshot, int horizon);

using Predictor = std::function<PredictionSet(const WorldSnapshot&, int)>;

// Named predictor lookup for config-driven selection. "cv" is built in;
// unknown names raise ConfigError.
void register_predictor(const std::string& name, Predictor predictor);
const Predictor& get_predictor(const std::string& name);
std::vector<std::string> predictor_names();

// Scores one command sequence against predicted motion: per step, goal
// distance plus collision/discomfort penalties against every predicted
// agent plus squared command changes (the step before the first command
// is the ego's current velocity). The rolled-out ego motion is
// wall-clamped; the commands themselves are not speed-clipped here.
double rollout_cost(const AgentState& ego, const ControlSequence& commands,
                    const PredictionSet& preds, const CostParams& params,
                    const Workspace& workspace);

// The candidate every planner starts from: chase the goal at cv speed
// from each rolled-out position.
ControlSequence straight_cv_sequence(const AgentState& ego,
                                     const Workspace& workspace, double dt,
                                     int horizon);

struct MpcPlan {
  ControlSequence best;
  double best_cost = 0.0;
  double cv_cost = 0.0;  // cost of the straight-cv candidate (index 0)
};

// Random-shooting MPC: K candidates (straight-cv first, then two-segment
// piecewise-constant random commands), minimum rollout cost wins, ties
// favor the earlier candidate.
MpcPlan mpc_cv_plan(const AgentState& ego, const WorldSnapshot& snapshot,
                    const CostParams& params, Rng& rng,
                    const Predictor& predictor);

Vec2 mpc_cv_action(const AgentState& ego, const WorldSnapshot& snapshot,
                   const CostParams& params, Rng& rng);

// Unnormalized path-integral weights exp(-(S_k - min S) / lambda).
std::vector<double> exp_weights(const std::vector<double>& costs,
                                double lambda);

struct MppiResult {
  Vec2 command;             // first command of the updated nominal
  ControlSequence nominal;  // shifted left one step, last repeated
};

// Path-integral update around `nominal`: K noisy samples, exponential
// weights, weighted average clipped per command to v_pref.
MppiResult mppi_cv_step(const AgentState& ego, const WorldSnapshot& snapshot,
                        const CostParams& params,
                        const ControlSequence& nominal, Rng& rng,
                        const Predictor& predictor);

MppiResult mppi_cv_action(const AgentState& ego, const WorldSnapshot& snapshot,
                          const CostParams& params,
                          const ControlSequence& nominal, Rng& rng);

}  // namespace crowdsweep
