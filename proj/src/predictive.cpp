#include "crowdsweep/predictive.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "crowdsweep/errors.hpp"
#include "crowdsweep/policies.hpp"
#include "crowdsweep/world.hpp"

namespace crowdsweep {

namespace {

std::mutex& registry_mutex() {
  static std::mutex m;
  return m;
}

std::map<std::string, Predictor>& registry() {
  static std::map<std::string, Predictor> r{
      {"cv", [](const WorldSnapshot& snap, int horizon) {
         return predict_cv(snap, horizon);
       }}};
  return r;
}

double step_penalty(double surface_distance, const CostParams& p) {
  if (surface_distance < 0.0) return p.C_col;
  if (surface_distance < p.buffer) {
    return p.w_discomfort * (p.buffer - surface_distance);
  }
  return 0.0;
}

}  // namespace

PredictionSet predict_cv(const WorldSnapshot& snapshot, int horizon) {
  if (horizon < 1) throw InternalError("predict_cv: horizon must be >= 1");
  PredictionSet preds;
  preds.horizon = horizon;
  for (std::size_t j = 1; j < snapshot.agents.size(); ++j) {
    const ObservedAgent& a = snapshot.agents[j];
    std::vector<Vec2> points;
    points.reserve(std::size_t(horizon));
    for (int k = 1; k <= horizon; ++k) {
      points.push_back(a.position + a.velocity * (double(k) * snapshot.dt));
    }
    preds.agent_positions.push_back(std::move(points));
    preds.radii.push_back(a.radius);
  }
  return preds;
}

void register_predictor(const std::string& name, Predictor predictor) {
  std::lock_guard<std::mutex> lock(registry_mutex());
  registry()[name] = std::move(predictor);
}

const Predictor& get_predictor(const std::string& name) {
  std::lock_guard<std::mutex> lock(registry_mutex());
  const auto it = registry().find(name);
  if (it == registry().end()) {
    throw ConfigError("unknown predictor: " + name);
  }
  return it->second;
}

std::vector<std::string> predictor_names() {
  std::lock_guard<std::mutex> lock(registry_mutex());
  std::vector<std::string> names;
  for (const auto& [name, _] : registry()) names.push_back(name);
  return names;
}

double rollout_cost(const AgentState& ego, const ControlSequence& commands,
                    const PredictionSet& preds, const CostParams& params,
                    const Workspace& workspace) {
  if (int(commands.size()) != preds.horizon) {
    throw InternalError("rollout_cost: command/horizon length mismatch");
  }
  const double dt = params.step_dt;  // must match the prediction step
  double cost = 0.0;
  Vec2 position = ego.position;
  Vec2 previous_command = ego.velocity;
  for (int k = 0; k < preds.horizon; ++k) {
    const Vec2 command = commands[std::size_t(k)];
    const Vec2 applied =
        clamp_action_to_walls(position, command, ego.radius, dt, workspace);
    position += applied * dt;

    cost += params.w_goal * distance(position, ego.current_goal);
    for (std::size_t j = 0; j < preds.agent_positions.size(); ++j) {
      const double d = distance(position, preds.agent_positions[j][std::size_t(k)]) -
                       ego.radius - preds.radii[j];
      cost += step_penalty(d, params);
    }
    const Vec2 jerk = command - previous_command;
    cost += params.w_smooth * norm_sq(jerk);
    previous_command = command;
  }
  return cost;
}

ControlSequence straight_cv_sequence(const AgentState& ego,
                                     const Workspace& workspace, double dt,
                                     int horizon) {
  ControlSequence seq;
  seq.reserve(std::size_t(horizon));
  AgentState rolled = ego;
  for (int k = 0; k < horizon; ++k) {
    const Vec2 command = cv_action(rolled, dt);
    seq.push_back(command);
    const Vec2 applied = clamp_action_to_walls(rolled.position, command,
                                               rolled.radius, dt, workspace);
    rolled.position += applied * dt;
  }
  return seq;
}

MpcPlan mpc_cv_plan(const AgentState& ego, const WorldSnapshot& snapshot,
                    const CostParams& params, Rng& rng,
                    const Predictor& predictor) {
  if (params.samples < 1) throw InternalError("mpc_cv_plan: need K >= 1");
  const PredictionSet preds = predictor(snapshot, params.horizon);
  CostParams scoring = params;
  scoring.step_dt = snapshot.dt;  // keep rollouts aligned with predictions

  MpcPlan plan;
  plan.best = straight_cv_sequence(ego, snapshot.workspace, snapshot.dt,
                                   params.horizon);
  plan.cv_cost =
      rollout_cost(ego, plan.best, preds, scoring, snapshot.workspace);
  plan.best_cost = plan.cv_cost;

  const int half = params.horizon / 2;
  for (int k = 1; k < params.samples; ++k) {
    ControlSequence candidate;
    candidate.reserve(std::size_t(params.horizon));
    for (int segment = 0; segment < 2; ++segment) {
      const double heading = rng.uniform(0.0, 2.0 * M_PI);
      const double speed = rng.uniform(0.0, ego.v_pref);
      const Vec2 command = from_polar(heading, speed);
      const int count = segment == 0 ? half : params.horizon - half;
      for (int i = 0; i < count; ++i) candidate.push_back(command);
    }
    const double cost =
        rollout_cost(ego, candidate, preds, scoring, snapshot.workspace);
    if (cost < plan.best_cost) {
      plan.best_cost = cost;
      plan.best = std::move(candidate);
    }
  }
  return plan;
}

Vec2 mpc_cv_action(const AgentState& ego, const WorldSnapshot& snapshot,
                   const CostParams& params, Rng& rng) {
  return mpc_cv_plan(ego, snapshot, params, rng, get_predictor("cv"))
      .best.front();
}

std::vector<double> exp_weights(const std::vector<double>& costs,
                                double lambda) {
  if (costs.empty()) throw InternalError("exp_weights: no costs");
  if (lambda <= 0.0) throw InternalError("exp_weights: lambda must be > 0");
  const double lowest = *std::min_element(costs.begin(), costs.end());
  std::vector<double> weights;
  weights.reserve(costs.size());
  for (double c : costs) weights.push_back(std::exp(-(c - lowest) / lambda));
  return weights;
}

MppiResult mppi_cv_step(const AgentState& ego, const WorldSnapshot& snapshot,
                        const CostParams& params,
                        const ControlSequence& nominal, Rng& rng,
                        const Predictor& predictor) {
  if (int(nominal.size()) != params.horizon) {
    throw InternalError("mppi_cv_step: nominal/horizon length mismatch");
  }
  if (params.samples < 1) throw InternalError("mppi_cv_step: need K >= 1");
  const PredictionSet preds = predictor(snapshot, params.horizon);
  CostParams scoring = params;
  scoring.step_dt = snapshot.dt;

  std::vector<ControlSequence> samples;
  samples.reserve(std::size_t(params.samples));
  std::vector<double> costs;
  costs.reserve(std::size_t(params.samples));
  for (int k = 0; k < params.samples; ++k) {
    ControlSequence sample = nominal;
    for (Vec2& command : sample) {
      command += rng.normal2() * params.sigma;
    }
    costs.push_back(
        rollout_cost(ego, sample, preds, scoring, snapshot.workspace));
    samples.push_back(std::move(sample));
  }

  const std::vector<double> weights = exp_weights(costs, params.lambda);
  double total = 0.0;
  for (double w : weights) total += w;

  ControlSequence updated(std::size_t(params.horizon), Vec2{0.0, 0.0});
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const double scale = weights[k] / total;
    for (std::size_t h = 0; h < updated.size(); ++h) {
      updated[h] += samples[k][h] * scale;
    }
  }
  for (Vec2& command : updated) command = clamp_norm(command, ego.v_pref);

  MppiResult result;
  result.command = updated.front();
  result.nominal.assign(updated.begin() + 1, updated.end());
  result.nominal.push_back(updated.back());
  return result;
}

MppiResult mppi_cv_action(const AgentState& ego, const WorldSnapshot& snapshot,
                          const CostParams& params,
                          const ControlSequence& nominal, Rng& rng) {
  return mppi_cv_step(ego, snapshot, params, nominal, rng,
                      get_predictor("cv"));
}

}  // namespace crowdsweep
