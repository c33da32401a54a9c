#include "crowdsweep/sim.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <utility>

#include "crowdsweep/errors.hpp"

namespace crowdsweep {
namespace {

class CvController final : public EgoController {
 public:
  Vec2 act(const AgentState& ego, const WorldSnapshot& snap) override {
    return cv_action(ego, snap.dt);
  }
};

class HoldController final : public EgoController {
 public:
  Vec2 act(const AgentState&, const WorldSnapshot&) override { return {}; }
};

class SfmController final : public EgoController {
 public:
  explicit SfmController(const SfmParams& p) : params_(p) {}
  Vec2 act(const AgentState& ego, const WorldSnapshot& snap) override {
    return sfm_action(ego, 0, snap, params_);
  }

 private:
  SfmParams params_;
};

class OrcaController final : public EgoController {
 public:
  explicit OrcaController(const OrcaParams& p) : params_(p) {}
  Vec2 act(const AgentState& ego, const WorldSnapshot& snap) override {
    return orca_action(ego, 0, snap, params_);
  }

 private:
  OrcaParams params_;
};

class RpController final : public EgoController {
 public:
  Vec2 act(const AgentState& ego, const WorldSnapshot& snap) override {
    return reactive_action(ego, 0, snap);
  }
};

class MpcController final : public EgoController {
 public:
  MpcController(const CostParams& p, Predictor pred, std::uint64_t seed)
      : params_(p),
        predictor_(std::move(pred)),
        rng_(derive_seed(seed, 1, 0)) {}

  Vec2 act(const AgentState& ego, const WorldSnapshot& snap) override {
    const MpcPlan plan = mpc_cv_plan(ego, snap, params_, rng_, predictor_);
    return plan.best.front();
  }

 private:
  CostParams params_;
  Predictor predictor_;
  Rng rng_;
};

class MppiController final : public EgoController {
 public:
  MppiController(const CostParams& p, Predictor pred, std::uint64_t seed)
      : params_(p),
        predictor_(std::move(pred)),
        rng_(derive_seed(seed, 2, 0)) {}

  Vec2 act(const AgentState& ego, const WorldSnapshot& snap) override {
    if (nominal_.size() != static_cast<size_t>(params_.horizon)) {
      // Trial start: warm-start from the straight-to-goal plan.
      nominal_ = straight_cv_sequence(ego, snap.workspace, snap.dt,
                                      params_.horizon);
    }
    MppiResult r = mppi_cv_step(ego, snap, params_, nominal_, rng_,
                                predictor_);
    nominal_ = std::move(r.nominal);
    return r.command;
  }

 private:
  CostParams params_;
  Predictor predictor_;
  Rng rng_;
  ControlSequence nominal_;
};

void append_double(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

void append_row(std::string& out, size_t step, int agent_id,
                const TimedState& st, std::string_view policy) {
  out += std::to_string(step);
  out += ',';
  append_double(out, st.time);
  out += ',';
  out += std::to_string(agent_id);
  out += ',';
  append_double(out, st.position.x);
  out += ',';
  append_double(out, st.position.y);
  out += ',';
  append_double(out, st.velocity.x);
  out += ',';
  append_double(out, st.velocity.y);
  out += ',';
  out += policy;
  out += '\n';
}

}  // namespace

std::unique_ptr<EgoController> make_ego_controller(const TrialConfig& tc,
                                                   std::uint64_t seed) {
  switch (tc.ego_policy) {
    case PolicyTag::Cv:
      return std::make_unique<CvController>();
    case PolicyTag::Static:
      return std::make_unique<HoldController>();
    case PolicyTag::Sfm:
      return std::make_unique<SfmController>(tc.sfm);
    case PolicyTag::Orca:
      return std::make_unique<OrcaController>(tc.orca);
    case PolicyTag::Rp:
      return std::make_unique<RpController>();
    case PolicyTag::MpcCv:
      return std::make_unique<MpcController>(tc.mpc,
                                             get_predictor(tc.predictor),
                                             seed);
    case PolicyTag::MppiCv:
      return std::make_unique<MppiController>(tc.mppi,
                                              get_predictor(tc.predictor),
                                              seed);
  }
  throw InternalError("unhandled ego policy");
}

Simulation::Simulation(const Scenario& sc, const TrialConfig& tc,
                       std::uint64_t seed)
    : config_(tc), workspace_(sc.workspace), ego_goal_(sc.ego_goal) {
  if (!(tc.dt > 0.0)) throw ConfigError("dt must be positive");
  if (tc.time_limit < tc.dt) {
    throw ConfigError("time limit must cover at least one step");
  }
  const auto n = static_cast<size_t>(sc.n);
  if (sc.agent_starts.size() != n || sc.agent_goal_sequences.size() != n ||
      sc.agent_policies.size() != n || sc.agent_radii.size() != n) {
    throw ConfigError("scenario agent lists disagree with n");
  }

  AgentState ego;
  ego.position = sc.ego_start;
  ego.radius = sc.ego_radius;
  ego.current_goal = sc.ego_goal;
  ego.v_pref = sc.v_pref;
  ego.policy_tag = tc.ego_policy;
  agents_.push_back(ego);
  goal_sequences_.emplace_back();
  goal_index_.push_back(0);

  for (size_t i = 0; i < n; ++i) {
    if (sc.agent_goal_sequences[i].empty()) {
      throw ConfigError("agent " + std::to_string(i) + " has no goals");
    }
    AgentState a;
    a.position = sc.agent_starts[i];
    a.radius = sc.agent_radii[i];
    a.current_goal = sc.agent_goal_sequences[i].front();
    a.v_pref = sc.v_pref;
    a.policy_tag = sc.agent_policies[i];
    agents_.push_back(a);
    goal_sequences_.push_back(sc.agent_goal_sequences[i]);
    goal_index_.push_back(0);
  }

  controller_ = make_ego_controller(tc, seed);
}

WorldSnapshot Simulation::snapshot() const {
  WorldSnapshot snap;
  snap.time = time_;
  snap.workspace = workspace_;
  snap.dt = config_.dt;
  snap.agents.reserve(agents_.size());
  for (const AgentState& a : agents_) snap.agents.push_back(observe(a));
  return snap;
}

Vec2 Simulation::crowd_action(int index, const WorldSnapshot& snap) const {
  const AgentState& self = agents_[static_cast<size_t>(index)];
  switch (self.policy_tag) {
    case PolicyTag::Cv:
      return cv_action(self, config_.dt);
    case PolicyTag::Static:
      return {};
    case PolicyTag::Sfm:
      return sfm_action(self, static_cast<size_t>(index), snap, config_.sfm);
    case PolicyTag::Orca:
      return orca_action(self, static_cast<size_t>(index), snap,
                         config_.orca);
    default:
      throw ConfigError("crowd agents support cv, static, sfm, orca");
  }
}

void Simulation::step() {
  const WorldSnapshot snap = snapshot();

  std::vector<Vec2> commands(agents_.size());
  commands[0] = controller_->act(agents_[0], snap);
  for (size_t i = 1; i < agents_.size(); ++i) {
    commands[i] = crowd_action(static_cast<int>(i), snap);
  }

  for (size_t i = 0; i < agents_.size(); ++i) {
    AgentState& a = agents_[i];
    const Vec2 v = clamp_action_to_walls(a.position, commands[i], a.radius,
                                         config_.dt, workspace_);
    a.velocity = v;
    a.position = a.position + v * config_.dt;
  }

  for (size_t i = 1; i < agents_.size(); ++i) {
    AgentState& a = agents_[i];
    if (distance(a.position, a.current_goal) <= config_.goal_tolerance) {
      const auto& seq = goal_sequences_[i];
      goal_index_[i] =
          (goal_index_[i] + 1) % static_cast<int>(seq.size());
      a.current_goal = seq[static_cast<size_t>(goal_index_[i])];
    }
  }

  time_ += config_.dt;
}

bool Simulation::ego_arrived() const {
  return distance(agents_[0].position, ego_goal_) <= config_.goal_tolerance;
}

bool Simulation::ego_collided() const {
  const Disc ego{agents_[0].position, agents_[0].radius};
  for (size_t i = 1; i < agents_.size(); ++i) {
    if (discs_collide(ego, Disc{agents_[i].position, agents_[i].radius})) {
      return true;
    }
  }
  return false;
}

TrialResult run_trial(const Scenario& sc, const TrialConfig& tc,
                      std::uint64_t seed) {
  Simulation sim(sc, tc, seed);

  TrialResult r;
  r.ego_policy = tc.ego_policy;
  r.agent_policies = sc.agent_policies;
  if (tc.record_full_trajectories) {
    r.agent_trajectories.resize(static_cast<size_t>(sc.n));
  }

  std::vector<Vec2> ego_path;
  double min_dist = std::numeric_limits<double>::infinity();
  bool any_dist = false;

  auto record = [&] {
    const auto& agents = sim.agents();
    r.ego_trajectory.push_back(
        {sim.time(), agents[0].position, agents[0].velocity});
    ego_path.push_back(agents[0].position);
    for (size_t i = 1; i < agents.size(); ++i) {
      const double d = distance(agents[0].position, agents[i].position) -
                       agents[0].radius - agents[i].radius;
      min_dist = std::min(min_dist, d);
      any_dist = true;
      if (tc.record_full_trajectories) {
        r.agent_trajectories[i - 1].push_back(
            {sim.time(), agents[i].position, agents[i].velocity});
      }
    }
  };

  auto check_terminal = [&]() -> bool {
    // A step that both collides and arrives is a collision: success
    // requires reaching the goal untouched.
    if (sim.ego_collided()) {
      r.outcome = Outcome::Collision;
      return true;
    }
    if (sim.ego_arrived()) {
      r.outcome = Outcome::Success;
      r.time_to_goal = sim.time();
      return true;
    }
    return false;
  };

  record();
  bool terminal = check_terminal();
  while (!terminal && sim.time() < tc.time_limit - 1e-12) {
    sim.step();
    ++r.steps;
    record();
    terminal = check_terminal();
  }
  if (!terminal) r.outcome = Outcome::Timeout;

  if (any_dist) r.min_agent_distance = min_dist;
  r.path_irregularity = path_irregularity(ego_path, sc.ego_goal);
  return r;
}

std::string trajectory_csv(const TrialResult& result) {
  std::string out = "step,time,agent_id,x,y,vx,vy,policy_tag\n";
  for (size_t s = 0; s < result.ego_trajectory.size(); ++s) {
    append_row(out, s, 0, result.ego_trajectory[s],
               policy_name(result.ego_policy));
    for (size_t a = 0; a < result.agent_trajectories.size(); ++a) {
      append_row(out, s, static_cast<int>(a) + 1,
                 result.agent_trajectories[a][s],
                 policy_name(result.agent_policies[a]));
    }
  }
  return out;
}

}  // namespace crowdsweep
