#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "crowdsweep/vec2.hpp"

namespace crowdsweep {

enum class Outcome { Success, Collision, Timeout };

std::string_view outcome_name(Outcome o);
std::optional<Outcome> outcome_from_name(std::string_view name);

// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

// Turning beyond the initial misalignment toward the goal, per meter of
// path. Headings come from successive displacements; steps shorter than
// 1e-6 m contribute no heading sample. Absent when the path never moves.
std::optional<double> path_irregularity(const std::vector<Vec2>& ego_positions,
                                        Vec2 goal);

// Surface clearance to the nearest other agent over the whole trial:
// min over frames and agents j >= 1 of |p_0 - p_j| - r_0 - r_j, where
// index 0 is the ego. Absent when there are no other agents.
std::optional<double> min_agent_distance(
    const std::vector<std::vector<Vec2>>& frames,
    const std::vector<double>& radii);

// One trial's metrics. Values may be present for any outcome; the
// aggregate reads them from successful trials only.
struct MetricRow {
  Outcome outcome = Outcome::Timeout;
  std::optional<double> time_to_goal;
  std::optional<double> min_distance;
  std::optional<double> path_irregularity;
};

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;  // population (divide by N)
  int count = 0;
};

struct ConditionAggregate {
  int n_trials = 0;
  int n_success = 0;
  int n_collision = 0;
  int n_timeout = 0;
  double success_rate = 0.0;
  // Over successful trials only; absent when no success produced the value.
  std::optional<MeanStd> time_to_goal;
  std::optional<MeanStd> min_distance;
  std::optional<MeanStd> path_irregularity;
};

ConditionAggregate aggregate(const std::vector<MetricRow>& rows);

}  // namespace crowdsweep
