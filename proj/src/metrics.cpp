#include "crowdsweep/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "crowdsweep/errors.hpp"

namespace crowdsweep {

namespace {

constexpr double kStationaryEps = 1e-6;  // meters; below this, no heading

std::optional<MeanStd> mean_std_of(const std::vector<double>& values) {
  if (values.empty()) return std::nullopt;
  const double n = double(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return MeanStd{mean, std::sqrt(ss / n), int(values.size())};
}

}  // namespace

std::string_view outcome_name(Outcome o) {
  switch (o) {
    case Outcome::Success: return "success";
    case Outcome::Collision: return "collision";
    case Outcome::Timeout: return "timeout";
  }
  throw InternalError("outcome_name: unknown outcome");
}

std::optional<Outcome> outcome_from_name(std::string_view name) {
  if (name == "success") return Outcome::Success;
  if (name == "collision") return Outcome::Collision;
  if (name == "timeout") return Outcome::Timeout;
  return std::nullopt;
}

double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * M_PI);
  if (a <= -M_PI) a = M_PI;
  return a;
}

std::optional<double> path_irregularity(const std::vector<Vec2>& ego_positions,
                                        Vec2 goal) {
  if (ego_positions.size() < 2) return std::nullopt;

  double arc_length = 0.0;
  std::vector<double> headings;
  headings.reserve(ego_positions.size() - 1);
  for (size_t i = 0; i + 1 < ego_positions.size(); ++i) {
    const Vec2 d = ego_positions[i + 1] - ego_positions[i];
    const double step = norm(d);
    arc_length += step;
    if (step >= kStationaryEps) headings.push_back(heading_of(d));
  }
  if (headings.empty() || arc_length < kStationaryEps) return std::nullopt;

  double total_rotation = 0.0;
  for (size_t i = 1; i < headings.size(); ++i) {
    total_rotation += std::fabs(wrap_angle(headings[i] - headings[i - 1]));
  }

  const Vec2 to_goal = goal - ego_positions.front();
  double min_needed = 0.0;
  if (norm(to_goal) >= kStationaryEps) {
    min_needed = std::fabs(wrap_angle(heading_of(to_goal) - headings.front()));
  }
  return std::max(0.0, total_rotation - min_needed) / arc_length;
}

std::optional<double> min_agent_distance(
    const std::vector<std::vector<Vec2>>& frames,
    const std::vector<double>& radii) {
  if (radii.size() < 2 || frames.empty()) return std::nullopt;
  double best = std::numeric_limits<double>::infinity();
  for (const std::vector<Vec2>& frame : frames) {
    if (frame.size() != radii.size()) {
      throw InternalError("min_agent_distance: frame/radii size mismatch");
    }
    for (size_t j = 1; j < frame.size(); ++j) {
      const double d = distance(frame[0], frame[j]) - radii[0] - radii[j];
      best = std::min(best, d);
    }
  }
  return best;
}

ConditionAggregate aggregate(const std::vector<MetricRow>& rows) {
  if (rows.empty()) throw InternalError("aggregate: no rows");
  ConditionAggregate out;
  out.n_trials = int(rows.size());

  std::vector<double> times;
  std::vector<double> distances;
  std::vector<double> irregularities;
  for (const MetricRow& row : rows) {
    switch (row.outcome) {
      case Outcome::Success: ++out.n_success; break;
      case Outcome::Collision: ++out.n_collision; break;
      case Outcome::Timeout: ++out.n_timeout; break;
    }
    if (row.outcome != Outcome::Success) continue;
    if (row.time_to_goal) times.push_back(*row.time_to_goal);
    if (row.min_distance) distances.push_back(*row.min_distance);
    if (row.path_irregularity) irregularities.push_back(*row.path_irregularity);
  }
  out.success_rate = double(out.n_success) / double(out.n_trials);
  out.time_to_goal = mean_std_of(times);
  out.min_distance = mean_std_of(distances);
  out.path_irregularity = mean_std_of(irregularities);
  return out;
}

}  // namespace crowdsweep
