#include "crowdsweep/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <mutex>
#include <optional>
#include <sstream>
#include <string_view>
#include <system_error>
#include <thread>

#include "crowdsweep/errors.hpp"
#include "crowdsweep/predictive.hpp"
#include "json.hpp"

namespace crowdsweep {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("failed reading '" + path.string() + "'");
  return buf.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << content;
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void append_double(std::string& out, double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf, 16);
}

// ---- strict config parsing ------------------------------------------------

void check_keys(const json& j, const std::string& where,
                std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) throw ConfigError(where + ": unknown key '" + item.key() + "'");
  }
}

double read_double(const json& j, const std::string& where, const char* key,
                   double fallback) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_number()) throw ConfigError(where + "." + key + " must be a number");
  return it->get<double>();
}

int read_int(const json& j, const std::string& where, const char* key,
             int fallback) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_number_integer())
    throw ConfigError(where + "." + key + " must be an integer");
  return it->get<int>();
}

std::uint64_t read_u64(const json& j, const std::string& where, const char* key,
                       std::uint64_t fallback) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_number_unsigned() &&
      !(it->is_number_integer() && it->get<std::int64_t>() >= 0)) {
    throw ConfigError(where + "." + key + " must be a non-negative integer");
  }
  return it->get<std::uint64_t>();
}

std::string read_string(const json& j, const std::string& where,
                        const char* key, std::string fallback) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_string()) throw ConfigError(where + "." + key + " must be a string");
  return it->get<std::string>();
}

void parse_sfm(const json& j, SfmParams& p) {
  check_keys(j, "trial.sfm", {"tau", "A", "B", "A_wall", "B_wall", "F_max"});
  p.tau = read_double(j, "trial.sfm", "tau", p.tau);
  p.A = read_double(j, "trial.sfm", "A", p.A);
  p.B = read_double(j, "trial.sfm", "B", p.B);
  p.A_wall = read_double(j, "trial.sfm", "A_wall", p.A_wall);
  p.B_wall = read_double(j, "trial.sfm", "B_wall", p.B_wall);
  p.F_max = read_double(j, "trial.sfm", "F_max", p.F_max);
  if (p.tau <= 0.0) throw ConfigError("trial.sfm.tau must be positive");
}

void parse_orca(const json& j, OrcaParams& p) {
  check_keys(j, "trial.orca", {"neighbor_dist", "time_horizon"});
  p.neighbor_dist = read_double(j, "trial.orca", "neighbor_dist", p.neighbor_dist);
  p.time_horizon = read_double(j, "trial.orca", "time_horizon", p.time_horizon);
  if (p.neighbor_dist <= 0.0)
    throw ConfigError("trial.orca.neighbor_dist must be positive");
  if (p.time_horizon <= 0.0)
    throw ConfigError("trial.orca.time_horizon must be positive");
}

// step_dt is deliberately not configurable: the controllers overwrite it
// with the simulation dt every step.
void parse_cost(const json& j, const std::string& where, CostParams& p) {
  check_keys(j, where,
             {"w_goal", "C_col", "w_discomfort", "buffer", "w_smooth", "lambda",
              "samples", "sigma", "horizon"});
  p.w_goal = read_double(j, where, "w_goal", p.w_goal);
  p.C_col = read_double(j, where, "C_col", p.C_col);
  p.w_discomfort = read_double(j, where, "w_discomfort", p.w_discomfort);
  p.buffer = read_double(j, where, "buffer", p.buffer);
  p.w_smooth = read_double(j, where, "w_smooth", p.w_smooth);
  p.lambda = read_double(j, where, "lambda", p.lambda);
  p.samples = read_int(j, where, "samples", p.samples);
  p.sigma = read_double(j, where, "sigma", p.sigma);
  p.horizon = read_int(j, where, "horizon", p.horizon);
  if (p.samples < 1) throw ConfigError(where + ".samples must be at least 1");
  if (p.horizon < 1) throw ConfigError(where + ".horizon must be at least 1");
  if (p.lambda <= 0.0) throw ConfigError(where + ".lambda must be positive");
  if (p.sigma <= 0.0) throw ConfigError(where + ".sigma must be positive");
}

void parse_trial(const json& j, TrialConfig& tc) {
  check_keys(j, "trial",
             {"dt", "time_limit", "goal_tolerance", "predictor", "sfm", "orca",
              "mpc", "mppi"});
  tc.dt = read_double(j, "trial", "dt", tc.dt);
  tc.time_limit = read_double(j, "trial", "time_limit", tc.time_limit);
  tc.goal_tolerance = read_double(j, "trial", "goal_tolerance", tc.goal_tolerance);
  tc.predictor = read_string(j, "trial", "predictor", tc.predictor);
  if (auto it = j.find("sfm"); it != j.end()) parse_sfm(*it, tc.sfm);
  if (auto it = j.find("orca"); it != j.end()) parse_orca(*it, tc.orca);
  if (auto it = j.find("mpc"); it != j.end()) parse_cost(*it, "trial.mpc", tc.mpc);
  if (auto it = j.find("mppi"); it != j.end())
    parse_cost(*it, "trial.mppi", tc.mppi);
  if (!(tc.dt > 0.0)) throw ConfigError("trial.dt must be positive");
  if (tc.time_limit < tc.dt)
    throw ConfigError("trial.time_limit must be at least one step");
  if (tc.goal_tolerance < 0.0)
    throw ConfigError("trial.goal_tolerance must be non-negative");
  get_predictor(tc.predictor);  // unknown names fail here, before any run
}

void parse_scenario(const json& j, ScenarioParams& p) {
  check_keys(j, "scenario",
             {"radius", "v_pref", "margin", "separation_gap", "max_attempts",
              "circle_inset", "circle_noise", "lane_dev_deg",
              "random_min_travel", "goal_chain_length"});
  p.radius = read_double(j, "scenario", "radius", p.radius);
  p.v_pref = read_double(j, "scenario", "v_pref", p.v_pref);
  p.margin = read_double(j, "scenario", "margin", p.margin);
  p.separation_gap = read_double(j, "scenario", "separation_gap", p.separation_gap);
  p.max_attempts = read_int(j, "scenario", "max_attempts", p.max_attempts);
  p.circle_inset = read_double(j, "scenario", "circle_inset", p.circle_inset);
  p.circle_noise = read_double(j, "scenario", "circle_noise", p.circle_noise);
  p.lane_dev_deg = read_double(j, "scenario", "lane_dev_deg", p.lane_dev_deg);
  p.random_min_travel =
      read_double(j, "scenario", "random_min_travel", p.random_min_travel);
  p.goal_chain_length =
      read_int(j, "scenario", "goal_chain_length", p.goal_chain_length);
  if (p.radius <= 0.0) throw ConfigError("scenario.radius must be positive");
  if (p.v_pref <= 0.0) throw ConfigError("scenario.v_pref must be positive");
  if (p.max_attempts < 1)
    throw ConfigError("scenario.max_attempts must be at least 1");
  if (p.goal_chain_length < 1)
    throw ConfigError("scenario.goal_chain_length must be at least 1");
}

std::vector<Factor> parse_sweeps(const json& j) {
  if (!j.is_array() || j.empty())
    throw ConfigError("sweeps must be a non-empty array of factor names");
  std::vector<Factor> out;
  for (const auto& entry : j) {
    if (!entry.is_string()) throw ConfigError("sweeps entries must be strings");
    const std::string name = entry.get<std::string>();
    const auto factor = factor_from_name(name);
    if (!factor) throw ConfigError("sweeps: unknown factor '" + name + "'");
    for (Factor seen : out) {
      if (seen == *factor)
        throw ConfigError("sweeps: duplicate factor '" + name + "'");
    }
    out.push_back(*factor);
  }
  return out;
}

std::vector<PolicyTag> parse_methods(const json& j) {
  if (!j.is_array() || j.empty())
    throw ConfigError("methods must be a non-empty array of policy names");
  std::vector<PolicyTag> out;
  for (const auto& entry : j) {
    if (!entry.is_string()) throw ConfigError("methods entries must be strings");
    const std::string name = entry.get<std::string>();
    const auto tag = policy_from_name(name);
    if (!tag) throw ConfigError("methods: unknown policy '" + name + "'");
    for (PolicyTag seen : out) {
      if (seen == *tag)
        throw ConfigError("methods: duplicate policy '" + name + "'");
    }
    out.push_back(*tag);
  }
  return out;
}

int parse_workers(const json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "auto") return 0;
    throw ConfigError("workers must be a positive integer or \"auto\"");
  }
  if (j.is_number_integer()) {
    const int w = j.get<int>();
    if (w < 1) throw ConfigError("workers must be at least 1");
    return w;
  }
  throw ConfigError("workers must be a positive integer or \"auto\"");
}

// ---- per-condition statistics (shared by run and analyze) ------------------

struct MethodStats {
  std::string method;
  int trials = 0;
  int success = 0;
  int collision = 0;
  int timeout = 0;
  double success_rate = 0.0;
  std::optional<MeanStd> time_to_goal;
  std::optional<MeanStd> min_distance;
  std::optional<MeanStd> path_irregularity;
};

struct CondStats {
  std::string condition;
  std::string factor;
  int level_index = 0;
  int global_index = 0;
  std::vector<MethodStats> methods;
};

json stat_json(const std::optional<MeanStd>& s) {
  json j;
  if (s) {
    j["count"] = s->count;
    j["mean"] = s->mean;
    j["std"] = s->stddev;
  } else {
    j["count"] = 0;
    j["mean"] = nullptr;
    j["std"] = nullptr;
  }
  return j;
}

std::optional<MeanStd> stat_from_json(const json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("count"))
    throw IoError(where + ": malformed statistic");
  const int count = j.at("count").get<int>();
  if (count == 0) return std::nullopt;
  if (!j.at("mean").is_number() || !j.at("std").is_number())
    throw IoError(where + ": statistic with count > 0 must carry mean and std");
  MeanStd s;
  s.count = count;
  s.mean = j.at("mean").get<double>();
  s.stddev = j.at("std").get<double>();
  return s;
}

json summary_json(std::uint64_t experiment_seed, int trials_per_condition,
                  const std::vector<CondStats>& stats) {
  json out;
  out["format_version"] = 1;
  out["experiment_seed"] = experiment_seed;
  out["trials_per_condition"] = trials_per_condition;
  json conditions = json::array();
  for (const CondStats& cs : stats) {
    json entry;
    entry["condition"] = cs.condition;
    entry["factor"] = cs.factor;
    entry["level_index"] = cs.level_index;
    entry["global_index"] = cs.global_index;
    json methods = json::array();
    for (const MethodStats& ms : cs.methods) {
      json m;
      m["method"] = ms.method;
      m["trials"] = ms.trials;
      m["success"] = ms.success;
      m["collision"] = ms.collision;
      m["timeout"] = ms.timeout;
      m["success_rate"] = ms.success_rate;
      m["time_to_goal"] = stat_json(ms.time_to_goal);
      m["min_distance"] = stat_json(ms.min_distance);
      m["path_irregularity"] = stat_json(ms.path_irregularity);
      methods.push_back(std::move(m));
    }
    entry["methods"] = std::move(methods);
    conditions.push_back(std::move(entry));
  }
  out["conditions"] = std::move(conditions);
  return out;
}

std::vector<CondStats> stats_from_summary(const json& j) {
  if (!j.is_object() || !j.contains("conditions") ||
      !j.at("conditions").is_array()) {
    throw IoError("summary.json: missing conditions array");
  }
  if (j.contains("format_version") &&
      (!j.at("format_version").is_number_integer() ||
       j.at("format_version").get<int>() != 1)) {
    throw IoError("summary.json: unsupported format_version");
  }
  std::vector<CondStats> out;
  for (const auto& entry : j.at("conditions")) {
    CondStats cs;
    try {
      cs.condition = entry.at("condition").get<std::string>();
      cs.factor = entry.at("factor").get<std::string>();
      cs.level_index = entry.at("level_index").get<int>();
      cs.global_index = entry.at("global_index").get<int>();
      for (const auto& m : entry.at("methods")) {
        MethodStats ms;
        ms.method = m.at("method").get<std::string>();
        ms.trials = m.at("trials").get<int>();
        ms.success = m.at("success").get<int>();
        ms.collision = m.at("collision").get<int>();
        ms.timeout = m.at("timeout").get<int>();
        ms.success_rate = m.at("success_rate").get<double>();
        const std::string where = "summary.json: " + cs.condition + "/" + ms.method;
        ms.time_to_goal = stat_from_json(m.at("time_to_goal"), where);
        ms.min_distance = stat_from_json(m.at("min_distance"), where);
        ms.path_irregularity = stat_from_json(m.at("path_irregularity"), where);
        cs.methods.push_back(std::move(ms));
      }
    } catch (const json::exception& e) {
      throw IoError(std::string("summary.json: ") + e.what());
    }
    out.push_back(std::move(cs));
  }
  return out;
}

// One LevelStat row per (condition, method). Metrics without a value keep
// a count-0 row so the report table shows the hole.
LevelStat level_stat(const CondStats& cs, const MethodStats& ms,
                     const std::string& metric) {
  LevelStat row;
  row.method = ms.method;
  row.level_index = cs.level_index;
  if (metric == "success_rate") {
    row.mean = ms.success_rate;
    row.stddev = std::sqrt(
        std::max(0.0, ms.success_rate * (1.0 - ms.success_rate)));
    row.count = ms.trials;
    return row;
  }
  const std::optional<MeanStd>* source = nullptr;
  if (metric == "time_to_goal") source = &ms.time_to_goal;
  if (metric == "min_distance") source = &ms.min_distance;
  if (metric == "path_irregularity") source = &ms.path_irregularity;
  if (source == nullptr) throw InternalError("level_stat: unknown metric " + metric);
  if (*source) {
    row.mean = (*source)->mean;
    row.stddev = (*source)->stddev;
    row.count = (*source)->count;
  }
  return row;
}

std::vector<CorrelationReport> build_reports(const std::vector<CondStats>& stats) {
  // Factors in first-appearance order, which matches the sweep table.
  std::vector<std::string> factors;
  for (const CondStats& cs : stats) {
    bool seen = false;
    for (const std::string& f : factors) seen = seen || f == cs.factor;
    if (!seen) factors.push_back(cs.factor);
  }
  std::vector<CorrelationReport> reports;
  for (const std::string& factor : factors) {
    for (const char* metric : kMetricNames) {
      std::vector<LevelStat> rows;
      for (const CondStats& cs : stats) {
        if (cs.factor != factor) continue;
        for (const MethodStats& ms : cs.methods) {
          rows.push_back(level_stat(cs, ms, metric));
        }
      }
      reports.push_back(correlate_experiment(std::move(rows), factor, metric));
    }
  }
  return reports;
}

json correlations_json(const std::vector<CorrelationReport>& reports) {
  json out;
  out["format_version"] = 1;
  json list = json::array();
  for (const CorrelationReport& r : reports) {
    json entry;
    entry["factor"] = r.factor;
    entry["metric"] = r.metric;
    const bool usable = r.defined && !r.insufficient;
    entry["rho"] = usable ? json(r.rho) : json(nullptr);
    entry["p_value"] = usable ? json(r.p_value) : json(nullptr);
    entry["defined"] = r.defined;
    entry["insufficient"] = r.insufficient;
    entry["n"] = r.n_points;
    entry["scheme"] = r.scheme;
    json table = json::array();
    for (const LevelStat& row : r.table) {
      json t;
      t["method"] = row.method;
      t["level_index"] = row.level_index;
      t["mean"] = row.count > 0 ? json(row.mean) : json(nullptr);
      t["std"] = row.count > 0 ? json(row.stddev) : json(nullptr);
      t["count"] = row.count;
      table.push_back(std::move(t));
    }
    entry["table"] = std::move(table);
    list.push_back(std::move(entry));
  }
  out["reports"] = std::move(list);
  return out;
}

std::string plot_csv(const std::vector<CondStats>& stats,
                     const std::string& factor, const std::string& metric) {
  std::string out = "level,method,mean,std\n";
  for (const CondStats& cs : stats) {
    if (cs.factor != factor) continue;
    for (const MethodStats& ms : cs.methods) {
      const LevelStat row = level_stat(cs, ms, metric);
      if (row.count == 0) continue;
      out += std::to_string(row.level_index);
      out += ',';
      out += row.method;
      out += ',';
      append_double(out, row.mean);
      out += ',';
      append_double(out, row.stddev);
      out += '\n';
    }
  }
  return out;
}

std::vector<const SweepCondition*> selected_conditions(
    const std::vector<Factor>& sweeps) {
  std::vector<const SweepCondition*> out;
  for (const SweepCondition& cond : all_conditions()) {
    for (Factor f : sweeps) {
      if (cond.factor == f) {
        out.push_back(&cond);
        break;
      }
    }
  }
  if (out.empty()) throw ConfigError("no conditions selected");
  return out;
}

std::vector<CondStats> stats_from_rows(const ExperimentConfig& cfg,
                                       const std::vector<TrialRecord>& rows) {
  const auto conditions = selected_conditions(cfg.sweeps);
  const std::size_t M = cfg.methods.size();
  const std::size_t T = static_cast<std::size_t>(cfg.trials_per_condition);
  std::vector<CondStats> out;
  out.reserve(conditions.size());
  for (std::size_t ci = 0; ci < conditions.size(); ++ci) {
    const SweepCondition& cond = *conditions[ci];
    CondStats cs;
    cs.condition = cond.name;
    cs.factor = std::string(factor_name(cond.factor));
    cs.level_index = cond.level_index;
    cs.global_index = cond.global_index;
    for (std::size_t mi = 0; mi < M; ++mi) {
      std::vector<MetricRow> metric_rows;
      metric_rows.reserve(T);
      for (std::size_t t = 0; t < T; ++t) {
        metric_rows.push_back(rows[(ci * M + mi) * T + t].metrics);
      }
      const ConditionAggregate agg = aggregate(metric_rows);
      MethodStats ms;
      ms.method = std::string(policy_name(cfg.methods[mi]));
      ms.trials = agg.n_trials;
      ms.success = agg.n_success;
      ms.collision = agg.n_collision;
      ms.timeout = agg.n_timeout;
      ms.success_rate = agg.success_rate;
      ms.time_to_goal = agg.time_to_goal;
      ms.min_distance = agg.min_distance;
      ms.path_irregularity = agg.path_irregularity;
      cs.methods.push_back(std::move(ms));
    }
    out.push_back(std::move(cs));
  }
  return out;
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

}  // namespace

ExperimentConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse: ") + e.what());
  }
  check_keys(j, "config",
             {"format_version", "experiment_seed", "trials_per_condition",
              "sweeps", "methods", "trial", "scenario", "output_dir",
              "workers"});
  if (auto it = j.find("format_version"); it != j.end()) {
    if (!it->is_number_integer() || it->get<int>() != 1)
      throw ConfigError("config: unsupported format_version");
  }
  ExperimentConfig cfg;
  cfg.experiment_seed = read_u64(j, "config", "experiment_seed", cfg.experiment_seed);
  cfg.trials_per_condition =
      read_int(j, "config", "trials_per_condition", cfg.trials_per_condition);
  if (cfg.trials_per_condition < 1)
    throw ConfigError("trials_per_condition must be at least 1");
  if (auto it = j.find("sweeps"); it != j.end()) cfg.sweeps = parse_sweeps(*it);
  if (auto it = j.find("methods"); it != j.end())
    cfg.methods = parse_methods(*it);
  if (auto it = j.find("trial"); it != j.end()) parse_trial(*it, cfg.trial);
  if (auto it = j.find("scenario"); it != j.end())
    parse_scenario(*it, cfg.scenario);
  cfg.output_dir = read_string(j, "config", "output_dir", cfg.output_dir);
  if (cfg.output_dir.empty()) throw ConfigError("output_dir must not be empty");
  if (auto it = j.find("workers"); it != j.end()) cfg.workers = parse_workers(*it);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  return config_from_json(read_file(path));
}

std::string resolved_config_json(const ExperimentConfig& cfg,
                                 int resolved_workers) {
  json j;
  j["format_version"] = 1;
  j["experiment_seed"] = cfg.experiment_seed;
  j["trials_per_condition"] = cfg.trials_per_condition;
  json sweeps = json::array();
  for (Factor f : cfg.sweeps) sweeps.push_back(std::string(factor_name(f)));
  j["sweeps"] = std::move(sweeps);
  json methods = json::array();
  for (PolicyTag m : cfg.methods) methods.push_back(std::string(policy_name(m)));
  j["methods"] = std::move(methods);
  const TrialConfig& tc = cfg.trial;
  json trial;
  trial["dt"] = tc.dt;
  trial["time_limit"] = tc.time_limit;
  trial["goal_tolerance"] = tc.goal_tolerance;
  trial["predictor"] = tc.predictor;
  trial["sfm"] = {{"tau", tc.sfm.tau},       {"A", tc.sfm.A},
                  {"B", tc.sfm.B},           {"A_wall", tc.sfm.A_wall},
                  {"B_wall", tc.sfm.B_wall}, {"F_max", tc.sfm.F_max}};
  trial["orca"] = {{"neighbor_dist", tc.orca.neighbor_dist},
                   {"time_horizon", tc.orca.time_horizon}};
  const auto cost_json = [](const CostParams& p) {
    return json{{"w_goal", p.w_goal},
                {"C_col", p.C_col},
                {"w_discomfort", p.w_discomfort},
                {"buffer", p.buffer},
                {"w_smooth", p.w_smooth},
                {"lambda", p.lambda},
                {"samples", p.samples},
                {"sigma", p.sigma},
                {"horizon", p.horizon}};
  };
  trial["mpc"] = cost_json(tc.mpc);
  trial["mppi"] = cost_json(tc.mppi);
  j["trial"] = std::move(trial);
  const ScenarioParams& sp = cfg.scenario;
  j["scenario"] = {{"radius", sp.radius},
                   {"v_pref", sp.v_pref},
                   {"margin", sp.margin},
                   {"separation_gap", sp.separation_gap},
                   {"max_attempts", sp.max_attempts},
                   {"circle_inset", sp.circle_inset},
                   {"circle_noise", sp.circle_noise},
                   {"lane_dev_deg", sp.lane_dev_deg},
                   {"random_min_travel", sp.random_min_travel},
                   {"goal_chain_length", sp.goal_chain_length}};
  j["output_dir"] = cfg.output_dir;
  j["workers"] = resolved_workers;
  return j.dump(2) + "\n";
}

int resolve_workers(int configured) {
  if (configured > 0) return configured;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

std::vector<TrialRecord> run_trials(const ExperimentConfig& cfg, int workers) {
  if (cfg.trials_per_condition < 1)
    throw ConfigError("trials_per_condition must be at least 1");
  if (cfg.methods.empty()) throw ConfigError("methods must not be empty");
  get_predictor(cfg.trial.predictor);
  const auto conditions = selected_conditions(cfg.sweeps);
  const std::size_t C = conditions.size();
  const std::size_t M = cfg.methods.size();
  const std::size_t T = static_cast<std::size_t>(cfg.trials_per_condition);
  std::vector<TrialRecord> rows(C * M * T);

  // Work unit = (condition, trial): the scenario is sampled once and every
  // method runs on it. Rows land in preassigned slots, so the persisted
  // order never depends on scheduling.
  const std::size_t units = C * T;
  std::atomic<std::size_t> cursor{0};
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  const auto worker = [&]() {
    try {
      while (!failed.load(std::memory_order_relaxed)) {
        const std::size_t u = cursor.fetch_add(1, std::memory_order_relaxed);
        if (u >= units) return;
        const std::size_t ci = u / T;
        const std::size_t t = u % T;
        const SweepCondition& cond = *conditions[ci];
        const std::uint64_t seed =
            derive_seed(cfg.experiment_seed,
                        static_cast<std::uint64_t>(cond.global_index),
                        static_cast<std::uint64_t>(t));
        const Scenario sc = sample_scenario(cond, seed, cfg.scenario);
        const std::uint64_t hash = scenario_hash(sc);
        for (std::size_t mi = 0; mi < M; ++mi) {
          TrialConfig tc = cfg.trial;
          tc.ego_policy = cfg.methods[mi];
          tc.record_full_trajectories = false;
          const TrialResult res = run_trial(sc, tc, seed);
          TrialRecord& row = rows[(ci * M + mi) * T + t];
          row.condition = cond.name;
          row.method = std::string(policy_name(cfg.methods[mi]));
          row.trial = static_cast<int>(t);
          row.seed = seed;
          row.scenario_hash = hash;
          row.metrics.outcome = res.outcome;
          row.metrics.time_to_goal = res.time_to_goal;
          row.metrics.min_distance = res.min_agent_distance;
          row.metrics.path_irregularity = res.path_irregularity;
        }
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!first_error) first_error = std::current_exception();
      failed.store(true, std::memory_order_relaxed);
    }
  };

  const std::size_t pool = std::min<std::size_t>(
      static_cast<std::size_t>(resolve_workers(workers)), units);
  std::vector<std::thread> threads;
  threads.reserve(pool - 1);
  for (std::size_t i = 0; i + 1 < pool; ++i) threads.emplace_back(worker);
  worker();
  for (std::thread& th : threads) th.join();
  if (first_error) std::rethrow_exception(first_error);
  return rows;
}

std::string trials_csv(const std::vector<TrialRecord>& rows) {
  std::string out =
      "condition,method,trial,seed,scenario_hash,outcome,"
      "time_to_goal,min_distance,path_irregularity\n";
  for (const TrialRecord& row : rows) {
    out += row.condition;
    out += ',';
    out += row.method;
    out += ',';
    out += std::to_string(row.trial);
    out += ',';
    out += std::to_string(row.seed);
    out += ',';
    out += hash_hex(row.scenario_hash);
    out += ',';
    out += outcome_name(row.metrics.outcome);
    out += ',';
    if (row.metrics.time_to_goal) append_double(out, *row.metrics.time_to_goal);
    out += ',';
    if (row.metrics.min_distance) append_double(out, *row.metrics.min_distance);
    out += ',';
    if (row.metrics.path_irregularity)
      append_double(out, *row.metrics.path_irregularity);
    out += '\n';
  }
  return out;
}

std::filesystem::path run_experiments(const ExperimentConfig& cfg) {
  fs::path dir = cfg.output_dir;
  if (const char* env = std::getenv("CROWDSWEEP_OUTPUT_DIR");
      env != nullptr && *env != '\0') {
    dir = env;
  }
  std::error_code ec;
  fs::create_directories(dir / "plotdata", ec);
  if (ec) {
    throw IoError("cannot create output directory '" + dir.string() +
                  "': " + ec.message());
  }
  const int workers = resolve_workers(cfg.workers);
  write_file(dir / "resolved_config.json", resolved_config_json(cfg, workers));

  const std::vector<TrialRecord> rows = run_trials(cfg, workers);
  write_file(dir / "trials.csv", trials_csv(rows));

  const std::vector<CondStats> stats = stats_from_rows(cfg, rows);
  const json summary =
      summary_json(cfg.experiment_seed, cfg.trials_per_condition, stats);
  write_file(dir / "summary.json", summary.dump(2) + "\n");

  const std::vector<CorrelationReport> reports = build_reports(stats);
  write_file(dir / "correlations.json",
             correlations_json(reports).dump(2) + "\n");

  std::vector<std::string> factors;
  for (const CondStats& cs : stats) {
    bool seen = false;
    for (const std::string& f : factors) seen = seen || f == cs.factor;
    if (!seen) factors.push_back(cs.factor);
  }
  for (const std::string& factor : factors) {
    for (const char* metric : kMetricNames) {
      write_file(dir / "plotdata" / (factor + "_" + metric + ".csv"),
                 plot_csv(stats, factor, metric));
    }
  }
  return dir;
}

std::string analyze_directory(const std::filesystem::path& dir) {
  const std::string text = read_file(dir / "summary.json");
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw IoError(std::string("summary.json: ") + e.what());
  }
  const std::vector<CondStats> stats = stats_from_summary(j);
  const std::vector<CorrelationReport> reports = build_reports(stats);
  const std::string out = correlations_json(reports).dump(2) + "\n";
  write_file(dir / "correlations.json", out);
  return out;
}

std::string replay_trial(const std::filesystem::path& dir,
                         const std::string& condition,
                         const std::string& method, int trial) {
  const ExperimentConfig cfg = config_from_json(read_file(dir / "resolved_config.json"));
  const auto tag = policy_from_name(method);
  if (!tag) throw ConfigError("unknown method '" + method + "'");

  const std::string csv = read_file(dir / "trials.csv");
  const std::string trial_text = std::to_string(trial);
  std::uint64_t seed = 0;
  std::uint64_t recorded_hash = 0;
  std::string recorded_outcome;
  bool found = false;
  std::size_t pos = 0;
  while (pos < csv.size()) {
    std::size_t end = csv.find('\n', pos);
    if (end == std::string::npos) end = csv.size();
    const std::string_view line(csv.data() + pos, end - pos);
    pos = end + 1;
    const auto fields = split_csv_line(line);
    if (fields.size() < 6 || fields[0] != condition || fields[1] != method ||
        fields[2] != trial_text) {
      continue;
    }
    const auto seed_res =
        std::from_chars(fields[3].data(), fields[3].data() + fields[3].size(), seed);
    const auto hash_res =
        std::from_chars(fields[4].data(), fields[4].data() + fields[4].size(),
                        recorded_hash, 16);
    if (seed_res.ec != std::errc{} || hash_res.ec != std::errc{})
      throw IoError("trials.csv: malformed row for " + condition + "/" + method +
                    "/" + trial_text);
    recorded_outcome = std::string(fields[5]);
    found = true;
    break;
  }
  if (!found) {
    throw ConfigError("no recorded trial " + condition + "/" + method + "/" +
                      trial_text + " in " + (dir / "trials.csv").string());
  }

  const SweepCondition& cond = condition_by_name(condition);
  const Scenario sc = sample_scenario(cond, seed, cfg.scenario);
  if (scenario_hash(sc) != recorded_hash) {
    throw InternalError("replay scenario hash mismatch for " + condition + "/" +
                        method + "/" + trial_text +
                        ": the generator no longer reproduces the recorded run");
  }
  TrialConfig tc = cfg.trial;
  tc.ego_policy = *tag;
  tc.record_full_trajectories = true;
  const TrialResult res = run_trial(sc, tc, seed);
  if (outcome_name(res.outcome) != recorded_outcome) {
    throw InternalError("replay outcome mismatch for " + condition + "/" +
                        method + "/" + trial_text + ": recorded " +
                        recorded_outcome + ", got " +
                        std::string(outcome_name(res.outcome)));
  }
  return trajectory_csv(res);
}

std::string generate_scenario_json(const std::string& condition,
                                   std::uint64_t seed,
                                   const ScenarioParams& params) {
  const SweepCondition& cond = condition_by_name(condition);
  return scenario_to_json(sample_scenario(cond, seed, params)) + "\n";
}

}  // namespace crowdsweep
