#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "crowdsweep/metrics.hpp"
#include "crowdsweep/scenario.hpp"
#include "crowdsweep/sim.hpp"
#include "crowdsweep/stats.hpp"

namespace crowdsweep {

struct ExperimentConfig {
  std::uint64_t experiment_seed = 1;
  int trials_per_condition = 100;
  std::vector<Factor> sweeps = {Factor::Density, Factor::Directionality,
                                Factor::Width, Factor::PolicyMixture};
  std::vector<PolicyTag> methods = {PolicyTag::Cv,     PolicyTag::Rp,
                                    PolicyTag::Orca,   PolicyTag::Sfm,
                                    PolicyTag::MpcCv,  PolicyTag::MppiCv};
  TrialConfig trial;        // ego_policy and recording set per method/run
  ScenarioParams scenario;
  std::string output_dir = "crowdsweep_out";
  int workers = 0;  // 0 resolves to the hardware thread count
};

// The four reported metrics, in report order.
inline constexpr const char* kMetricNames[] = {
    "success_rate", "time_to_goal", "min_distance", "path_irregularity"};

// Strict parse: unknown keys anywhere are config errors.
ExperimentConfig config_from_json(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

// The full effective configuration, itself loadable as a config file.
std::string resolved_config_json(const ExperimentConfig& cfg,
                                 int resolved_workers);

struct TrialRecord {
  std::string condition;
  std::string method;
  int trial = 0;
  std::uint64_t seed = 0;
  std::uint64_t scenario_hash = 0;
  MetricRow metrics;
};

int resolve_workers(int configured);

// Every (condition, method, trial) row in persisted order: condition in
// sweep-table order, then method in config order, then trial index. The
// scenario seed depends only on (experiment_seed, condition, trial), so
// every method sees the identical scenario. Output is independent of the
// worker count.
std::vector<TrialRecord> run_trials(const ExperimentConfig& cfg, int workers);

std::string trials_csv(const std::vector<TrialRecord>& rows);

// Batch run: writes resolved_config.json, trials.csv, summary.json,
// correlations.json, and plotdata/<factor>_<metric>.csv under the output
// directory (env CROWDSWEEP_OUTPUT_DIR overrides the configured one).
// Returns the directory actually used.
std::filesystem::path run_experiments(const ExperimentConfig& cfg);

// Recompute correlations.json from summary.json alone (no simulation);
// writes it next to the summary and returns its text.
std::string analyze_directory(const std::filesystem::path& dir);

// Re-run one recorded trial from its persisted seed, verify the scenario
// hash and outcome still match, and return the full trajectory csv.
std::string replay_trial(const std::filesystem::path& dir,
                         const std::string& condition,
                         const std::string& method, int trial);

// Scenario document for external inspection (the `gen` subcommand).
std::string generate_scenario_json(const std::string& condition,
                                   std::uint64_t seed,
                                   const ScenarioParams& params);

}  // namespace crowdsweep
