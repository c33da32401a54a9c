#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "crowdsweep/errors.hpp"
#include "crowdsweep/experiment.hpp"
#include "json.hpp"

namespace {

// Exit codes: 0 ok, 1 config error, 2 i/o error, 3 broken invariant.
constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kIoError = 2;
constexpr int kInternalError = 3;

void print_correlation_headlines(const std::filesystem::path& dir) {
  std::ifstream in(dir / "correlations.json", std::ios::binary);
  if (!in) return;
  std::ostringstream buf;
  buf << in.rdbuf();
  const nlohmann::json doc = nlohmann::json::parse(buf.str());
  for (const auto& report : doc.at("reports")) {
    const std::string factor = report.at("factor").get<std::string>();
    const std::string metric = report.at("metric").get<std::string>();
    if (report.at("insufficient").get<bool>()) {
      std::printf("rho(%s, %s): insufficient data (n = %d)\n", factor.c_str(),
                  metric.c_str(), report.at("n").get<int>());
    } else if (!report.at("defined").get<bool>()) {
      std::printf("rho(%s, %s): undefined (constant ranks)\n", factor.c_str(),
                  metric.c_str());
    } else {
      std::printf("rho(%s, %s) = %+.3f (p = %.4g, n = %d)\n", factor.c_str(),
                  metric.c_str(), report.at("rho").get<double>(),
                  report.at("p_value").get<double>(), report.at("n").get<int>());
    }
  }
}

int run_command(const std::string& config_path, bool paper, int workers) {
  crowdsweep::ExperimentConfig cfg = crowdsweep::load_config(config_path);
  if (paper) cfg.trials_per_condition = 500;
  if (workers >= 0) cfg.workers = workers;
  const std::filesystem::path dir = crowdsweep::run_experiments(cfg);
  print_correlation_headlines(dir);
  std::printf("artifacts: %s\n", dir.string().c_str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic crowd-navigation benchmark"};
  app.require_subcommand(1);

  std::string config_path;
  bool paper = false;
  int workers = -1;
  CLI::App* run = app.add_subcommand("run", "Run the configured sweeps and write artifacts");
  run->add_option("--config", config_path, "Experiment config (JSON)")->required();
  run->add_flag("--paper", paper, "Full-scale run: 500 trials per condition");
  run->add_option("--workers", workers, "Worker threads; 0 means auto")
      ->check(CLI::NonNegativeNumber);

  std::string analyze_dir;
  CLI::App* analyze = app.add_subcommand("analyze", "Recompute correlations.json from summary.json");
  analyze->add_option("dir", analyze_dir, "Results directory")->required();

  std::string replay_dir, replay_condition, replay_method;
  int replay_index = 0;
  CLI::App* replay = app.add_subcommand("replay", "Re-run one recorded trial; print its trajectory CSV");
  replay->add_option("dir", replay_dir, "Results directory")->required();
  replay->add_option("condition", replay_condition, "Condition name")->required();
  replay->add_option("method", replay_method, "Ego policy name")->required();
  replay->add_option("trial", replay_index, "Trial index")->required();

  std::string gen_condition;
  std::uint64_t gen_seed = 0;
  CLI::App* gen = app.add_subcommand("gen", "Sample one scenario; print it as JSON");
  gen->add_option("--condition", gen_condition, "Condition name")->required();
  gen->add_option("--seed", gen_seed, "Scenario seed")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (run->parsed()) return run_command(config_path, paper, workers);
    if (analyze->parsed()) {
      std::cout << crowdsweep::analyze_directory(analyze_dir);
      return kOk;
    }
    if (replay->parsed()) {
      std::cout << crowdsweep::replay_trial(replay_dir, replay_condition,
                                            replay_method, replay_index);
      return kOk;
    }
    if (gen->parsed()) {
      std::cout << crowdsweep::generate_scenario_json(gen_condition, gen_seed,
                                                      crowdsweep::ScenarioParams{});
      return kOk;
    }
  } catch (const crowdsweep::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  } catch (const crowdsweep::IoError& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return kIoError;
  } catch (const crowdsweep::InternalError& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kInternalError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kInternalError;
  }
  return kConfigError;
}
