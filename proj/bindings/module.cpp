#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "crowdsweep/errors.hpp"
#include "crowdsweep/experiment.hpp"
#include "crowdsweep/metrics.hpp"
#include "crowdsweep/scenario.hpp"
#include "crowdsweep/sim.hpp"
#include "crowdsweep/stats.hpp"

namespace py = pybind11;
using namespace crowdsweep;

namespace {

py::dict result_dict(const TrialResult& res, bool with_trajectory) {
  py::dict d;
  d["outcome"] = std::string(outcome_name(res.outcome));
  d["steps"] = res.steps;
  d["time_to_goal"] =
      res.time_to_goal ? py::object(py::float_(*res.time_to_goal)) : py::none();
  d["min_distance"] = res.min_agent_distance
                          ? py::object(py::float_(*res.min_agent_distance))
                          : py::none();
  d["path_irregularity"] =
      res.path_irregularity ? py::object(py::float_(*res.path_irregularity))
                            : py::none();
  if (with_trajectory) d["trajectory_csv"] = trajectory_csv(res);
  return d;
}

TrialResult run_one(const Scenario& sc, const std::string& method,
                    std::uint64_t seed, bool with_trajectory) {
  const auto tag = policy_from_name(method);
  if (!tag) throw ConfigError("unknown method '" + method + "'");
  TrialConfig tc;
  tc.ego_policy = *tag;
  tc.record_full_trajectories = with_trajectory;
  return run_trial(sc, tc, seed);
}

}  // namespace

PYBIND11_MODULE(_crowdsweep, m) {
  m.doc() = "Deterministic crowd-navigation benchmark core";
  m.attr("__version__") = "0.1.0";

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const IoError& e) {
      PyErr_SetString(PyExc_OSError, e.what());
    } catch (const InternalError& e) {
      PyErr_SetString(PyExc_RuntimeError, e.what());
    }
  });

  m.def("conditions", []() {
    std::vector<std::string> names;
    for (const SweepCondition& cond : all_conditions()) names.push_back(cond.name);
    return names;
  });

  m.def(
      "condition_info",
      [](const std::string& name) {
        const SweepCondition& cond = condition_by_name(name);
        py::dict d;
        d["name"] = cond.name;
        d["factor"] = std::string(factor_name(cond.factor));
        d["level_index"] = cond.level_index;
        d["global_index"] = cond.global_index;
        d["density"] = cond.density;
        d["directionality"] = std::string(directionality_name(cond.directionality));
        d["width"] = cond.width;
        if (cond.mixture) {
          py::dict mix;
          mix["orca"] = cond.mixture->orca;
          mix["sfm"] = cond.mixture->sfm;
          mix["cv"] = cond.mixture->cv;
          mix["still"] = cond.mixture->still;
          d["mixture"] = mix;
        } else {
          d["mixture"] = py::none();
        }
        return d;
      },
      py::arg("name"));

  m.def("methods", []() {
    std::vector<std::string> names;
    for (PolicyTag tag : {PolicyTag::Cv, PolicyTag::Static, PolicyTag::Sfm,
                          PolicyTag::Orca, PolicyTag::Rp, PolicyTag::MpcCv,
                          PolicyTag::MppiCv}) {
      names.push_back(std::string(policy_name(tag)));
    }
    return names;
  });

  m.def(
      "generate_scenario",
      [](const std::string& condition, std::uint64_t seed) {
        return generate_scenario_json(condition, seed, ScenarioParams{});
      },
      py::arg("condition"), py::arg("seed"));

  m.def(
      "run_trial",
      [](const std::string& condition, std::uint64_t seed,
         const std::string& method, bool trajectory) {
        const Scenario sc =
            sample_scenario(condition_by_name(condition), seed, ScenarioParams{});
        return result_dict(run_one(sc, method, seed, trajectory), trajectory);
      },
      py::arg("condition"), py::arg("seed"), py::arg("method") = "orca",
      py::arg("trajectory") = false);

  m.def(
      "run_scenario",
      [](const std::string& scenario_json, std::uint64_t seed,
         const std::string& method, bool trajectory) {
        const Scenario sc = scenario_from_json(scenario_json);
        return result_dict(run_one(sc, method, seed, trajectory), trajectory);
      },
      py::arg("scenario_json"), py::arg("seed"), py::arg("method") = "orca",
      py::arg("trajectory") = false);

  m.def(
      "run_experiments",
      [](const std::string& config_json) {
        const ExperimentConfig cfg = config_from_json(config_json);
        return run_experiments(cfg).string();
      },
      py::arg("config_json"),
      py::call_guard<py::gil_scoped_release>());

  m.def(
      "analyze",
      [](const std::string& dir) {
        return analyze_directory(std::filesystem::path(dir));
      },
      py::arg("dir"));

  m.def(
      "replay",
      [](const std::string& dir, const std::string& condition,
         const std::string& method, int trial) {
        return replay_trial(std::filesystem::path(dir), condition, method, trial);
      },
      py::arg("dir"), py::arg("condition"), py::arg("method"), py::arg("trial"));

  m.def(
      "spearman",
      [](const std::vector<double>& xs, const std::vector<double>& ys) {
        const SpearmanResult r = spearman(xs, ys);
        py::dict d;
        d["rho"] = r.rho;
        d["p_value"] = r.p_value;
        d["defined"] = r.defined;
        return d;
      },
      py::arg("xs"), py::arg("ys"));
}
