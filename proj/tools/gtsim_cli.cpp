#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "gtsim/bounds.hpp"
#include "gtsim/errors.hpp"
#include "gtsim/harness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalidParameter = 2;
constexpr int kExitIo = 3;
constexpr int kExitResourceLimit = 4;

void print_bound_report(const gtsim::BoundReport& report, bool as_json) {
  if (as_json) {
    nlohmann::json j{{"n", report.n},
                     {"theta", report.theta},
                     {"k", report.k},
                     {"m_inf", report.m_inf},
                     {"m_one_stage", report.m_one_stage},
                     {"m_mezard", report.m_mezard},
                     {"m_counting", report.m_counting},
                     {"dorfman_group_size", report.dorfman_group_size},
                     {"m_dorfman_expected", report.m_dorfman_expected}};
    std::cout << j.dump(2) << "\n";
    return;
  }
  char line[128];
  std::cout << "n                  " << report.n << "\n";
  std::cout << "theta              " << gtsim::format_double(report.theta) << "\n";
  std::cout << "k                  " << report.k << "\n";
  std::snprintf(line, sizeof(line), "m_inf              %.4f\n", report.m_inf);
  std::cout << line;
  std::snprintf(line, sizeof(line), "m_one_stage        %.4f\n", report.m_one_stage);
  std::cout << line;
  std::snprintf(line, sizeof(line), "m_mezard           %.4f\n", report.m_mezard);
  std::cout << line;
  std::snprintf(line, sizeof(line), "m_counting         %.4f\n", report.m_counting);
  std::cout << line;
  std::cout << "dorfman_group_size " << report.dorfman_group_size << "\n";
  std::snprintf(line, sizeof(line), "m_dorfman_expected %.4f\n", report.m_dorfman_expected);
  std::cout << line;
}

int run(int argc, char** argv) {
  CLI::App app{"gtsim: pooled-testing pipelines, decoders and test-count bounds"};
  app.require_subcommand(1);

  // bounds
  auto* bounds_cmd = app.add_subcommand("bounds", "print the closed-form test-count figures");
  std::uint64_t bounds_n = 0;
  double bounds_theta = 0.0;
  bool bounds_json = false;
  bounds_cmd->add_option("--n", bounds_n, "population size")->required();
  bounds_cmd->add_option("--theta", bounds_theta, "sparsity exponent in (0,1)")->required();
  bounds_cmd->add_flag("--json", bounds_json, "emit JSON instead of the text report");

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "run a single pipeline trial");
  gtsim::ExperimentConfig sim_cfg;
  double sim_theta = -1.0;
  std::int64_t sim_k = -1;
  std::uint64_t sim_m = 0;
  double sim_m_factor = 0.0;
  std::string sim_group_size = "auto";
  std::uint64_t sim_error_budget = 0;
  bool sim_json = false;
  sim_cmd->add_option("--pipeline", sim_cfg.pipeline, "aspiv | dorfman | one_stage")
      ->required();
  sim_cmd->add_option("--n", sim_cfg.n, "population size")->required();
  sim_cmd->add_option("--theta", sim_theta, "sparsity exponent in (0,1)");
  sim_cmd->add_option("--k", sim_k, "explicit infected count (overrides theta-derived k)");
  sim_cmd->add_option("--epsilon", sim_cfg.epsilon, "budget slack (default 0.2)");
  sim_cmd->add_option("--estimator", sim_cfg.estimator,
                      "comp | dd | scored_dd | synthetic (default dd)");
  sim_cmd->add_option("--threshold", sim_cfg.threshold, "scored_dd proof-count threshold");
  auto* eb_opt = sim_cmd->add_option("--error-budget", sim_error_budget,
                                     "synthetic estimator: planted errors (default k/ln n)");
  sim_cmd->add_option("--m", sim_m, "absolute stage-1 budget / one-stage test count");
  sim_cmd->add_option("--m-factor", sim_m_factor, "budget as a multiple of m_inf(n, theta)");
  sim_cmd->add_option("--group-size", sim_group_size, "dorfman group size or 'auto'");
  sim_cmd->add_option("--seed", sim_cfg.master_seed, "master seed (trial uses derived seed 0)");
  sim_cmd->add_flag("--json", sim_json, "emit the record as JSON instead of CSV");

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "run a Monte-Carlo sweep from a config file");
  std::string sweep_config_path;
  sweep_cmd->add_option("--config", sweep_config_path, "JSON config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n" << app.help();
    return kExitInvalidParameter;
  }

  if (bounds_cmd->parsed()) {
    print_bound_report(gtsim::make_bound_report(bounds_n, bounds_theta), bounds_json);
    return kExitOk;
  }

  if (sim_cmd->parsed()) {
    if (sim_theta >= 0.0) sim_cfg.theta = sim_theta;
    if (sim_k >= 0) sim_cfg.k = static_cast<std::uint64_t>(sim_k);
    if (*eb_opt) sim_cfg.error_budget = sim_error_budget;
    if (sim_cfg.pipeline == "dorfman") {
      if (sim_group_size != "auto") {
        try {
          sim_cfg.s_grid = {static_cast<std::uint64_t>(std::stoull(sim_group_size))};
        } catch (const std::exception&) {
          throw gtsim::InvalidParameterError("--group-size must be an integer or 'auto'");
        }
      }
    } else if (sim_m > 0) {
      sim_cfg.m_grid = {sim_m};
    } else if (sim_m_factor > 0.0) {
      sim_cfg.m_factors = {sim_m_factor};
    } else {
      throw gtsim::InvalidParameterError("simulate needs --m or --m-factor for this pipeline");
    }
    sim_cfg.trials = 1;
    sim_cfg.output_path.clear();
    const gtsim::SweepResult result = gtsim::run_sweep(sim_cfg, 1);
    if (sim_json)
      std::cout << gtsim::records_to_json(result.records, result.summary);
    else
      std::cout << gtsim::records_to_csv(result.records);
    return kExitOk;
  }

  // sweep
  const gtsim::ExperimentConfig cfg = gtsim::ExperimentConfig::from_json_file(sweep_config_path);
  const gtsim::SweepResult result = gtsim::run_sweep(cfg);
  std::cout << gtsim::summary_to_csv(result.summary);
  if (!cfg.output_path.empty())
    std::cerr << "records written to " << cfg.output_path << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const gtsim::InvalidParameterError& e) {
    std::cerr << "invalid parameter: " << e.what() << "\n";
    return kExitInvalidParameter;
  } catch (const gtsim::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const gtsim::ResourceLimitError& e) {
    std::cerr << "resource limit: " << e.what() << "\n";
    return kExitResourceLimit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
