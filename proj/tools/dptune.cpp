// dptune: train, test and simulate the dynamic-positioning controller.
//
//   dptune train    --config cfg.json [--seed N] [--budget N] [--workers N] --out DIR
//   dptune test     --params best_params.txt [--config cfg.json] --out DIR
//   dptune simulate --params best_params.txt --scenario NAME [--config cfg.json] --out DIR
//
// Exit codes: 0 success, 2 configuration error, 3 divergence in test mode.

#include <CLI11.hpp>

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "dptune/errors.hpp"
#include "dptune/io.hpp"
#include "dptune/scenario.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kDivergence = 3;

struct Options {
  std::string config;
  std::string params;
  std::string scenario = "four_corner";
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> budget;
  std::optional<std::size_t> workers;
};

dptune::TrainingConfig load(const Options& o) {
  dptune::TrainingConfig cfg = o.config.empty() ? dptune::TrainingConfig{} : dptune::load_config(o.config);
  if (o.seed) cfg.cma.seed = *o.seed;
  if (o.budget) cfg.cma.max_evaluations = *o.budget;
  if (o.workers) cfg.cma.workers = *o.workers;
  return cfg;
}

int train(const Options& o) {
  const dptune::TrainingConfig cfg = load(o);
  const dptune::TrainOutcome outcome = dptune::run_training(cfg, o.out);
  std::cout << "case " << cfg.case_id << ": best objective "
            << dptune::format_double(outcome.optimization.best_f) << " after "
            << outcome.optimization.evaluations << " evaluations ("
            << outcome.optimization.stop_reason << ")\n"
            << "  J_e = " << dptune::format_double(outcome.breakdown.tracking)
            << ", J_uc = " << dptune::format_double(outcome.breakdown.input_excess)
            << ", J_du = " << dptune::format_double(outcome.breakdown.rate_excess) << '\n';
  return 0;
}

int evaluate(const Options& o, const std::string& selector) {
  const dptune::TrainingConfig cfg = load(o);
  const Eigen::VectorXd x = dptune::read_params(o.params);
  const dptune::ScenarioSpec scenario = dptune::select_scenario(selector, cfg);
  dptune::TestReport report;
  dptune::run_scenario(x, scenario, cfg, o.out, &report);
  std::cout << scenario.name << ": J_total = " << dptune::format_double(report.breakdown.total())
            << ", excess fraction = " << dptune::format_double(report.any_excess_fraction)
            << ", final error = " << dptune::format_double(report.final_position_error) << " m / "
            << dptune::format_double(dptune::rad_to_deg(report.final_heading_error)) << " deg\n";
  return report.diverged ? kDivergence : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Co-tune backstepping gains and reference-filter coefficients for a DP ship"};
  app.require_subcommand(1);
  Options o;

  auto common = [&o](CLI::App* cmd) {
    cmd->add_option("--config", o.config, "JSON configuration (ship, penalties, CMA-ES, scenarios)");
    cmd->add_option("--out", o.out, "Output directory");
    cmd->add_option("--seed", o.seed, "Override the CMA-ES seed");
    cmd->add_option("--budget", o.budget, "Override the evaluation budget");
    cmd->add_option("--workers", o.workers, "Parallel objective evaluations (results do not depend on it)");
  };

  CLI::App* train_cmd = app.add_subcommand("train", "Optimize the 18 parameters over the training scenarios");
  common(train_cmd);
  train_cmd->get_option("--config")->required();

  CLI::App* test_cmd = app.add_subcommand("test", "Run the four-corner test with trained parameters");
  common(test_cmd);
  test_cmd->add_option("--params", o.params, "best_params.txt")->required();

  CLI::App* sim_cmd = app.add_subcommand("simulate", "Run one scenario and export its trace");
  common(sim_cmd);
  sim_cmd->add_option("--params", o.params, "best_params.txt")->required();
  sim_cmd->add_option("--scenario", o.scenario,
                      "four_corner, train_<k>, or episode_<e>_wind_<deg>");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (train_cmd->parsed()) return train(o);
    if (test_cmd->parsed()) return evaluate(o, "four_corner");
    return evaluate(o, o.scenario);
  } catch (const dptune::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfigError;
  } catch (const dptune::ParameterBoundsError& e) {
    std::cerr << "parameter error: " << e.what() << '\n';
    return kConfigError;
  } catch (const dptune::DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << '\n';
    return kDivergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
