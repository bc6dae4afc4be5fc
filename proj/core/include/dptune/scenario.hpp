#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dptune/cmaes.hpp"
#include "dptune/objective.hpp"
#include "dptune/scenario_spec.hpp"
#include "dptune/ship_dynamics.hpp"

namespace dptune {

/// Target (x [m], y [m], psi [rad]) of training episode 1..11.
Vec3 training_target(int episode);
inline constexpr int kTrainingEpisodes = 11;

/// Shared episode settings for every generated scenario.
struct EpisodeSettings {
  double duration = 120.0;
  double dt = 0.1;
  int filter_substeps = 20;
  SegmentCaps segmentation;
  ControlOptions control;
};

/// Which training episodes and wind directions to use.
struct TrainingSelection {
  std::vector<int> episodes{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
  /// Earth-frame directions the wind blows from [rad]; default the eight points of the compass.
  std::vector<double> wind_directions{0.0,
                                      kPi / 4.0,
                                      kPi / 2.0,
                                      3.0 * kPi / 4.0,
                                      kPi,
                                      5.0 * kPi / 4.0,
                                      3.0 * kPi / 2.0,
                                      7.0 * kPi / 4.0};
  double wind_speed = 1.0;
  /// false: every episode under every direction (episode-major order).
  /// true: episode i gets direction i mod count.
  bool one_direction_per_episode = false;
};

std::vector<ScenarioSpec> training_scenarios(const TrainingSelection& selection,
                                             const EpisodeSettings& settings = {});

/// Corner sequence of the four-corner station-keeping test, in visiting order.
std::vector<Vec3> four_corner_goals();

/// Four-corner test from the origin under a 0.5 m/s wind from 30 deg. Phases
/// switch on settle or 120 s timeout; the episode lasts five timeouts.
ScenarioSpec four_corner_scenario(const EpisodeSettings& settings = {});

struct TrainingConfig {
  int case_id = 1;
  PenaltyConfig penalty = PenaltyConfig::for_case(1);
  TrainingSelection selection;
  EpisodeSettings episode;
  CmaConfig cma;
  ShipParams ship = ShipParams::defaults();
};

/// Parses a JSON training/test configuration. Missing sections take defaults;
/// a present "ship" section must carry every hull key. Throws ConfigError.
TrainingConfig load_config(const std::filesystem::path& path);
TrainingConfig parse_config(const std::string& json_text);
ShipParams parse_ship(const std::string& json_text);

void write_params(const std::filesystem::path& path, const Eigen::VectorXd& x);
/// Throws ConfigError on a malformed file, ParameterBoundsError if out of box.
Eigen::VectorXd read_params(const std::filesystem::path& path);

struct TrainOutcome {
  OptimizationResult optimization;
  ObjectiveBreakdown breakdown;  // of the best parameters over the training set
  std::size_t scenario_count = 0;
  std::size_t diverged_episodes = 0;
};

/// Optimizes the 18 parameters over the selected training scenarios and writes
/// best_params.txt, history.csv and summary.txt to out_dir.
TrainOutcome run_training(const TrainingConfig& config, const std::filesystem::path& out_dir);

struct PhaseStats {
  std::size_t phase = 0;
  std::size_t steps = 0;
  double position_rms = 0.0;  // |p - p_d| in the plane [m]
  double heading_rms = 0.0;   // wrapped psi - psi_d [rad]
};

struct TestReport {
  ObjectiveBreakdown breakdown;
  double input_excess_fraction = 0.0;  // steps with any nonzero input excess
  double rate_excess_fraction = 0.0;   // steps with any nonzero rate excess
  double any_excess_fraction = 0.0;    // steps with either
  double final_position_error = 0.0;   // [m] to the last goal
  double final_heading_error = 0.0;    // [rad]
  std::vector<PhaseStats> phases;
  bool diverged = false;
};

TestReport summarize_episode(const EpisodeResult& episode, const ScenarioSpec& scenario);

/// Runs one scenario with the given parameters; writes trace_<name>.csv and
/// summary.txt into out_dir when it is non-empty.
EpisodeResult run_scenario(const Eigen::VectorXd& x, const ScenarioSpec& scenario,
                           const TrainingConfig& config, const std::filesystem::path& out_dir,
                           TestReport* report = nullptr);

/// Looks up a scenario by name: "four_corner" or "train_<k>" (index into the
/// training list, 0-based) or "episode_<e>_wind_<deg>".
ScenarioSpec select_scenario(const std::string& selector, const TrainingConfig& config);

}  // namespace dptune
