#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "dptune/backstepping.hpp"
#include "dptune/reference.hpp"
#include "dptune/scenario_spec.hpp"
#include "dptune/ship_dynamics.hpp"

namespace dptune {

/// Clamp of s into [lower, upper]; throws std::invalid_argument if lower > upper.
double clip(double s, double lower, double upper);

struct PenaltyConfig {
  double r1 = 0.0;              // input-excess weight
  double r2 = 0.0;              // rate-excess weight
  double filter_weight = 10.0;  // w_e
  /// Diagonal of R1.
  Vec3 error_weights{1.0 / (1.0 * 1.0), 1.0 / (1.0 * 1.0), 1.0 / ((0.2 * kPi) * (0.2 * kPi))};
  double divergence_radius = 100.0;  // [m]
  double divergence_factor = 10.0;

  /// Table weights: case 1 penalizes both excesses (10, 10), case 2 neither.
  static PenaltyConfig for_case(int case_id);
};

/// e = (p - p_r) + w_e (p - p_d), heading differences wrapped first.
Vec3 combined_error(const Pose& pose, const Vec3& p_r, const Vec3& p_d, double w_e);

/// u_c - clip(u_c) per actuator box.
Vec3 input_excess(const ActuatorState& command, const ActuatorLimits& limits);

/// du = (u_c - u) / dt, excess = du - clip(du, -Omega, Omega).
Vec3 rate_excess(const ActuatorState& command, const ActuatorState& u, double dt,
                 const ActuatorLimits& limits);

/// Diagonals of R2 and R3 with the weights folded in.
Vec3 input_excess_weights(const ActuatorLimits& limits, double r1);
Vec3 rate_excess_weights(const ActuatorLimits& limits, double r2);

struct TraceRecord {
  double t = 0.0;
  ShipState state;          // after the step
  ActuatorState command;    // raw u_c issued during the step
  Vec3 input_excess = Vec3::Zero();
  Vec3 rate_excess = Vec3::Zero();
  Vec3 error = Vec3::Zero();
  Vec3 raw_reference = Vec3::Zero();
  Vec3 filtered_reference = Vec3::Zero();
  std::size_t phase = 0;
};

struct EpisodeTrace {
  std::vector<TraceRecord> records;
  std::size_t planned_steps = 0;
  bool diverged = false;
  /// Charge applied to each step lost to divergence.
  double divergence_step_penalty = 0.0;
};

struct ObjectiveBreakdown {
  double tracking = 0.0;       // J_e
  double input_excess = 0.0;   // J_uc
  double rate_excess = 0.0;    // J_du
  double total() const { return tracking + input_excess + rate_excess; }

  ObjectiveBreakdown& operator+=(const ObjectiveBreakdown& other);
};

struct EpisodeResult {
  EpisodeTrace trace;
  ObjectiveBreakdown breakdown;
};

/// Runs the closed loop for scenario.steps() steps. Per step: the controller
/// acts on the ship and filter state at t_k; the command is scored for
/// excesses; the ship (with limited actuators) and the filter advance to
/// t_k + dt; e is scored at the new time. Divergence ends the episode and
/// charges each remaining step divergence_factor times the largest per-step
/// tracking cost seen.
EpisodeResult run_episode(const GainParams& gains, const FilterParams& filter,
                          const ScenarioSpec& scenario, const ShipModel& model,
                          const PenaltyConfig& penalty);

/// Re-accumulates the objective from a stored trace under (possibly different) weights.
ObjectiveBreakdown score_trace(const EpisodeTrace& trace, const ActuatorLimits& limits,
                               const PenaltyConfig& penalty);

/// The 18 optimized parameters: 12 gain factors followed by 6 filter coefficients.
struct DecisionVector {
  static constexpr std::size_t kSize = GainParams::kSize + FilterParams::kSize;
  static Eigen::VectorXd lower();
  static Eigen::VectorXd upper();
  static const std::vector<std::string>& labels();
  static bool in_bounds(std::span<const double> x);
  /// Throws ParameterBoundsError on size mismatch or out-of-box input.
  static std::pair<GainParams, FilterParams> decode(std::span<const double> x);
  static Eigen::VectorXd encode(const GainParams& gains, const FilterParams& filter);
};

/// Sum of per-scenario J_total.
double objective(std::span<const double> x, std::span<const ScenarioSpec> scenarios,
                 const ShipModel& model, const PenaltyConfig& penalty);
ObjectiveBreakdown objective_breakdown(std::span<const double> x,
                                       std::span<const ScenarioSpec> scenarios,
                                       const ShipModel& model, const PenaltyConfig& penalty);

/// Trace columns: t, pose, velocity, actuators, commands, input/rate excess, e.
const std::vector<std::string>& trace_columns();
void write_trace_csv(std::ostream& out, const EpisodeTrace& trace);

}  // namespace dptune
