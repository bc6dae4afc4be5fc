#include "dptune/objective.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

#include "dptune/errors.hpp"
#include "dptune/io.hpp"

namespace dptune {

namespace {

double weighted_square(const Vec3& weights, const Vec3& x) {
  return weights(0) * x(0) * x(0) + weights(1) * x(1) * x(1) + weights(2) * x(2) * x(2);
}

bool finite(const Vec3& v) { return v.allFinite(); }

}  // namespace

double clip(double s, double lower, double upper) {
  if (lower > upper) throw std::invalid_argument("clip: lower bound exceeds upper bound");
  if (s > upper) return upper;
  if (s < lower) return lower;
  return s;
}

PenaltyConfig PenaltyConfig::for_case(int case_id) {
  PenaltyConfig cfg;
  switch (case_id) {
    case 1:
      cfg.r1 = 10.0;
      cfg.r2 = 10.0;
      break;
    case 2:
      cfg.r1 = 0.0;
      cfg.r2 = 0.0;
      break;
    default:
      throw ConfigError("unknown case id " + std::to_string(case_id) + " (expected 1 or 2)");
  }
  return cfg;
}

Vec3 combined_error(const Pose& pose, const Vec3& p_r, const Vec3& p_d, double w_e) {
  Vec3 to_raw = pose.vector() - p_r;
  Vec3 to_filtered = pose.vector() - p_d;
  to_raw.z() = wrap_to_pi(to_raw.z());
  to_filtered.z() = wrap_to_pi(to_filtered.z());
  return to_raw + w_e * to_filtered;
}

Vec3 input_excess(const ActuatorState& command, const ActuatorLimits& limits) {
  const Vec3 u = command.vector();
  Vec3 excess;
  for (int j = 0; j < 3; ++j) {
    excess(j) = u(j) - clip(u(j), limits.box(j).lower, limits.box(j).upper);
  }
  return excess;
}

Vec3 rate_excess(const ActuatorState& command, const ActuatorState& u, double dt,
                 const ActuatorLimits& limits) {
  if (!(dt > 0.0)) throw std::invalid_argument("rate_excess: dt must be positive");
  const Vec3 rate = (command.vector() - u.vector()) / dt;
  Vec3 excess;
  for (int j = 0; j < 3; ++j) {
    excess(j) = rate(j) - clip(rate(j), -limits.rate(j), limits.rate(j));
  }
  return excess;
}

Vec3 input_excess_weights(const ActuatorLimits& limits, double r1) {
  Vec3 w;
  for (int j = 0; j < 3; ++j) {
    const double width = limits.box(j).width();
    w(j) = std::isfinite(width) ? (r1 / 3.0) / (width * width) : 0.0;
  }
  return w;
}

Vec3 rate_excess_weights(const ActuatorLimits& limits, double r2) {
  Vec3 w;
  for (int j = 0; j < 3; ++j) {
    const double omega = limits.rate(j);
    w(j) = std::isfinite(omega) ? (r2 / 3.0) / (omega * omega) : 0.0;
  }
  return w;
}

ObjectiveBreakdown& ObjectiveBreakdown::operator+=(const ObjectiveBreakdown& other) {
  tracking += other.tracking;
  input_excess += other.input_excess;
  rate_excess += other.rate_excess;
  return *this;
}

ObjectiveBreakdown score_trace(const EpisodeTrace& trace, const ActuatorLimits& limits,
                               const PenaltyConfig& penalty) {
  const Vec3 r2 = input_excess_weights(limits, penalty.r1);
  const Vec3 r3 = rate_excess_weights(limits, penalty.r2);
  ObjectiveBreakdown b;
  for (const auto& rec : trace.records) {
    b.tracking += weighted_square(penalty.error_weights, rec.error);
    b.input_excess += weighted_square(r2, rec.input_excess);
    b.rate_excess += weighted_square(r3, rec.rate_excess);
  }
  if (trace.diverged && trace.planned_steps > trace.records.size()) {
    const auto lost = static_cast<double>(trace.planned_steps - trace.records.size());
    b.tracking += lost * trace.divergence_step_penalty;
  }
  return b;
}

EpisodeResult run_episode(const GainParams& gains, const FilterParams& filter,
                          const ScenarioSpec& scenario, const ShipModel& model,
                          const PenaltyConfig& penalty) {
  const GainMatrices gain_matrices = build_gains(gains);
  if (!filter.in_bounds()) throw ParameterBoundsError("filter parameters outside their search box");

  const std::size_t steps = scenario.steps();
  const double dt = scenario.dt;
  const ShipParams& params = model.params();

  ShipState state;
  state.pose = scenario.initial_pose;
  state.velocity = scenario.initial_velocity;
  state.actuators = scenario.initial_actuators.value_or(
      ActuatorState{params.hover_port, params.hover_starboard, 0.0});

  FilterState filter_state = FilterState::at_rest(state.pose.vector());
  PhasedReference reference(state.pose.vector(), scenario.goals, scenario.segmentation,
                            scenario.switching);

  EpisodeResult result;
  EpisodeTrace& trace = result.trace;
  trace.planned_steps = steps;
  trace.records.reserve(steps);

  double worst_step_cost = 0.0;
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    const Vec3 p_r = reference.update(t, filter_state);
    const Vec3 tau_wind = wind_force(state.pose, state.velocity, scenario.wind, params);
    const Vec3 u_tilde = control_law(state, filter_state.signal(), gain_matrices, tau_wind, model,
                                     scenario.control);
    const ActuatorState command = command_to_actuator(u_tilde, params);

    TraceRecord rec;
    rec.command = command;
    rec.input_excess = input_excess(command, model.limits());
    rec.rate_excess = rate_excess(command, state.actuators, dt, model.limits());
    rec.raw_reference = p_r;
    rec.phase = reference.phase();

    ShipState next;
    try {
      next = step(state, command, scenario.wind, dt, model,
                  StepOptions{scenario.ship_substeps, k, nullptr});
    } catch (const DivergenceError&) {
      trace.diverged = true;
      break;
    }
    filter_state = filter_step(filter_state, p_r, dt, filter, scenario.filter_substeps);

    rec.t = static_cast<double>(k + 1) * dt;
    rec.state = next;
    rec.filtered_reference = filter_state.position;
    rec.error = combined_error(next.pose, p_r, filter_state.position, penalty.filter_weight);

    if (!finite(rec.error) || !finite(rec.input_excess) || !finite(rec.rate_excess) ||
        !filter_state.velocity.allFinite() || !filter_state.acceleration.allFinite()) {
      trace.diverged = true;
      break;
    }
    worst_step_cost = std::max(worst_step_cost, weighted_square(penalty.error_weights, rec.error));
    trace.records.push_back(rec);
    state = next;

    const double excursion = std::hypot(next.pose.x - p_r.x(), next.pose.y - p_r.y());
    if (excursion > penalty.divergence_radius) {
      trace.diverged = true;
      break;
    }
  }

  if (trace.diverged) {
    if (trace.records.empty()) {
      // Nothing observed; charge an error the size of the divergence radius on every axis.
      const double e = (1.0 + penalty.filter_weight) * penalty.divergence_radius;
      worst_step_cost = penalty.error_weights.maxCoeff() * e * e;
    }
    trace.divergence_step_penalty = penalty.divergence_factor * worst_step_cost;
  }
  result.breakdown = score_trace(trace, model.limits(), penalty);
  return result;
}

Eigen::VectorXd DecisionVector::lower() {
  Eigen::VectorXd lo(kSize);
  for (std::size_t i = 0; i < GainParams::kSize; ++i) lo(i) = GainParams::bounds(i).lower;
  for (std::size_t i = 0; i < FilterParams::kSize; ++i)
    lo(GainParams::kSize + i) = FilterParams::bounds(i).lower;
  return lo;
}

Eigen::VectorXd DecisionVector::upper() {
  Eigen::VectorXd hi(kSize);
  for (std::size_t i = 0; i < GainParams::kSize; ++i) hi(i) = GainParams::bounds(i).upper;
  for (std::size_t i = 0; i < FilterParams::kSize; ++i)
    hi(GainParams::kSize + i) = FilterParams::bounds(i).upper;
  return hi;
}

const std::vector<std::string>& DecisionVector::labels() {
  static const std::vector<std::string> names{
      "a11", "a12", "a13", "a14", "a15", "a16", "a21", "a22", "a23", "a24", "a25", "a26",
      "zeta_x", "zeta_y", "zeta_psi", "omega_x", "omega_y", "omega_psi"};
  return names;
}

bool DecisionVector::in_bounds(std::span<const double> x) {
  if (x.size() != kSize) return false;
  const Eigen::VectorXd lo = lower();
  const Eigen::VectorXd hi = upper();
  for (std::size_t i = 0; i < kSize; ++i) {
    if (!(x[i] >= lo(i) && x[i] <= hi(i))) return false;
  }
  return true;
}

std::pair<GainParams, FilterParams> DecisionVector::decode(std::span<const double> x) {
  if (x.size() != kSize) {
    throw ParameterBoundsError("decision vector must have " + std::to_string(kSize) + " entries");
  }
  if (!in_bounds(x)) throw ParameterBoundsError("decision vector outside its search box");
  GainParams gains;
  std::copy_n(x.begin(), GainParams::kSize, gains.a.begin());
  FilterParams filter;
  for (int i = 0; i < 3; ++i) {
    filter.zeta(i) = x[GainParams::kSize + i];
    filter.omega(i) = x[GainParams::kSize + 3 + i];
  }
  return {gains, filter};
}

Eigen::VectorXd DecisionVector::encode(const GainParams& gains, const FilterParams& filter) {
  Eigen::VectorXd x(kSize);
  for (std::size_t i = 0; i < GainParams::kSize; ++i) x(i) = gains.a[i];
  for (int i = 0; i < 3; ++i) {
    x(GainParams::kSize + i) = filter.zeta(i);
    x(GainParams::kSize + 3 + i) = filter.omega(i);
  }
  return x;
}

double objective(std::span<const double> x, std::span<const ScenarioSpec> scenarios,
                 const ShipModel& model, const PenaltyConfig& penalty) {
  const auto [gains, filter] = DecisionVector::decode(x);
  double total = 0.0;
  for (const auto& scenario : scenarios) {
    total += run_episode(gains, filter, scenario, model, penalty).breakdown.total();
  }
  return total;
}

ObjectiveBreakdown objective_breakdown(std::span<const double> x,
                                       std::span<const ScenarioSpec> scenarios,
                                       const ShipModel& model, const PenaltyConfig& penalty) {
  const auto [gains, filter] = DecisionVector::decode(x);
  ObjectiveBreakdown total;
  for (const auto& scenario : scenarios) {
    total += run_episode(gains, filter, scenario, model, penalty).breakdown;
  }
  return total;
}

const std::vector<std::string>& trace_columns() {
  static const std::vector<std::string> cols{
      "t", "x", "y", "psi", "v1", "v2", "v3", "delta_P", "delta_S", "n_B",
      "delta_P_c", "delta_S_c", "n_B_c", "uhat_1", "uhat_2", "uhat_3",
      "duhat_1", "duhat_2", "duhat_3", "e_1", "e_2", "e_3"};
  return cols;
}

void write_trace_csv(std::ostream& out, const EpisodeTrace& trace) {
  const auto& cols = trace_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const auto& r : trace.records) {
    const double row[] = {r.t,
                          r.state.pose.x, r.state.pose.y, r.state.pose.psi,
                          r.state.velocity.surge, r.state.velocity.sway, r.state.velocity.yaw_rate,
                          r.state.actuators.port, r.state.actuators.starboard, r.state.actuators.bow,
                          r.command.port, r.command.starboard, r.command.bow,
                          r.input_excess(0), r.input_excess(1), r.input_excess(2),
                          r.rate_excess(0), r.rate_excess(1), r.rate_excess(2),
                          r.error(0), r.error(1), r.error(2)};
    bool first = true;
    for (double v : row) {
      out << (first ? "" : ",") << format_double(v);
      first = false;
    }
    out << '\n';
  }
}

}  // namespace dptune
