#include "dptune/ship_dynamics.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "dptune/errors.hpp"

namespace dptune {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool has_three_dof_pattern(const Mat3& m) {
  return m(0, 1) == 0.0 && m(0, 2) == 0.0 && m(1, 0) == 0.0 && m(2, 0) == 0.0;
}

bool all_finite(const Mat3& m) { return m.allFinite(); }

bool finite_state(const ShipState& s) {
  return std::isfinite(s.pose.x) && std::isfinite(s.pose.y) && std::isfinite(s.pose.psi) &&
         std::isfinite(s.velocity.surge) && std::isfinite(s.velocity.sway) &&
         std::isfinite(s.velocity.yaw_rate) && std::isfinite(s.actuators.port) &&
         std::isfinite(s.actuators.starboard) && std::isfinite(s.actuators.bow);
}

double slew(double from, double to, double max_delta) {
  const double delta = to - from;
  if (delta > max_delta) return from + max_delta;
  if (delta < -max_delta) return from - max_delta;
  return to;
}

}  // namespace

ActuatorLimits ActuatorLimits::unbounded() {
  ActuatorLimits limits;
  limits.port = {-kInf, kInf};
  limits.starboard = {-kInf, kInf};
  limits.bow = {-kInf, kInf};
  limits.rate = Vec3::Constant(kInf);
  return limits;
}

ShipParams ShipParams::defaults() {
  ShipParams p;
  // Placeholder desk-scale hull (about 1.5 m long); swap in identified values via JSON.
  p.mass << 13.0, 0.0, 0.0,
            0.0, 20.0, 0.5,
            0.0, 0.5, 2.5;
  p.damping << 4.0, 0.0, 0.0,
               0.0, 12.0, 0.3,
               0.0, 0.3, 1.5;
  // Columns: port rudder deviation [N/rad], starboard rudder deviation [N/rad],
  // bow thruster n|n| [N s^2]. Opening both rudders from hover drives ahead;
  // turning them together gives side force at the stern.
  p.force_map << 30.0, -30.0, 0.0,
                 8.0, 8.0, 3.3e-3,
                 -2.6, -2.6, 3.3e-3 * 0.6;
  p.hover_port = deg_to_rad(-80.0);
  p.hover_starboard = deg_to_rad(80.0);
  p.stern_propeller_speed = 60.0;
  p.length_pp = 1.5;
  p.area_transverse = 0.08;
  p.area_lateral = 0.25;
  p.air_density = 1.225;
  p.wind = WindRegressors{-0.05, -0.70, 0.05, -0.10,
                          0.80, -0.05, 0.02,
                          0.05, -0.08, 0.01};
  return p;
}

ShipModel::ShipModel(ShipParams params) : params_(std::move(params)) {
  const auto& p = params_;
  if (!all_finite(p.mass) || !all_finite(p.damping) || !all_finite(p.force_map)) {
    throw ConfigError("ship matrices must be finite");
  }
  if (!has_three_dof_pattern(p.mass)) throw ConfigError("M must have zero entries m12, m13, m21, m31");
  if (!has_three_dof_pattern(p.damping)) throw ConfigError("D must have zero entries d12, d13, d21, d31");
  const double det_m = p.mass.determinant();
  if (!(std::abs(det_m) > 0.0)) throw ConfigError("M is singular");

  mass_inverse_ = p.mass.inverse();
  decay_ = mass_inverse_ * p.damping;
  input_ = mass_inverse_ * p.force_map;

  Eigen::JacobiSVD<Mat3> svd(input_);
  const Vec3 sv = svd.singularValues();
  if (!(sv(2) > 0.0)) throw ConfigError("B = M^-1 TV is singular");
  input_condition_ = sv(0) / sv(2);
  input_lu_.compute(input_);

  for (int j = 0; j < 3; ++j) {
    if (p.limits.box(j).empty()) throw ConfigError("actuator box " + std::to_string(j) + " is empty");
    if (!(p.limits.rate(j) > 0.0)) throw ConfigError("actuator rate limits must be positive");
  }
  if (!(p.length_pp > 0.0) || !(p.area_transverse >= 0.0) || !(p.area_lateral >= 0.0) ||
      !(p.air_density >= 0.0)) {
    throw ConfigError("hull geometry and air density must be positive");
  }
}

Mat3 rotation_matrix(double psi) {
  const double c = std::cos(psi);
  const double s = std::sin(psi);
  Mat3 j;
  j << c, -s, 0.0,
       s, c, 0.0,
       0.0, 0.0, 1.0;
  return j;
}

Mat3 rotation_derivative(double psi) {
  const double c = std::cos(psi);
  const double s = std::sin(psi);
  Mat3 dj;
  dj << -s, -c, 0.0,
        c, -s, 0.0,
        0.0, 0.0, 0.0;
  return dj;
}

RelativeWind relative_wind(const Pose& pose, const Velocity& velocity, const WindCondition& wind) {
  // Earth frame: the wind blows towards direction + pi.
  const double wind_x = -wind.speed * std::cos(wind.direction);
  const double wind_y = -wind.speed * std::sin(wind.direction);
  const double c = std::cos(pose.psi);
  const double s = std::sin(pose.psi);
  const double ship_x = c * velocity.surge - s * velocity.sway;
  const double ship_y = s * velocity.surge + c * velocity.sway;
  const double rel_x = wind_x - ship_x;
  const double rel_y = wind_y - ship_y;
  // Rotate into the body frame (J^T).
  const double body_x = c * rel_x + s * rel_y;
  const double body_y = -s * rel_x + c * rel_y;

  RelativeWind out;
  out.speed = std::hypot(body_x, body_y);
  out.angle = out.speed > 0.0 ? wrap_to_two_pi(std::atan2(-body_y, -body_x)) : 0.0;
  return out;
}

WindCoefficients wind_coefficients(double gamma_a, const ShipParams& params) {
  const auto& w = params.wind;
  const double a = 2.0 * kPi - gamma_a;
  WindCoefficients c;
  c.cx = w.xx0 + w.xx1 * std::cos(a) + w.xx3 * std::cos(3.0 * a) + w.xx5 * std::cos(5.0 * a);
  c.cy = w.yy1 * std::sin(a) + w.yy3 * std::sin(3.0 * a) + w.yy5 * std::sin(5.0 * a);
  c.cpsi = w.nn1 * std::sin(a) + w.nn2 * std::sin(2.0 * a) + w.nn3 * std::sin(3.0 * a);
  return c;
}

Vec3 wind_force(double speed_a, double gamma_a, const ShipParams& params) {
  const WindCoefficients c = wind_coefficients(gamma_a, params);
  const double q = 0.5 * params.air_density * speed_a * speed_a;
  return {q * params.area_transverse * c.cx,
          q * params.area_lateral * c.cy,
          q * params.area_lateral * params.length_pp * c.cpsi};
}

Vec3 wind_force(const Pose& pose, const Velocity& velocity, const WindCondition& wind,
                const ShipParams& params) {
  const RelativeWind rel = relative_wind(pose, velocity, wind);
  return wind_force(rel.speed, rel.angle, params);
}

Vec3 actuator_deviation(const ActuatorState& u, const ShipParams& params) {
  return {u.port - params.hover_port, u.starboard - params.hover_starboard,
          u.bow * std::abs(u.bow)};
}

Vec3 actuator_force(const Vec3& u_tilde, const ShipParams& params) {
  return params.force_map * u_tilde;
}

Vec3 acceleration(const Velocity& velocity, const Vec3& tau, const Vec3& tau_wind,
                  const ShipModel& model) {
  return -model.decay() * velocity.vector() + model.mass_inverse() * (tau + tau_wind);
}

ActuatorState apply_actuator_limits(const ActuatorState& u, const ActuatorState& command,
                                    double dt, const ActuatorLimits& limits) {
  ActuatorState next;
  next.port = limits.port.clamp(slew(u.port, command.port, limits.rate(0) * dt));
  next.starboard =
      limits.starboard.clamp(slew(u.starboard, command.starboard, limits.rate(1) * dt));
  next.bow = limits.bow.clamp(slew(u.bow, command.bow, limits.rate(2) * dt));
  return next;
}

ShipState step(const ShipState& state, const ActuatorState& command, const WindCondition& wind,
               double dt, const ShipModel& model, const StepOptions& options) {
  ShipState next = state;
  next.actuators = apply_actuator_limits(state.actuators, command, dt, model.limits());

  const Vec3 tau = actuator_force(actuator_deviation(next.actuators, model.params()), model.params());
  const int substeps = options.substeps > 0 ? options.substeps : 1;
  const double h = dt / substeps;

  for (int k = 0; k < substeps; ++k) {
    const Vec3 v = next.velocity.vector();
    const Vec3 tau_wind = wind_force(next.pose, next.velocity, wind, model.params());
    const Vec3 v_dot = acceleration(next.velocity, tau, tau_wind, model);
    if (options.observer != nullptr && *options.observer) {
      (*options.observer)(DerivativeSample{next.velocity, tau, tau_wind, v_dot});
    }
    const Vec3 p_dot = rotation_matrix(next.pose.psi) * v;
    next.pose = Pose::from(next.pose.vector() + p_dot * h);
    next.velocity = Velocity::from(v + v_dot * h);
  }

  if (!finite_state(next)) throw DivergenceError("non-finite ship state", options.step_index);
  return next;
}

}  // namespace dptune
