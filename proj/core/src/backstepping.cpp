#include "dptune/backstepping.hpp"

#include <cmath>
#include <string>

#include "dptune/errors.hpp"

namespace dptune {

namespace {

Mat3 lower_factor(const GainParams& x, std::size_t offset) {
  const auto& a = x.a;
  Mat3 f;
  f << a[offset + 0], 0.0, 0.0,
       a[offset + 1], a[offset + 2], 0.0,
       a[offset + 3], a[offset + 4], a[offset + 5];
  return f;
}

}  // namespace

bool GainParams::is_diagonal(std::size_t i) {
  const std::size_t k = i % 6;
  return k == 0 || k == 2 || k == 5;
}

Interval GainParams::bounds(std::size_t i) {
  return is_diagonal(i) ? Interval{0.001, 10.0} : Interval{-10.0, 10.0};
}

bool GainParams::in_bounds() const {
  for (std::size_t i = 0; i < kSize; ++i) {
    if (!bounds(i).contains(a[i])) return false;
  }
  return true;
}

GainMatrices build_gains(const GainParams& x) {
  for (std::size_t i = 0; i < GainParams::kSize; ++i) {
    if (!GainParams::bounds(i).contains(x.a[i])) {
      throw ParameterBoundsError("gain parameter " + std::to_string(i) + " = " +
                                 std::to_string(x.a[i]) + " is outside its search box");
    }
  }
  const Mat3 a1 = lower_factor(x, 0);
  const Mat3 a2 = lower_factor(x, 6);
  GainMatrices g;
  g.c1 = a1 * a1.transpose();
  g.c2 = a2 * a2.transpose();
  return g;
}

TrackingErrors tracking_errors(const Pose& pose, const Velocity& velocity,
                               const ReferenceSignal& ref, const GainMatrices& gains) {
  TrackingErrors out;
  out.e1 = pose.vector() - ref.position;
  out.e1.z() = wrap_to_pi(out.e1.z());
  out.alpha1 = -gains.c1 * out.e1 + ref.velocity;
  out.e2 = rotation_matrix(pose.psi) * velocity.vector() - out.alpha1;
  return out;
}

Vec3 control_target(const ShipState& state, const ReferenceSignal& ref, const GainMatrices& gains,
                    const Vec3& tau_wind, const ShipModel& model, const ControlOptions& options) {
  const TrackingErrors err = tracking_errors(state.pose, state.velocity, ref, gains);
  const Vec3 v = state.velocity.vector();
  const Mat3 j = rotation_matrix(state.pose.psi);
  const Mat3 dj = rotation_derivative(state.pose.psi);
  const Mat3& c1 = gains.c1;

  Vec3 rhs = -gains.c2 * err.e2 - err.e1 + c1 * (c1 * err.e1) - c1 * err.e2 -
             (dj * state.velocity.yaw_rate) * v + j * (model.decay() * v) + ref.acceleration;
  if (options.wind_feedforward) rhs -= j * (model.mass_inverse() * tau_wind);
  return rhs;
}

Vec3 control_law(const ShipState& state, const ReferenceSignal& ref, const GainMatrices& gains,
                 const Vec3& tau_wind, const ShipModel& model, const ControlOptions& options) {
  // J is orthogonal, so cond(J B) = cond(B).
  if (!(model.input_condition() <= options.max_condition)) {
    throw ControlSingularityError("input matrix condition number " +
                                  std::to_string(model.input_condition()) + " exceeds " +
                                  std::to_string(options.max_condition));
  }
  const Vec3 rhs = control_target(state, ref, gains, tau_wind, model, options);
  return model.solve_input(rotation_matrix(state.pose.psi).transpose() * rhs);
}

ActuatorState command_to_actuator(const Vec3& u_tilde_c, const ShipParams& params) {
  ActuatorState u;
  u.port = u_tilde_c.x() + params.hover_port;
  u.starboard = u_tilde_c.y() + params.hover_starboard;
  u.bow = std::copysign(std::sqrt(std::abs(u_tilde_c.z())), u_tilde_c.z());
  return u;
}

}  // namespace dptune
