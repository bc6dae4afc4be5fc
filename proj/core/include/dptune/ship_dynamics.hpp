#pragma once

#include <Eigen/LU>

#include <cstddef>
#include <functional>

#include "dptune/types.hpp"

namespace dptune {

/// Isherwood-type regression coefficients of the dimensionless wind loads.
struct WindRegressors {
  double xx0 = 0.0, xx1 = 0.0, xx3 = 0.0, xx5 = 0.0;
  double yy1 = 0.0, yy3 = 0.0, yy5 = 0.0;
  double nn1 = 0.0, nn2 = 0.0, nn3 = 0.0;
};

struct WindCoefficients {
  double cx = 0.0;
  double cy = 0.0;
  double cpsi = 0.0;
};

/// Actuator boxes and slew-rate limits (port rudder, starboard rudder, bow thruster).
struct ActuatorLimits {
  Interval port{deg_to_rad(-105.0), deg_to_rad(-60.0)};
  Interval starboard{deg_to_rad(60.0), deg_to_rad(105.0)};
  Interval bow{-60.0, 60.0};
  Vec3 rate{0.349, 0.349, 100.0};

  const Interval& box(int j) const { return j == 0 ? port : (j == 1 ? starboard : bow); }

  /// Every box widened to the real line and every rate limit removed.
  static ActuatorLimits unbounded();
};

struct ShipParams {
  Mat3 mass = Mat3::Zero();        // rigid-body plus added mass
  Mat3 damping = Mat3::Zero();
  Mat3 force_map = Mat3::Zero();   // TV: deviation command -> (X, Y, N)
  double hover_port = 0.0;         // rudder angles with zero net force [rad]
  double hover_starboard = 0.0;
  double stern_propeller_speed = 60.0;  // constant, enters only through force_map
  double length_pp = 0.0;
  double area_transverse = 0.0;
  double area_lateral = 0.0;
  double air_density = 1.225;
  WindRegressors wind;
  ActuatorLimits limits;

  /// Model-scale placeholder vessel. These numbers are not identified from any
  /// real hull; they give a controllable twin-rudder ship of about 1.5 m length.
  static ShipParams defaults();
};

/// Validated ship parameters with the matrices the controller and integrator need.
class ShipModel {
 public:
  /// Throws ConfigError when M is singular, M or D break the 3-DOF sparsity
  /// pattern, B = M^-1 TV is singular, a box is empty or a rate limit is not positive.
  explicit ShipModel(ShipParams params);

  const ShipParams& params() const { return params_; }
  const ActuatorLimits& limits() const { return params_.limits; }
  const Mat3& mass_inverse() const { return mass_inverse_; }
  /// A = M^-1 D
  const Mat3& decay() const { return decay_; }
  /// B = M^-1 TV
  const Mat3& input() const { return input_; }
  double input_condition() const { return input_condition_; }

  /// Solves B x = rhs.
  Vec3 solve_input(const Vec3& rhs) const { return input_lu_.solve(rhs); }

 private:
  ShipParams params_;
  Mat3 mass_inverse_;
  Mat3 decay_;
  Mat3 input_;
  Eigen::PartialPivLU<Mat3> input_lu_;
  double input_condition_ = 0.0;
};

Mat3 rotation_matrix(double psi);
/// Element-wise derivative of rotation_matrix with respect to psi.
Mat3 rotation_derivative(double psi);

struct RelativeWind {
  double speed = 0.0;  // U_A [m/s]
  double angle = 0.0;  // gamma_A in [0, 2pi); 0 means wind from dead ahead
};

/// Apparent wind seen from the hull: earth wind velocity minus ship ground
/// velocity, expressed in the body frame. The angle is the body-frame direction
/// the apparent wind comes from, measured from the bow towards starboard.
RelativeWind relative_wind(const Pose& pose, const Velocity& velocity, const WindCondition& wind);

WindCoefficients wind_coefficients(double gamma_a, const ShipParams& params);

Vec3 wind_force(double speed_a, double gamma_a, const ShipParams& params);
Vec3 wind_force(const Pose& pose, const Velocity& velocity, const WindCondition& wind,
                const ShipParams& params);

/// (delta_P - delta_P,h, delta_S - delta_S,h, n_B |n_B|)
Vec3 actuator_deviation(const ActuatorState& u, const ShipParams& params);

Vec3 actuator_force(const Vec3& u_tilde, const ShipParams& params);

/// v_dot = -M^-1 D v + M^-1 (tau + tau_wind)
Vec3 acceleration(const Velocity& velocity, const Vec3& tau, const Vec3& tau_wind,
                  const ShipModel& model);

/// Slews each actuator towards the command by at most rate*dt, then clips into its box.
ActuatorState apply_actuator_limits(const ActuatorState& u, const ActuatorState& command,
                                    double dt, const ActuatorLimits& limits);

/// One evaluation of the equations of motion.
struct DerivativeSample {
  Velocity velocity;
  Vec3 tau = Vec3::Zero();
  Vec3 tau_wind = Vec3::Zero();
  Vec3 acceleration = Vec3::Zero();
};

using DerivativeObserver = std::function<void(const DerivativeSample&)>;

struct StepOptions {
  int substeps = 1;
  std::size_t step_index = 0;
  const DerivativeObserver* observer = nullptr;
};

/// Advances the ship by dt with explicit Euler. The actuators are limited once
/// per call; the forces use the limited actuators. Within each substep the pose
/// is advanced with the pre-update velocity. Throws DivergenceError on any
/// non-finite state component.
ShipState step(const ShipState& state, const ActuatorState& command, const WindCondition& wind,
               double dt, const ShipModel& model, const StepOptions& options = {});

}  // namespace dptune
